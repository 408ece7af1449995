"""
Logging and Prometheus metrics for evolutionary runs
"""

import json
import logging
from typing import Any, Dict

from prometheus_client import Counter, Histogram, start_http_server

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

FITNESS_EVALUATIONS = Counter(
    "ea_fitness_evaluations_total",
    "Total number of problem evaluations",
    ["algorithm"],
)

RUN_COUNT = Counter(
    "ea_runs_total",
    "Total number of completed runs",
    ["algorithm", "stop_reason"],
)

GENERATION_DURATION = Histogram(
    "ea_generation_duration_seconds",
    "Wall time of one generation in seconds",
    ["algorithm"],
)

# Attributes every LogRecord carries; anything else came in through `extra`
_RESERVED = set(vars(logging.makeLogRecord({})).keys()) | {"message", "asctime"}


class JsonFormatter(logging.Formatter):
    """One JSON object per line, including structured `extra` fields"""

    def format(self, record: logging.LogRecord) -> str:
        payload: Dict[str, Any] = {
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        for key, value in record.__dict__.items():
            if key not in _RESERVED:
                payload[key] = value
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=str)


def setup_logging(level: str = "INFO", json_lines: bool = False) -> None:
    """Configure the root logger for CLI use"""
    handler = logging.StreamHandler()
    handler.setFormatter(JsonFormatter() if json_lines else logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level.upper())


class StructuredLogger:
    """Logger wrapper taking keyword fields as structured data"""

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)

    def debug(self, message: str, **kwargs):
        self.logger.debug(message, extra=kwargs)

    def info(self, message: str, **kwargs):
        self.logger.info(message, extra=kwargs)

    def warning(self, message: str, **kwargs):
        self.logger.warning(message, extra=kwargs)

    def error(self, message: str, **kwargs):
        self.logger.error(message, extra=kwargs)


class MetricsCollector:
    """Records per-generation and per-run metrics"""

    def record_generation(self, algorithm: str, duration: float, evaluations: int) -> None:
        GENERATION_DURATION.labels(algorithm=algorithm).observe(duration)
        if evaluations:
            FITNESS_EVALUATIONS.labels(algorithm=algorithm).inc(evaluations)

    def record_run(self, algorithm: str, stop_reason: str) -> None:
        RUN_COUNT.labels(algorithm=algorithm, stop_reason=stop_reason).inc()


def start_prometheus_server(port: int) -> None:
    """Start the Prometheus metrics endpoint"""
    try:
        start_http_server(port)
        logger.info(f"Prometheus metrics server started on port {port}")
    except OSError as e:
        logger.error(f"Failed to start Prometheus server: {e}")


structured_logger = StructuredLogger("ea")
