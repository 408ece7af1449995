"""
Process-level settings read from the environment (EA_*) and an optional .env file
"""

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runner settings"""
    model_config = SettingsConfigDict(
        env_prefix="EA_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Output
    out_dir: str = "."

    # Logging
    log_level: str = "INFO"
    log_json: bool = False

    # Parallel runs
    n_jobs: int = Field(1, ge=-1)

    # Monitoring
    prometheus_port: Optional[int] = None


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get runner settings"""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the environment is read again"""
    global _settings
    _settings = None
