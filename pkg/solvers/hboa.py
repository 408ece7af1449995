"""
Hierarchical Bayesian Optimization Algorithm

The model is a Bayesian network whose local structures are binary decision
trees, grown greedily under a BDe score with a per-leaf complexity penalty.
Offspring are generated by ancestral sampling and inserted with restricted
tournament replacement (RTR).
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ea.core import Genome, Population, RandomStream
from ea.engine import RunContext, Solver
from ea.errors import ConfigurationError, EvaluationStateError
from ea.selection import SelectedSet, rtr_replace, tournament_select, truncation_count

logger = logging.getLogger(__name__)


class HboaParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    offspring_fraction: float = Field(0.5, ge=0, le=1)
    rtr_window: Optional[int] = Field(None, ge=1)  # None -> min(n, N/20)
    max_incoming: Optional[int] = Field(None, ge=0)  # None -> unlimited
    tournament_size: int = Field(2, ge=1)


def leaf_score(m0: int, m1: int) -> float:
    """Log BDe contribution of a leaf with unit Dirichlet hyperparameters"""
    return math.lgamma(2) - math.lgamma(2 + m0 + m1) + math.lgamma(1 + m0) + math.lgamma(1 + m1)


def log_factorials(limit: int) -> np.ndarray:
    """ln(k!) for k = 0..limit"""
    table = np.zeros(limit + 1)
    if limit >= 1:
        table[1:] = np.cumsum(np.log(np.arange(1, limit + 1)))
    return table


def split_penalty(S: int) -> float:
    return 0.5 * math.log2(S) if S > 1 else 0.0


@dataclass
class TreeNode:
    m0: int
    m1: int
    order: int = 0
    split_gene: Optional[int] = None
    zero: Optional["TreeNode"] = None
    one: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.split_gene is None

    def p_one(self) -> float:
        """Laplace-smoothed probability of allele 1"""
        return (self.m1 + 1) / (self.m0 + self.m1 + 2)


class DecisionTree:
    """Local structure for one target gene"""

    def __init__(self, target: int, m0: int, m1: int):
        self.target = target
        self.root = TreeNode(m0, m1, order=0)
        self.leaf_count = 1

    def leaves(self) -> List[TreeNode]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend((node.one, node.zero))
        return out

    def tested_genes(self) -> Set[int]:
        genes, stack = set(), [self.root]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                genes.add(node.split_gene)
                stack.extend((node.zero, node.one))
        return genes

    def paths_are_simple(self) -> bool:
        """No gene is tested twice on a root-to-leaf path"""
        stack: List[Tuple[TreeNode, frozenset]] = [(self.root, frozenset())]
        while stack:
            node, path = stack.pop()
            if node.is_leaf:
                continue
            if node.split_gene in path or node.split_gene == self.target:
                return False
            nxt = path | {node.split_gene}
            stack.extend(((node.zero, nxt), (node.one, nxt)))
        return True

    def probabilities(self, X: np.ndarray) -> np.ndarray:
        """Probability of allele 1 for the target in each row of X"""
        p = np.empty(X.shape[0])
        stack = [(self.root, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if node.is_leaf:
                p[idx] = node.p_one()
                continue
            bits = X[idx, node.split_gene]
            stack.append((node.zero, idx[bits == 0]))
            stack.append((node.one, idx[bits == 1]))
        return p


@dataclass
class SplitRecord:
    target: int
    gene: int
    gain: float


@dataclass
class DecisionForest:
    """One decision tree per gene plus the dependency DAG (edge j -> i iff i's tree tests j)"""
    trees: List[DecisionTree]
    parents: List[Set[int]]
    history: List[SplitRecord] = field(default_factory=list)

    @property
    def string_size(self) -> int:
        return len(self.trees)

    def edges(self) -> List[Tuple[int, int]]:
        return sorted((j, i) for i, ps in enumerate(self.parents) for j in ps)

    def children(self) -> List[Set[int]]:
        kids: List[Set[int]] = [set() for _ in self.trees]
        for j, i in self.edges():
            kids[j].add(i)
        return kids

    def descendants(self, start: int, kids: Optional[List[Set[int]]] = None) -> Set[int]:
        kids = kids if kids is not None else self.children()
        seen, stack = set(), [start]
        while stack:
            for nxt in kids[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    def topological_order(self) -> List[int]:
        """Kahn's algorithm, smallest ready gene first"""
        indegree = [len(ps) for ps in self.parents]
        kids = self.children()
        ready = [i for i, d in enumerate(indegree) if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(i)
            for k in kids[i]:
                indegree[k] -= 1
                if indegree[k] == 0:
                    heapq.heappush(ready, k)
        if len(order) != len(self.trees):
            raise RuntimeError("dependency graph contains a cycle")
        return order

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except RuntimeError:
            return False
        return True

    def describe(self) -> str:
        edges = self.edges()
        body = " ".join(f"{j}->{i}" for j, i in edges)
        return f"edges={len(edges)}" + (f" {body}" if body else "")


@dataclass
class _LeafState:
    tree: int
    node: TreeNode
    rows: np.ndarray
    path: frozenset
    gains: np.ndarray  # gain per candidate gene, -inf where illegal on the path


def _leaf_scores(m0: np.ndarray, m1: np.ndarray, lf: np.ndarray) -> np.ndarray:
    return lf[m0] + lf[m1] - lf[m0 + m1 + 1]


def _split_gains(matrix: np.ndarray, rows: np.ndarray, target: int, path: frozenset,
                 lf: np.ndarray, penalty: float) -> np.ndarray:
    sub = matrix[rows].astype(np.int64)
    xi = sub[:, target]
    R, ones = len(rows), int(xi.sum())
    n_j1 = sub.sum(axis=0)
    both = xi @ sub
    a1, a0 = both, n_j1 - both
    b1 = ones - both
    b0 = (R - n_j1) - b1
    parent = lf[R - ones] + lf[ones] - lf[R + 1]
    gains = _leaf_scores(a0, a1, lf) + _leaf_scores(b0, b1, lf) - parent - penalty
    gains[target] = -np.inf
    for j in path:
        gains[j] = -np.inf
    return gains


def _illegal_parents(forest: DecisionForest, max_incoming: Optional[int]) -> np.ndarray:
    """illegal[i, j] is True when a new edge j -> i would close a cycle or exceed the cap"""
    n = forest.string_size
    kids = forest.children()
    illegal = np.zeros((n, n), dtype=bool)
    for i in range(n):
        if max_incoming is not None and len(forest.parents[i]) >= max_incoming:
            illegal[i, :] = True
        else:
            illegal[i, list(forest.descendants(i, kids) | {i})] = True
        # an existing edge never adds a cycle
        illegal[i, list(forest.parents[i])] = False
    return illegal


def build_forest(sel: SelectedSet | Population | np.ndarray,
                 max_incoming: Optional[int] = None) -> DecisionForest:
    """
    Greedy decision-forest learning. Every step applies the legal split with the
    largest strictly positive gain; ties go to the smallest (target, gene, leaf
    creation order). A split is legal when the tested gene is not already on the
    leaf's path and the edge it implies keeps the dependency graph acyclic.
    """
    matrix = sel if isinstance(sel, np.ndarray) else sel.matrix()
    S, n = matrix.shape
    if S == 0:
        raise EvaluationStateError("cannot build a model from an empty selected set")
    lf = log_factorials(S + 1)
    penalty = split_penalty(S)
    all_rows = np.arange(S)

    ones = matrix.sum(axis=0).astype(np.int64)
    trees = [DecisionTree(i, int(S - ones[i]), int(ones[i])) for i in range(n)]
    forest = DecisionForest(trees=trees, parents=[set() for _ in range(n)])
    leaves: List[_LeafState] = [
        _LeafState(i, trees[i].root, all_rows, frozenset(),
                   _split_gains(matrix, all_rows, i, frozenset(), lf, penalty))
        for i in range(n)
    ] if n > 1 else []

    while leaves:
        illegal = _illegal_parents(forest, max_incoming)
        best: Optional[Tuple[float, int, int, int, int]] = None  # gain, i, j, order, slot
        for slot, leaf in enumerate(leaves):
            i = leaf.tree
            gains = np.where(illegal[i], -np.inf, leaf.gains)
            j = int(np.argmax(gains))  # first maximum: smallest gene
            gain = float(gains[j])
            if gain <= 0:
                continue
            key = (gain, i, j, leaf.node.order, slot)
            if best is None or gain > best[0] or (
                gain == best[0] and (i, j, leaf.node.order) < (best[1], best[2], best[3])
            ):
                best = key
        if best is None:
            break

        gain, i, j, _, slot = best
        leaf = leaves.pop(slot)
        tree = trees[i]
        bits = matrix[leaf.rows, j]
        target = matrix[:, i]
        path = leaf.path | {j}
        node = leaf.node
        node.split_gene = j
        for allele in (0, 1):
            rows = leaf.rows[bits == allele]
            m1 = int(target[rows].sum())
            child = TreeNode(len(rows) - m1, m1, order=tree.leaf_count)
            tree.leaf_count += 1
            if allele == 0:
                node.zero = child
            else:
                node.one = child
            if len(path) < n - 1:
                leaves.append(_LeafState(i, child, rows, path,
                                         _split_gains(matrix, rows, i, path, lf, penalty)))
        forest.parents[i].add(j)
        forest.history.append(SplitRecord(target=i, gene=j, gain=gain))

    return forest


def sample_forest(forest: DecisionForest, count: int, rng: RandomStream) -> List[Genome]:
    """Ancestral sampling in topological order of the dependency graph"""
    order = forest.topological_order()
    out = np.zeros((count, forest.string_size), dtype=np.uint8)
    for i in order:
        p = forest.trees[i].probabilities(out)
        out[:, i] = rng.random(count) < p
    return [Genome(row) for row in out]


def default_window(n: int, N: int) -> int:
    return max(1, min(n, N // 20))


class HBOA(Solver):
    name = "HBOA"

    def __init__(self, params: Optional[HboaParams] = None):
        self.params = params or HboaParams()
        self.window = self.params.rtr_window or 1
        self.forest: Optional[DecisionForest] = None

    def setup(self, ctx: RunContext) -> None:
        N, n = ctx.population_size, ctx.string_size
        self.window = self.params.rtr_window or default_window(n, N)
        if self.window > N:
            raise ConfigurationError(f"hboaRtrWindow ({self.window}) exceeds populationSize ({N})")
        if self.params.offspring_fraction == 0:
            logger.warning("hboaOffspringFraction is 0: the population will never change")
        self.forest = None

    def offspring_count(self, N: int) -> int:
        if self.params.offspring_fraction == 0:
            return 0
        return truncation_count(self.params.offspring_fraction, N)

    def next_generation(self, population: Population, ctx: RunContext) -> Population:
        return hboa_generation(population, self, ctx)

    def model_summary(self) -> Optional[str]:
        return self.forest.describe() if self.forest is not None else None

    def parameter_echo(self) -> Dict[str, Any]:
        return {
            "hboaOffspringFraction": self.params.offspring_fraction,
            "hboaRtrWindow": self.window,
            "hboaMaxIncoming": self.params.max_incoming,
            "hboaTournamentSize": self.params.tournament_size,
        }


def hboa_generation(p: Population, solver: HBOA, ctx: RunContext) -> Population:
    count = solver.offspring_count(len(p))
    if count == 0:
        return p
    rng = ctx.rng
    selected = tournament_select(p, solver.params.tournament_size, len(p), True, rng)
    solver.forest = build_forest(selected, solver.params.max_incoming)
    logger.debug(f"HBOA model: {solver.forest.describe()}")
    offspring = sample_forest(solver.forest, count, rng)
    ctx.fitness.evaluate_many(offspring, rng)
    for child in offspring:
        rtr_replace(p, child, solver.window, rng)
    return p
