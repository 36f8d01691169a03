"""Discrete factor graphs, random test models and the brute-force oracle.

Factor tables are dense numpy arrays whose axes follow the factor scope,
so the flattened table is in row-major order over the scope (the first
scope variable varies slowest).

Pairwise generators use the spin convention: state 0 is s=-1 and state 1
is s=+1. An edge with weight w gets the table exp(w*s_i*s_j) and a node
with bias b gets exp(b*s_i).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidModel, InvalidSize, StateSpaceTooLarge, ZeroPartition

DEFAULT_STATE_LIMIT = 2**24
STYLES = ("minka_qi", "uniform_small", "gaussian")
_SPIN = np.array([-1.0, 1.0])


@dataclass(frozen=True)
class VariableDecl:
    id: int
    cardinality: int

    def __post_init__(self):
        if self.cardinality < 1:
            raise InvalidModel(f"variable {self.id}: cardinality must be >= 1")


@dataclass(frozen=True, eq=False)
class Factor:
    id: int
    scope: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self):
        scope = tuple(int(v) for v in self.scope)
        if len(set(scope)) != len(scope):
            raise InvalidModel(f"factor {self.id}: repeated variable in scope {scope}")
        table = np.array(self.table, dtype=float)
        table.setflags(write=False)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "table", table)
        if table.ndim != len(scope):
            raise InvalidModel(f"factor {self.id}: table rank {table.ndim} != scope size {len(scope)}")
        if np.any(table < 0) or not np.all(np.isfinite(table)):
            raise InvalidModel(f"factor {self.id}: entries must be finite and nonnegative")
        if not np.any(table > 0):
            raise InvalidModel(f"factor {self.id}: at least one entry must be positive")

    def __eq__(self, other):
        if not isinstance(other, Factor):
            return NotImplemented
        return (
            self.id == other.id
            and self.scope == other.scope
            and self.table.shape == other.table.shape
            and bool(np.array_equal(self.table, other.table))
        )

    def __hash__(self):
        return hash((self.id, self.scope))


@dataclass(frozen=True)
class ExactResult:
    marginals: dict[int, np.ndarray]
    log_partition: float


@dataclass(frozen=True)
class FactorGraph:
    """An immutable discrete model p(x) proportional to a product of factors."""

    variables: tuple[VariableDecl, ...]
    factors: tuple[Factor, ...]
    _card: dict[int, int] = field(init=False, repr=False, compare=False)
    _factor_by_id: dict[int, Factor] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        variables = tuple(self.variables)
        factors = tuple(self.factors)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "factors", factors)
        card = {}
        for v in variables:
            if v.id in card:
                raise InvalidModel(f"duplicate variable id {v.id}")
            card[v.id] = v.cardinality
        by_id = {}
        for f in factors:
            if f.id in by_id:
                raise InvalidModel(f"duplicate factor id {f.id}")
            by_id[f.id] = f
            for v, k in zip(f.scope, f.table.shape):
                if v not in card:
                    raise InvalidModel(f"factor {f.id} references undeclared variable {v}")
                if card[v] != k:
                    raise InvalidModel(f"factor {f.id}: axis for variable {v} has size {k}, expected {card[v]}")
        object.__setattr__(self, "_card", card)
        object.__setattr__(self, "_factor_by_id", by_id)
        if not variables:
            raise InvalidModel("model has no variables")
        if not _connected(card, factors):
            raise InvalidModel("the variable-factor graph is not connected")

    @property
    def var_ids(self) -> list[int]:
        return [v.id for v in self.variables]

    def cardinality(self, var: int) -> int:
        return self._card[var]

    def factor(self, factor_id: int) -> Factor:
        return self._factor_by_id[factor_id]

    @property
    def factor_scopes(self) -> dict[int, tuple[int, ...]]:
        return {f.id: f.scope for f in self.factors}

    @property
    def is_pairwise(self) -> bool:
        return all(len(f.scope) <= 2 for f in self.factors)

    def edges(self) -> list[tuple[int, int]]:
        """Sorted variable pairs that share a pairwise factor."""
        out = {tuple(sorted(f.scope)) for f in self.factors if len(f.scope) == 2}
        return sorted(out)

    def log_state_count(self) -> float:
        return sum(math.log(v.cardinality) for v in self.variables)

    def scale_factor(self, factor_id: int, constant: float) -> "FactorGraph":
        """Copy of the model with one factor table multiplied by ``constant``."""
        if constant <= 0:
            raise ValueError("constant must be positive")
        factors = [
            Factor(f.id, f.scope, f.table * constant) if f.id == factor_id else f for f in self.factors
        ]
        return FactorGraph(self.variables, factors)

    def with_uniform_factors(self) -> "FactorGraph":
        return FactorGraph(self.variables, [Factor(f.id, f.scope, np.ones_like(f.table)) for f in self.factors])


def _connected(card: dict[int, int], factors: Sequence[Factor]) -> bool:
    parent = {v: v for v in card}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for f in factors:
        if not f.scope:
            continue
        root = find(f.scope[0])
        for v in f.scope[1:]:
            parent[find(v)] = root
    return len({find(v) for v in card}) == 1


def _log_table(table: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(table)


def exact_inference(fg: FactorGraph, state_limit: int = DEFAULT_STATE_LIMIT) -> ExactResult:
    """Marginals and log Z by summing the full joint table."""
    ids = fg.var_ids
    cards = [fg.cardinality(v) for v in ids]
    total = math.prod(cards)
    if total > state_limit:
        raise StateSpaceTooLarge(f"{total} joint states exceed the limit of {state_limit}")
    axis = {v: i for i, v in enumerate(ids)}
    logp = np.zeros(cards)
    for f in fg.factors:
        logp = logp + _broadcast(_log_table(f.table), f.scope, axis, len(ids))
    top = logp.max()
    if not np.isfinite(top):
        raise ZeroPartition("every joint configuration has zero weight")
    p = np.exp(logp - top)
    z = p.sum()
    p /= z
    marginals = {}
    for v, i in axis.items():
        others = tuple(j for j in range(len(ids)) if j != i)
        m = p.sum(axis=others) if others else p.copy()
        marginals[v] = m / m.sum()
    return ExactResult(marginals=marginals, log_partition=float(top + np.log(z)))


def _broadcast(table: np.ndarray, scope: Sequence[int], axis: dict[int, int], ndim: int) -> np.ndarray:
    if not scope:
        return table
    order = np.argsort([axis[v] for v in scope])
    moved = np.transpose(table, order)
    shape = [1] * ndim
    for v in scope:
        shape[axis[v]] = table.shape[list(scope).index(v)]
    return moved.reshape(shape)


# -- generators -------------------------------------------------------------

def ising_edge_table(weight: float) -> np.ndarray:
    return np.exp(weight * np.outer(_SPIN, _SPIN))


def ising_bias_table(bias: float) -> np.ndarray:
    return np.exp(bias * _SPIN)


def pairwise_binary_model(
    n_vars: int,
    edges: Sequence[tuple[int, int]],
    weights: Sequence[float],
    biases: Sequence[float] | None = None,
) -> FactorGraph:
    """Binary spin model; factor ids are edges first, then one bias factor per node."""
    variables = [VariableDecl(i, 2) for i in range(n_vars)]
    factors = [Factor(k, (int(i), int(j)), ising_edge_table(w)) for k, ((i, j), w) in enumerate(zip(edges, weights))]
    if biases is not None:
        base = len(factors)
        factors += [Factor(base + i, (i,), ising_bias_table(b)) for i, b in enumerate(biases)]
    return FactorGraph(variables, factors)


def _draw(style: str, rng: np.random.Generator, n_edges: int, n_nodes: int, scale: float, strength: float):
    if style == "uniform_small":
        return rng.uniform(0.0, 0.1, n_edges), rng.uniform(0.0, 0.3, n_nodes)
    if style == "gaussian":
        return rng.normal(0.0, scale, n_edges), rng.normal(0.0, 1.0, n_nodes)
    if style == "minka_qi":
        return strength * rng.normal(0.0, 1.0, n_edges), strength * rng.normal(0.0, 1.0, n_nodes)
    raise ValueError(f"unknown potential style {style!r}; expected one of {STYLES}")


def _edges_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, j in edges:
        parent[find(i)] = find(j)
    return len({find(v) for v in range(n)}) == 1


def random_complete_model(
    n: int,
    seed: int,
    style: str = "uniform_small",
    *,
    edge_prob: float = 0.75,
    strength: float = 1.0,
    biases: bool = True,
) -> FactorGraph:
    """Random binary pairwise model on the complete graph K_n.

    With ``style="gaussian"`` each edge is kept with probability
    ``edge_prob``; the edge mask is redrawn until the graph is connected.
    """
    if n < 2:
        raise InvalidSize("need at least 2 nodes")
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    if style == "gaussian":
        while True:
            keep = rng.random(len(pairs)) < edge_prob
            edges = [e for e, k in zip(pairs, keep) if k]
            if _edges_connected(n, edges):
                break
    else:
        edges = pairs
    w, b = _draw(style, rng, len(edges), n, 1.0 / math.sqrt(n - 1), strength)
    return pairwise_binary_model(n, edges, w, b if biases else None)


def random_bipartite_model(
    n_left: int,
    n_right: int,
    seed: int,
    style: str = "uniform_small",
    *,
    strength: float = 1.0,
    biases: bool = True,
) -> FactorGraph:
    """Complete bipartite K_{n_left,n_right}; left nodes are 0..n_left-1."""
    if n_left < 1 or n_right < 1:
        raise InvalidSize("both sides need at least one node")
    n = n_left + n_right
    rng = np.random.default_rng(seed)
    edges = [(i, n_left + j) for i in range(n_left) for j in range(n_right)]
    w, b = _draw(style, rng, len(edges), n, 1.0 / math.sqrt(max(n - 1, 1)), strength)
    return pairwise_binary_model(n, edges, w, b if biases else None)


def grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    """Edges of a rows x cols grid with variable id r*cols + c."""
    out = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                out.append((v, v + 1))
            if r + 1 < rows:
                out.append((v, v + cols))
    return out


def grid_model(
    rows: int,
    cols: int,
    seed: int,
    style: str = "minka_qi",
    *,
    strength: float = 1.0,
    biases: bool = True,
) -> FactorGraph:
    if rows < 1 or cols < 1:
        raise InvalidSize("grid dimensions must be positive")
    n = rows * cols
    rng = np.random.default_rng(seed)
    edges = grid_edges(rows, cols)
    w, b = _draw(style, rng, len(edges), n, 1.0 / math.sqrt(max(n - 1, 1)), strength)
    return pairwise_binary_model(n, edges, w, b if biases else None)


def fold_unary_factors(fg: FactorGraph) -> FactorGraph:
    """Multiply each single-variable factor into the lowest-id pairwise factor on that variable.

    Variables without any pairwise factor keep their unary factors.
    """
    pair_of: dict[int, int] = {}
    for f in sorted(fg.factors, key=lambda f: f.id):
        if len(f.scope) == 2:
            for v in f.scope:
                pair_of.setdefault(v, f.id)
    tables = {f.id: np.array(f.table) for f in fg.factors}
    dropped = set()
    for f in fg.factors:
        if len(f.scope) == 1 and f.scope[0] in pair_of:
            host = fg.factor(pair_of[f.scope[0]])
            shape = [1, 1]
            shape[host.scope.index(f.scope[0])] = f.table.shape[0]
            tables[host.id] = tables[host.id] * f.table.reshape(shape)
            dropped.add(f.id)
    factors = [Factor(f.id, f.scope, tables[f.id]) for f in fg.factors if f.id not in dropped]
    return FactorGraph(fg.variables, factors)
