"""Greedy region pursuit: add triangle loops on top of the Bethe loop-graph.

At each step every remaining candidate triangle is scored by the change in
free energy its addition would cause with all beliefs held fixed. The
triangle's belief is assembled from its edge and node beliefs as
q_ij q_jk q_ik / (q_i q_j q_k), renormalized.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gbp
from .constructions import LoopSpec, loop_graph
from .errors import NotConverged, NotPairwise
from .factor_graph import FactorGraph, exact_inference, fold_unary_factors
from .reductions import loop_edges, peel_loops
from .region_graph import RegionGraph

MODES = ("best", "worst", "fixed_order")


@dataclass(frozen=True)
class PursuitConfig:
    max_triangles: int = 35
    mode: str = "best"
    constrain_nonsingular: bool = True
    gbp: gbp.GbpConfig = field(default_factory=gbp.GbpConfig)
    seed: int = 0
    order: tuple[tuple[int, int, int], ...] | None = None  # fixed_order sequence; seeded shuffle if None

    def __post_init__(self):
        if self.max_triangles < 0:
            raise ValueError("max_triangles must be >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class PursuitStep:
    index: int
    triangle: tuple[int, int, int] | None
    accepted: bool
    error: float
    free_energy: float
    iterations: int
    converged: bool


@dataclass
class PursuitTrace:
    steps: list[PursuitStep] = field(default_factory=list)
    final_graph: RegionGraph | None = None
    loops: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def accepted(self) -> list[tuple[int, int, int]]:
        return [s.triangle for s in self.steps if s.accepted and s.triangle is not None]

    @property
    def rejected(self) -> list[tuple[int, int, int]]:
        return [s.triangle for s in self.steps if not s.accepted]


def candidate_triangles(fg: FactorGraph) -> list[tuple[int, int, int]]:
    """All variable triples whose three pairs each carry a pairwise factor, sorted."""
    if any(len(f.scope) > 2 for f in fg.factors):
        raise NotPairwise("triangle candidates need a pairwise model")
    edges = {frozenset(e) for e in fg.edges()}
    adj: dict[int, set] = {}
    for e in edges:
        i, j = sorted(e)
        adj.setdefault(i, set()).add(j)
        adj.setdefault(j, set()).add(i)
    out = []
    for i in sorted(adj):
        for j, k in itertools.combinations(sorted(v for v in adj[i] if v > i), 2):
            if k in adj[j]:
                out.append((i, j, k))
    return out


def _pair_region_index(rg: RegionGraph):
    edge_of, node_of = {}, {}
    for rid in rg.ids:
        r = rg[rid]
        if len(r.vars) == 2 and r.is_complete:
            edge_of[r.vars] = rid
        elif len(r.vars) == 1:
            node_of[next(iter(r.vars))] = rid
    return edge_of, node_of


def _kl_term(q: np.ndarray, log_f: np.ndarray | float = 0.0) -> float:
    """sum_x q log(q / f) with 0 log 0 = 0."""
    pos = q > 0
    log_f = np.broadcast_to(log_f, q.shape)
    return float(np.sum(q[pos] * (np.log(q[pos]) - log_f[pos])))


def triangle_belief(rg: RegionGraph, beliefs, triangle: Sequence[int]) -> np.ndarray:
    """Belief over the sorted triangle built from its edge and node beliefs."""
    i, j, k = sorted(triangle)
    edge_of, node_of = _pair_region_index(rg)
    q_ij = beliefs[edge_of[frozenset((i, j))]]
    q_jk = beliefs[edge_of[frozenset((j, k))]]
    q_ik = beliefs[edge_of[frozenset((i, k))]]
    q_i, q_j, q_k = (beliefs[node_of[v]] for v in (i, j, k))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (
            q_ij[:, :, None] * q_jk[None, :, :] * q_ik[:, None, :]
            / (q_i[:, None, None] * q_j[None, :, None] * q_k[None, None, :])
        )
    t = np.nan_to_num(t, nan=0.0, posinf=0.0)
    return t / t.sum()


def delta_f(rg: RegionGraph, fg: FactorGraph, beliefs, triangle: Sequence[int]) -> float:
    """Signed free-energy change from adding ``triangle`` to a loop-graph at frozen beliefs.

    ``fg`` must be the pairwise model the loop-graph was built from.
    """
    tri = tuple(sorted(triangle))
    edge_of, node_of = _pair_region_index(rg)
    q_t = triangle_belief(rg, beliefs, tri)
    log_f_t = np.zeros_like(q_t)
    total = 0.0
    for a, b in itertools.combinations(range(3), 2):
        e = frozenset((tri[a], tri[b]))
        rid = edge_of[e]
        q_e = beliefs[rid]
        if rg.is_outer(rid):
            log_f_e = gbp.log_factor_table(rg, fg, rid)
            # the edge loses its term; its factors move into the triangle
            total -= _kl_term(q_e, log_f_e)
            shape = [1, 1, 1]
            shape[a], shape[b] = q_e.shape
            log_f_t = log_f_t + log_f_e.reshape(shape)
        else:
            total -= _kl_term(q_e)
    total += _kl_term(q_t, log_f_t)
    for v in tri:
        total += _kl_term(beliefs[node_of[v]])
    return total


def delta_f_score(rg: RegionGraph, fg: FactorGraph, beliefs, triangle: Sequence[int], *, strict: bool = True) -> float:
    """|delta_f|. ``beliefs`` may be a GbpResult; with ``strict`` an unconverged one raises NotConverged."""
    if isinstance(beliefs, gbp.GbpResult):
        if strict and not beliefs.converged:
            raise NotConverged("scores need beliefs from a converged run")
        beliefs = beliefs.beliefs
    return abs(delta_f(rg, fg, beliefs, triangle))


def build_loop_graph(fg: FactorGraph, triangles: Sequence[Sequence[int]]) -> RegionGraph:
    return loop_graph(fg, LoopSpec(tuple(tuple(t) for t in triangles)))


def is_singular_with(triangles: Sequence[Sequence[int]]) -> bool:
    ok, _ = peel_loops([loop_edges(t) for t in triangles])
    return not ok


def region_pursuit(fg: FactorGraph, cfg: PursuitConfig | None = None, exact_marginals=None) -> PursuitTrace:
    """Greedy triangle pursuit; step 0 records the plain Bethe result.

    Single-variable factors are first multiplied into pairwise factors so
    every factor lives on an edge.
    """
    cfg = cfg or PursuitConfig()
    model = fold_unary_factors(fg)
    if exact_marginals is None:
        exact_marginals = exact_inference(fg).marginals
    cands = candidate_triangles(model)
    if cfg.mode == "fixed_order":
        if cfg.order is not None:
            cands = [tuple(sorted(t)) for t in cfg.order]
        else:
            rng = np.random.default_rng(cfg.seed)
            cands = [cands[k] for k in rng.permutation(len(cands))]
    trace = PursuitTrace()
    loops: list[tuple[int, int, int]] = []

    def solve():
        rg = build_loop_graph(model, loops)
        res = gbp.run_gbp(rg, model, cfg.gbp)
        err = gbp.max_marginal_error(gbp.node_marginals(rg, res.beliefs, model.var_ids), exact_marginals)
        return rg, res, err

    rg, res, err = solve()
    trace.steps.append(PursuitStep(0, None, True, err, res.free_energy, res.iterations, res.converged))
    while len(loops) < cfg.max_triangles and cands:
        if cfg.mode == "fixed_order":
            pick = cands[0]
        else:
            scores = [delta_f_score(rg, model, res.beliefs, t) for t in cands]
            key = max if cfg.mode == "best" else min
            best = key(scores)
            pick = cands[scores.index(best)]
        cands.remove(pick)
        if cfg.constrain_nonsingular and is_singular_with(loops + [pick]):
            trace.steps.append(PursuitStep(len(trace.steps), pick, False, err, res.free_energy, 0, res.converged))
            continue
        loops.append(pick)
        rg, res, err = solve()
        trace.steps.append(PursuitStep(len(trace.steps), pick, True, err, res.free_energy, res.iterations, res.converged))
    trace.final_graph = rg
    trace.loops = list(loops)
    return trace
