"""Parent-to-child generalized belief propagation on ordinary region graphs.

Messages live on the links P -> C of the region graph as log tables over
the child's variables. The belief of a region R is its factor product times
every message entering the set E(R) of R and its descendants from outside
that set. A message update makes the parent's marginal on the child's
variables equal to the child's belief. At a fixed point the beliefs are
stationary points of the Kikuchi free energy with the graph's counting
numbers.

Region belief tables have one axis per region variable, in increasing
variable-id order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRegionGraph, NonCompleteInnerRegion, ShapeMismatch, UncoveredVariable
from .factor_graph import FactorGraph
from .region_graph import RegionGraph

LOG_FLOOR = -690.0
SCHEDULES = ("sequential_topological", "random_permutation")
_FLOOR = float(np.exp(LOG_FLOOR))
_DAMPING_LEVELS = (0.5, 0.7, 0.9)
_WINDOW = 20


@dataclass(frozen=True)
class GbpConfig:
    damping: float = 0.5
    max_iters: int = 2000
    tolerance: float = 1e-10
    schedule: str = "sequential_topological"
    seed: int = 0
    init: str = "zero"  # or "random": N(0, 1) log-message entries
    escalate: bool = True

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        if self.init not in ("zero", "random"):
            raise ValueError("init must be 'zero' or 'random'")


@dataclass
class GbpResult:
    beliefs: dict[int, np.ndarray]
    converged: bool
    iterations: int
    free_energy: float
    max_constraint_residual: float
    damping: float
    deltas: list[float] = field(default_factory=list, repr=False)


def _shape(rg: RegionGraph, fg: FactorGraph, rid: int) -> tuple[int, ...]:
    return tuple(fg.cardinality(v) for v in sorted(rg[rid].vars))


def _sub_index(vars_: tuple, shape: tuple, sub: tuple) -> np.ndarray:
    """For every flat state of ``vars_``, the flat state of its restriction to ``sub``."""
    if not sub:
        return np.zeros(int(np.prod(shape, dtype=np.int64)), dtype=np.intp)
    pos = [vars_.index(v) for v in sub]
    states = np.indices(shape).reshape(len(shape), -1)
    return np.ravel_multi_index(tuple(states[pos]), tuple(shape[p] for p in pos)).astype(np.intp)


def log_factor_table(rg: RegionGraph, fg: FactorGraph, rid: int) -> np.ndarray:
    """Log of the product of the region's factors over its variables, floored."""
    vars_ = tuple(sorted(rg[rid].vars))
    shape = _shape(rg, fg, rid)
    out = np.zeros(shape)
    for f_id in sorted(rg[rid].factor_ids):
        f = fg.factor(f_id)
        with np.errstate(divide="ignore"):
            lt = np.maximum(np.log(f.table), LOG_FLOOR)
        order = sorted(range(len(f.scope)), key=lambda k: f.scope[k])
        lt = np.transpose(lt, order)
        view = [1] * len(vars_)
        for k in order:
            view[vars_.index(f.scope[k])] = f.table.shape[k]
        out = out + lt.reshape(view)
    return out


def _log_normalize(x: np.ndarray) -> np.ndarray:
    m = x.max()
    return x - (m + np.log(np.exp(x - m).sum()))


class _Engine:
    """Flat message vector plus the gather indices needed for beliefs and marginals."""

    def __init__(self, rg: RegionGraph, fg: FactorGraph):
        for rid in rg.inner_ids:
            if not rg[rid].is_complete:
                raise NonCompleteInnerRegion(f"inner region {rid} is not complete; reduce the graph first")
        missing = set(fg.var_ids) - set(rg.variables)
        if missing:
            raise UncoveredVariable(f"variables {sorted(missing)} are in no region")
        for f in fg.factors:
            if f.id not in rg.factor_scopes or tuple(rg.factor_scopes[f.id]) != f.scope:
                raise InvalidRegionGraph(f"factor {f.id} does not match the region graph's factor scopes")
        self.rg, self.fg = rg, fg
        topo = rg.topological_order()
        rank = {r: i for i, r in enumerate(topo)}
        self.edges = sorted(rg.edges, key=lambda e: (rank[e[0]], rank[e[1]]))
        self.vars = {r: tuple(sorted(rg[r].vars)) for r in rg.ids}
        self.shape = {r: _shape(rg, fg, r) for r in rg.ids}
        self.size = {r: int(np.prod(self.shape[r], dtype=np.int64)) for r in rg.ids}
        self.offset = {}
        pos = 0
        for e in self.edges:
            self.offset[e] = pos
            pos += self.size[e[1]]
        self.n_entries = pos
        self.log_f = {r: log_factor_table(rg, fg, r).ravel() for r in rg.ids}
        # links inside each region's descendant set, in update order
        self.below = {
            r: [e for e in self.edges if e[0] in desc]
            for r in rg.ids
            for desc in [rg.descendants(r) | {r}]
        }
        self._sub: dict[tuple, np.ndarray] = {}
        self.gather = {}
        for r in rg.ids:
            inside = {r} | rg.descendants(r)
            rows = [
                self.offset[(p, c)] + self.sub_index(r, c)
                for p, c in self.edges
                if c in inside and p not in inside
            ]
            self.gather[r] = np.array(rows, dtype=np.intp).reshape(len(rows), self.size[r])

    def sub_index(self, r: int, c: int) -> np.ndarray:
        key = (r, c)
        if key not in self._sub:
            self._sub[key] = _sub_index(self.vars[r], self.shape[r], self.vars[c])
        return self._sub[key]

    def log_belief(self, msgs: np.ndarray, r: int) -> np.ndarray:
        return _log_normalize(self.raw_log_belief(msgs, r))

    def raw_log_belief(self, msgs: np.ndarray, r: int) -> np.ndarray:
        """Unnormalized log belief."""
        g = self.gather[r]
        return self.log_f[r] + msgs[g].sum(axis=0) if len(g) else self.log_f[r]

    def log_marginal(self, log_b: np.ndarray, r: int, c: int) -> np.ndarray:
        m = log_b.max()
        s = np.bincount(self.sub_index(r, c), weights=np.exp(log_b - m), minlength=self.size[c])
        # floor relative to the largest entry; log_b need not be normalized
        return np.log(np.maximum(s, _FLOOR)) + m

    def beliefs(self, msgs: np.ndarray) -> dict[int, np.ndarray]:
        return {r: np.exp(self.log_belief(msgs, r)).reshape(self.shape[r]) for r in self.rg.ids}


def _update(eng: _Engine, msgs: np.ndarray, p: int, c: int, damping: float) -> None:
    sl = slice(eng.offset[(p, c)], eng.offset[(p, c)] + eng.size[c])
    old = msgs[sl]
    target = eng.log_marginal(eng.raw_log_belief(msgs, p), p, c)
    # normalizing constants only shift the result, so one final normalization suffices
    new = old + (1.0 - damping) * (target - eng.raw_log_belief(msgs, c))
    msgs[sl] = np.maximum(_log_normalize(new), LOG_FLOOR)


def _sweep(eng: _Engine, msgs: np.ndarray, order, damping: float) -> np.ndarray:
    """One pass of damped updates over ``order``; returns new messages.

    After each update the child relays: every link below it is refreshed
    undamped, parents first. Without the relay, messages further down go
    stale within a pass and sequential sweeps can blow up on graphs with
    many stacked layers.
    """
    msgs = msgs.copy()
    for p, c in order:
        _update(eng, msgs, p, c, damping)
        for u, v in eng.below[c]:
            _update(eng, msgs, u, v, 0.0)
    return msgs


def run_gbp(rg: RegionGraph, fg: FactorGraph, cfg: GbpConfig | None = None) -> GbpResult:
    """Iterate damped parent-to-child sweeps until messages and constraints settle.

    If the largest message change stops shrinking, damping escalates
    through 0.5, 0.7 and 0.9. Non-convergence is reported through
    ``converged`` rather than raised.
    """
    cfg = cfg or GbpConfig()
    eng = _Engine(rg, fg)
    rng = np.random.default_rng(cfg.seed)
    msgs = np.zeros(eng.n_entries)
    if cfg.init == "random":
        msgs = rng.normal(0.0, 1.0, eng.n_entries)
    for e in eng.edges:
        sl = slice(eng.offset[e], eng.offset[e] + eng.size[e[1]])
        msgs[sl] = _log_normalize(msgs[sl])
    order = eng.edges
    if cfg.schedule == "random_permutation":
        order = [eng.edges[k] for k in rng.permutation(len(eng.edges))]
    damping = cfg.damping
    deltas: list[float] = []
    converged = False
    residual = np.inf
    while len(deltas) < cfg.max_iters:
        new = _sweep(eng, msgs, order, damping)
        delta = float(np.abs(new - msgs).max(initial=0.0))
        msgs = new
        deltas.append(delta)
        k = len(deltas)
        if delta < cfg.tolerance:
            residual = constraint_residual(rg, eng.beliefs(msgs))
            if residual <= 10 * cfg.tolerance:
                converged = True
                break
        if cfg.escalate and k % _WINDOW == 0 and k >= 2 * _WINDOW:
            if max(deltas[-_WINDOW:]) >= max(deltas[-2 * _WINDOW : -_WINDOW]):
                damping = next((d for d in _DAMPING_LEVELS if d > damping), damping)
    beliefs = eng.beliefs(msgs)
    if not converged:
        residual = constraint_residual(rg, beliefs)
    return GbpResult(
        beliefs=beliefs,
        converged=converged,
        iterations=len(deltas),
        free_energy=free_energy(rg, fg, beliefs),
        max_constraint_residual=float(residual),
        damping=damping,
        deltas=deltas,
    )


def _marginal_on(q: np.ndarray, vars_: tuple, keep) -> np.ndarray:
    keep = set(keep)
    axes = tuple(i for i, v in enumerate(vars_) if v not in keep)
    return q.sum(axis=axes) if axes else q


def constraint_residual(rg: RegionGraph, beliefs: dict[int, np.ndarray]) -> float:
    """Largest disagreement between a parent's and a child's marginal on any child clique."""
    worst = 0.0
    for p, c in rg.edges:
        pv, cv = tuple(sorted(rg[p].vars)), tuple(sorted(rg[c].vars))
        for clique in rg[c].cliques:
            a = _marginal_on(beliefs[p], pv, clique)
            b = _marginal_on(beliefs[c], cv, clique)
            if a.shape != b.shape:
                raise ShapeMismatch(f"beliefs of {p} and {c} disagree in shape on clique {sorted(clique)}")
            worst = max(worst, float(np.abs(a - b).max()))
    return worst


def free_energy(rg: RegionGraph, fg: FactorGraph, beliefs: dict[int, np.ndarray]) -> float:
    """Sum over regions of c_R * sum_x q_R log(q_R / f_R), with 0 log 0 = 0 and f floored at 1e-300."""
    c = rg.counting_numbers
    total = 0.0
    for rid in rg.ids:
        q = np.asarray(beliefs[rid], dtype=float)
        shape = _shape(rg, fg, rid)
        if q.shape != shape:
            raise ShapeMismatch(f"belief of region {rid} has shape {q.shape}, expected {shape}")
        if c[rid] == 0:
            continue
        log_f = log_factor_table(rg, fg, rid)
        pos = q > 0
        term = float(np.sum(q[pos] * (np.log(q[pos]) - log_f[pos])))
        total += c[rid] * term
    return total


def _depths(rg: RegionGraph) -> dict[int, int]:
    depth: dict[int, int] = {}
    for r in rg.topological_order():
        depth[r] = 1 + max((depth[p] for p in rg.parents(r)), default=-1)
    return depth


def marginal_region(rg: RegionGraph, var: int, depth: dict[int, int] | None = None) -> int:
    """Region used for a variable's marginal: deepest, then smallest, then lowest id."""
    depth = depth or _depths(rg)
    cands = rg.regions_containing(var)
    if not cands:
        raise UncoveredVariable(f"variable {var} is in no region")
    return min(cands, key=lambda r: (-depth[r], len(rg[r].vars), r))


def node_marginals(rg: RegionGraph, beliefs: dict[int, np.ndarray], variables=None) -> dict[int, np.ndarray]:
    vars_ = sorted(variables) if variables is not None else rg.variables
    depth = _depths(rg)
    out = {}
    for v in vars_:
        r = marginal_region(rg, v, depth)
        m = _marginal_on(beliefs[r], tuple(sorted(rg[r].vars)), {v})
        out[v] = m / m.sum()
    return out


def max_marginal_error(approx: dict[int, np.ndarray], exact: dict[int, np.ndarray]) -> float:
    return max(float(np.abs(approx[v] - exact[v]).max()) for v in exact)
