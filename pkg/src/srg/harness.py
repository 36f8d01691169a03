"""Experiment drivers producing deterministic CSV tables.

Each experiment is a list of (trial, method) units. Trial ``t`` draws its
model from seed ``spec.seed + t``. Units that raise are recorded as
failure rows and the batch carries on. Rows are sorted by (trial, method
order, step) before writing, and one aggregate row per (method, step)
holds the arithmetic mean of the matching trial rows. The ``wall_time``
column is the only non-deterministic one.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import gbp
from .constructions import bethe, ep_graph, fully_factorized_ep_spec, grid_boxes, star_rg, tree_ep_spec
from .errors import SRGError
from .factor_graph import (
    FactorGraph,
    exact_inference,
    grid_model,
    random_bipartite_model,
    random_complete_model,
)
from .pursuit import PursuitConfig, region_pursuit
from .reductions import loop_graph_singular, nonsingular_general, reduce_to_ordinary, triangulate_and_split
from .region_graph import RegionGraph, total_counting_number

EXPERIMENTS = (
    "table1_complete",
    "table1_bipartite",
    "grid_boxes_sweep",
    "pursuit_fig6",
    "convergence_fig7",
    "reduction_equivalence",
)

COLUMNS = (
    "kind",
    "trial",
    "seed",
    "method",
    "step",
    "max_error",
    "mean_error",
    "discrepancy",
    "converged",
    "iterations",
    "free_energy",
    "total_counting",
    "triangles",
    "accepted",
    "verdict",
    "note",
    "wall_time",
)
NUMERIC = (
    "max_error",
    "mean_error",
    "discrepancy",
    "converged",
    "iterations",
    "free_energy",
    "total_counting",
    "triangles",
    "accepted",
)

_PARAMS = {"style", "strength", "triangulate", "methods"}
_GBP_FIELDS = {f.name for f in dataclasses.fields(gbp.GbpConfig)}
_PURSUIT_FIELDS = {f.name for f in dataclasses.fields(PursuitConfig)} - {"gbp", "mode", "constrain_nonsingular", "order", "seed"}

_DEFAULT_STYLE = {
    "table1_complete": "uniform_small",
    "table1_bipartite": "uniform_small",
    "grid_boxes_sweep": "minka_qi",
    "pursuit_fig6": "uniform_small",
    "convergence_fig7": "gaussian",
    "reduction_equivalence": "minka_qi",
}


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run.

    ``overrides`` may set GbpConfig fields (damping, max_iters, ...),
    ``max_triangles`` for the pursuit experiments, and the model options
    ``style``, ``strength`` and ``triangulate`` (grid sweep only).
    ``methods`` restricts a run to the listed method labels.
    """

    name: str
    trials: int = 20
    seed: int = 0
    output_path: str | None = None
    overrides: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; expected one of {EXPERIMENTS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        unknown = set(self.overrides) - _PARAMS - _GBP_FIELDS - _PURSUIT_FIELDS
        if unknown:
            raise ValueError(f"unknown overrides {sorted(unknown)}")

    @property
    def gbp_config(self) -> gbp.GbpConfig:
        return gbp.GbpConfig(**{k: v for k, v in self.overrides.items() if k in _GBP_FIELDS})

    def pursuit_config(self, **kw) -> PursuitConfig:
        opts = {k: v for k, v in self.overrides.items() if k in _PURSUIT_FIELDS}
        return PursuitConfig(gbp=self.gbp_config, **{**opts, **kw})

    def param(self, key: str, default=None):
        if key == "style":
            default = _DEFAULT_STYLE[self.name]
        return self.overrides.get(key, default)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list[dict]
    aggregates: list[dict]

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.rows if r["kind"] == "failure"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows + self.aggregates:
            w.writerow([_fmt(row.get(c)) for c in COLUMNS])
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.12g" % x
    return str(x)


# -- shared pieces -----------------------------------------------------------


def _errors(approx: dict, exact: dict) -> tuple[float, float]:
    per_var = [float(np.abs(approx[v] - exact[v]).max()) for v in exact]
    return max(per_var), float(np.mean(per_var))


def _gbp_row(rg: RegionGraph, fg: FactorGraph, exact: dict, cfg: gbp.GbpConfig) -> dict:
    res = gbp.run_gbp(rg, fg, cfg)
    marg = gbp.node_marginals(rg, res.beliefs, fg.var_ids)
    mx, mean = _errors(marg, exact)
    return {
        "max_error": mx,
        "mean_error": mean,
        "converged": res.converged,
        "iterations": res.iterations,
        "free_energy": res.free_energy,
        "total_counting": total_counting_number(rg),
    }


def _verdict(rg: RegionGraph) -> str:
    return nonsingular_general(rg).verdict


def _star_methods(fg: FactorGraph, widths) -> list[tuple[str, Callable[[], RegionGraph]]]:
    methods = [("bethe", lambda: bethe(fg))]
    for w in widths:
        # the extra outer region covers nodes 2..w+3 in one-based labels
        extra = [range(1, w + 3)]
        methods.append((f"star{w}", lambda w=w: star_rg(fg, w)))
        methods.append((f"star{w}+1", lambda w=w, extra=extra: star_rg(fg, w, extra_clusters=extra)))
    return methods


def _table1(spec: ExperimentSpec, trial: int, fg: FactorGraph, widths) -> list[dict]:
    exact = exact_inference(fg).marginals
    rows = []
    for name, build in _star_methods(fg, widths):
        rows += _unit(name, lambda build=build: _table1_unit(build(), fg, exact, spec), spec)
    return rows


def _table1_unit(rg, fg, exact, spec) -> dict:
    row = _gbp_row(rg, fg, exact, spec.gbp_config)
    row["verdict"] = _verdict(rg)
    return row


def _unit(method: str, fn: Callable[[], dict | list[dict]], spec: ExperimentSpec | None = None) -> list[dict]:
    """Run one (trial, method) unit; exceptions become a failure row."""
    if spec is not None and spec.param("methods") is not None and method not in spec.param("methods"):
        return []
    t0 = time.perf_counter()
    try:
        out = fn()
    except (SRGError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        return [{"kind": "failure", "method": method, "step": 0, "note": f"{type(e).__name__}: {e}", "wall_time": time.perf_counter() - t0}]
    out = out if isinstance(out, list) else [out]
    wall = time.perf_counter() - t0
    for k, row in enumerate(out):
        row.setdefault("step", k)
        row.update(kind="trial", method=method, wall_time=wall)
    return out


# -- experiments ---------------------------------------------------------------


def _run_table1_complete(spec: ExperimentSpec, trial: int, seed: int) -> list[dict]:
    fg = random_complete_model(6, seed, spec.param("style"), strength=spec.param("strength", 1.0))
    return _table1(spec, trial, fg, (1, 2, 3))


def _run_table1_bipartite(spec: ExperimentSpec, trial: int, seed: int) -> list[dict]:
    fg = random_bipartite_model(10, 10, seed, spec.param("style"), strength=spec.param("strength", 1.0))
    return _table1(spec, trial, fg, (1, 2, 3))


GRID_SIZES = ((4, 4), (4, 6))
BOX_SIZES = ((2, 2), (3, 3), (4, 3))


def _run_grid_boxes(spec: ExperimentSpec, trial: int, seed: int) -> list[dict]:
    rows = []
    tri = spec.param("triangulate", True)
    for k, (nr, nc) in enumerate(GRID_SIZES):
        fg = grid_model(nr, nc, seed + 1000 * k, spec.param("style"), strength=spec.param("strength", 0.5))
        exact = exact_inference(fg).marginals
        rows += _unit(f"{nr}x{nc}:bethe", lambda: _gbp_row(bethe(fg), fg, exact, spec.gbp_config), spec)
        for br, bc in BOX_SIZES:
            build = lambda br=br, bc=bc: grid_boxes(fg, nr, nc, br, bc, triangulate=tri and br * bc > 4)
            rows += _unit(f"{nr}x{nc}:box{br}x{bc}", lambda build=build: _gbp_row(build(), fg, exact, spec.gbp_config), spec)
    return rows


def _pursuit_rows(trace) -> list[dict]:
    rows, added = [], 0
    for s in trace.steps:
        added += int(s.accepted and s.triangle is not None)
        rows.append(
            {
                "step": s.index,
                "max_error": s.error,
                "converged": s.converged,
                "iterations": s.iterations,
                "free_energy": s.free_energy,
                "triangles": added,
                "accepted": s.accepted,
                "note": "" if s.triangle is None else " ".join(map(str, s.triangle)),
            }
        )
    final = trace.final_graph
    rows[-1]["total_counting"] = total_counting_number(final)
    rows[-1]["verdict"] = loop_graph_singular(final).verdict
    return rows


PURSUIT_METHODS = (("best", "best", False), ("worst", "worst", False), ("nonsingular", "best", True))


def _run_pursuit_fig6(spec: ExperimentSpec, trial: int, seed: int) -> list[dict]:
    fg = random_complete_model(7, seed, spec.param("style"), strength=spec.param("strength", 1.0))
    exact = exact_inference(fg).marginals
    rows = []
    for name, mode, constrain in PURSUIT_METHODS:
        cfg = spec.pursuit_config(mode=mode, constrain_nonsingular=constrain, seed=seed)
        rows += _unit(name, lambda cfg=cfg: _pursuit_rows(region_pursuit(fg, cfg, exact)), spec)
    return rows


def _run_convergence_fig7(spec: ExperimentSpec, trial: int, seed: int) -> list[dict]:
    n = 11 + seed % 5
    fg = random_complete_model(n, seed, spec.param("style"), edge_prob=0.75)
    exact = exact_inference(fg).marginals
    cap = spec.overrides.get("max_triangles", 30)
    control = {}

    def run_control():
        cfg = spec.pursuit_config(mode="best", constrain_nonsingular=False, max_triangles=cap, seed=seed)
        control["trace"] = region_pursuit(fg, cfg, exact)
        return _pursuit_rows(control["trace"])

    def run_constrained():
        # the control's picks, in order, skipping those that would make the graph singular
        order = tuple(control["trace"].accepted)
        cfg = spec.pursuit_config(mode="fixed_order", constrain_nonsingular=True, max_triangles=cap, order=order, seed=seed)
        return _pursuit_rows(region_pursuit(fg, cfg, exact))

    rows = _unit("pursuit", run_control)
    wanted = spec.param("methods")
    if wanted is not None and "pursuit" not in wanted:
        rows = []
    if "trace" in control:
        rows += _unit("nonsingular", run_constrained, spec)
    for r in rows:
        r.setdefault("note", "")
        r["note"] = (f"n={n} " + r["note"]).strip()
    return rows


K23_TREE = ((0, 3), (1, 3))
K23_GROUPS = (((0, 2), (1, 2)), ((0, 4), (1, 4)))


def k23_reductions(fg: FactorGraph) -> tuple[RegionGraph, RegionGraph]:
    """Two reductions of the tree-based EP-graph on K_{2,3} (left 0,1; right 2,3,4).

    The first stops once inner regions are complete and keeps the two loop
    regions; the second also splits and triangulates the outer regions.
    """
    ep = ep_graph(fg, tree_ep_spec(fg, K23_TREE, K23_GROUPS))
    loops = reduce_to_ordinary(ep, split_outer=False)
    split = reduce_to_ordinary(ep)
    for rid in sorted(split.outer_ids):
        if rid in split and split.is_outer(rid) and not split[rid].is_complete:
            split = triangulate_and_split(split, rid)
    return loops, split


def _pair_row(a: RegionGraph, b: RegionGraph, fg: FactorGraph, exact: dict, cfg: gbp.GbpConfig) -> dict:
    ra, rb = gbp.run_gbp(a, fg, cfg), gbp.run_gbp(b, fg, cfg)
    ma = gbp.node_marginals(a, ra.beliefs, fg.var_ids)
    mb = gbp.node_marginals(b, rb.beliefs, fg.var_ids)
    ea, eb = _errors(ma, exact), _errors(mb, exact)
    return {
        "max_error": max(ea[0], eb[0]),
        "mean_error": max(ea[1], eb[1]),
        "discrepancy": max(float(np.abs(ma[v] - mb[v]).max()) for v in fg.var_ids),
        "converged": ra.converged and rb.converged,
        "iterations": ra.iterations + rb.iterations,
        "free_energy": ra.free_energy - rb.free_energy,
    }


def _run_reduction_equivalence(spec: ExperimentSpec, trial: int, seed: int) -> list[dict]:
    style, strength = spec.param("style"), spec.param("strength", 1.0)
    rows = []
    k23 = random_bipartite_model(2, 3, seed, style, strength=strength)
    exact = exact_inference(k23).marginals
    rows += _unit("k23_loops_vs_split", lambda: _pair_row(*k23_reductions(k23), k23, exact, spec.gbp_config), spec)
    grid = grid_model(2, 4, seed, style, strength=strength)
    exact = exact_inference(grid).marginals

    def ep_vs_bethe():
        reduced = reduce_to_ordinary(ep_graph(grid, fully_factorized_ep_spec(grid)))
        return _pair_row(reduced, bethe(grid), grid, exact, spec.gbp_config)

    rows += _unit("ep_factorized_vs_bethe", ep_vs_bethe, spec)
    return rows


_RUNNERS = {
    "table1_complete": _run_table1_complete,
    "table1_bipartite": _run_table1_bipartite,
    "grid_boxes_sweep": _run_grid_boxes,
    "pursuit_fig6": _run_pursuit_fig6,
    "convergence_fig7": _run_convergence_fig7,
    "reduction_equivalence": _run_reduction_equivalence,
}


def _run_trial(spec: ExperimentSpec, trial: int) -> list[dict]:
    seed = spec.seed + trial
    try:
        rows = _RUNNERS[spec.name](spec, trial, seed)
    except (SRGError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        rows = [{"kind": "failure", "method": "", "step": 0, "note": f"{type(e).__name__}: {e}", "wall_time": 0.0}]
    for r in rows:
        r.update(trial=trial, seed=seed)
    return rows


def aggregate(rows: list[dict]) -> list[dict]:
    """Mean of every numeric column over the trial rows of each (method, step)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        if r["kind"] == "trial":
            groups.setdefault((r["method"], r["step"]), []).append(r)
    out = []
    for (method, step), rs in groups.items():
        agg = {"kind": "mean", "method": method, "step": step, "note": f"n={len(rs)}"}
        for c in NUMERIC:
            vals = [float(r[c]) for r in rs if r.get(c) is not None]
            if len(vals) == len(rs):
                agg[c] = math.fsum(vals) / len(vals)
        agg["wall_time"] = math.fsum(r["wall_time"] for r in rs) / len(rs)
        out.append(agg)
    return out


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    trials = range(spec.trials)
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            per_trial = list(pool.map(_run_trial, [spec] * spec.trials, trials))
    else:
        per_trial = [_run_trial(spec, t) for t in trials]
    method_rank: dict[str, int] = {}
    for rows in per_trial:
        for r in rows:
            method_rank.setdefault(r["method"], len(method_rank))
    rows = sorted((r for rs in per_trial for r in rs), key=lambda r: (r["trial"], method_rank[r["method"]], r["step"]))
    result = ExperimentResult(spec, rows, aggregate(rows))
    if spec.output_path:
        result.write(spec.output_path)
    return result


def read_csv(path_or_text: str | Path) -> list[dict]:
    """Rows of an experiment CSV as string dicts."""
    if isinstance(path_or_text, Path) or "\n" not in path_or_text:
        text = Path(path_or_text).read_text()
    else:
        text = path_or_text
    return list(csv.DictReader(io.StringIO(text)))


def strip_wall_time(text: str) -> str:
    """CSV text without the wall_time column, for determinism comparisons."""
    rows = list(csv.reader(io.StringIO(text)))
    k = rows[0].index("wall_time")
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows([r[:k] + r[k + 1 :] for r in rows])
    return buf.getvalue()
