"""Command-line entry point: ``srg <subcommand> ...``.

Exit status is 0 on success, 1 on runtime errors and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import constructions, gbp, harness, io, reductions
from .errors import NotALoopGraph, SRGError
from .factor_graph import (
    DEFAULT_STATE_LIMIT,
    STYLES,
    exact_inference,
    grid_model,
    random_bipartite_model,
    random_complete_model,
)
from .pursuit import MODES, PursuitConfig, region_pursuit
from .region_graph import total_counting_number, validate

def _pairs(text: str) -> list[tuple[int, int]]:
    """'0-3,1-3' -> [(0, 3), (1, 3)]"""
    out = []
    for item in filter(None, text.split(",")):
        a, b = item.split("-")
        out.append((int(a), int(b)))
    return out

def _loops(text: str) -> list[tuple[int, ...]]:
    """'0 1 2;1 2 3' -> [(0, 1, 2), (1, 2, 3)]"""
    return [tuple(int(v) for v in part.split()) for part in text.split(";") if part.strip()]

def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)

# -- subcommands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.kind == "complete":
        fg = random_complete_model(args.n, args.seed, args.style, strength=args.strength, edge_prob=args.edge_prob)
    elif args.kind == "bipartite":
        fg = random_bipartite_model(args.n, args.m or args.n, args.seed, args.style, strength=args.strength)
    else:
        fg = grid_model(args.n, args.m or args.n, args.seed, args.style, strength=args.strength)
    _emit(io.dumps(io.model_to_dict(fg)), args.out)
    return 0

def cmd_build(args) -> int:
    fg = io.read_model(args.model)
    kind = args.kind
    if kind == "bethe":
        rg = constructions.bethe(fg)
    elif kind == "squares":
        rg = constructions.grid_boxes(fg, args.rows, args.cols, args.box_rows, args.box_cols, triangulate=args.triangulate)
    elif kind == "star":
        order = [int(v) for v in args.order.split(",")] if args.order else None
        rg = constructions.star_rg(fg, args.width, order, extra_clusters=_loops(args.extra or ""))
    elif kind == "loops":
        rg = constructions.loop_graph(fg, constructions.LoopSpec(tuple(_loops(args.loops or ""))))
    elif kind == "faces":
        rg = constructions.loop_graph(fg, constructions.grid_faces(args.rows, args.cols))
    else:
        if args.tree_edges:
            groups = [_pairs(g) for g in (args.groups or "").split(";") if g.strip()]
            spec = constructions.tree_ep_spec(fg, _pairs(args.tree_edges), groups)
        else:
            spec = constructions.fully_factorized_ep_spec(fg)
        rg = constructions.ep_graph(fg, spec)
    io.write_region_graph(rg, args.out)
    print(f"wrote {len(rg.ids)} regions, total counting number {total_counting_number(rg)}", file=sys.stderr)
    return 0

def cmd_validate(args) -> int:
    rg = io.read_region_graph(args.rg)
    variables = io.read_model(args.model).var_ids if args.model else None
    report = validate(rg, variables)
    if report.overall:
        print("valid")
        return 0
    for line in report.failures():
        print(line)
    return 1

def cmd_reduce(args) -> int:
    rg = io.read_region_graph(args.rg)
    trace: list = []
    out = reductions.reduce_to_ordinary(rg, split_outer=not args.no_split_outer, trace=trace)
    if args.complete_outer:
        out = reductions.complete_outer_regions(out, trace)
    io.write_region_graph(out, args.out)
    lines = [str(step) for step in trace]
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.trace:
        Path(args.trace).write_text(text)
    else:
        sys.stdout.write(text)
    return 0

def cmd_diagnose(args) -> int:
    rg = io.read_region_graph(args.rg)
    try:
        verdict = reductions.loop_graph_singular(rg)
        method = "loop peeling"
    except NotALoopGraph:
        verdict = reductions.nonsingular_general(rg)
        method = "reduction"
    print(f"verdict: {verdict.verdict} ({method})")
    print(f"total counting number: {total_counting_number(rg)}")
    w = verdict.witness
    if isinstance(w, list):
        print("witness loops: " + " ".join(map(str, w)))
    elif w is not None:
        print("stuck at:")
        for rid in sorted(w.ids):
            print(f"  {rid}: {w[rid].label()} children={sorted(w.children(rid))}")
    return 0

def _gbp_config(args) -> gbp.GbpConfig:
    return gbp.GbpConfig(
        damping=args.damping,
        max_iters=args.max_iters,
        tolerance=args.tol,
        schedule=args.schedule,
        seed=args.seed,
    )

def cmd_infer(args) -> int:
    fg = io.read_model(args.model)
    rg = io.read_region_graph(args.rg)
    res = gbp.run_gbp(rg, fg, _gbp_config(args))
    marg = gbp.node_marginals(rg, res.beliefs, fg.var_ids)
    doc = {
        "converged": res.converged,
        "iterations": res.iterations,
        "free_energy": res.free_energy,
        "max_constraint_residual": res.max_constraint_residual,
        "damping": res.damping,
        "marginals": {str(v): [float(x) for x in p] for v, p in marg.items()},
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["variable", "state", "probability"])
            for v, p in marg.items():
                for k, x in enumerate(p):
                    w.writerow([v, k, "%.12g" % x])
    if not res.converged:
        print(f"warning: no convergence after {res.iterations} sweeps", file=sys.stderr)
    return 0

def cmd_exact(args) -> int:
    fg = io.read_model(args.model)
    res = exact_inference(fg, args.state_limit)
    doc = {
        "log_partition": res.log_partition,
        "marginals": {str(v): [float(x) for x in p] for v, p in res.marginals.items()},
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return 0

PURSUE_COLUMNS = ("trial", "seed", "step", "triangle", "accepted", "error", "free_energy", "iterations", "converged")

def cmd_pursue(args) -> int:
    cfg_gbp = gbp.GbpConfig(damping=args.damping, max_iters=args.max_iters)
    rows = []
    for t in range(args.trials):
        seed = args.seed + t
        fg = io.read_model(args.model) if args.model else random_complete_model(args.n, seed, args.style)
        order = tuple(_loops(args.order)) if args.order else None
        cfg = PursuitConfig(
            max_triangles=args.max_triangles,
            mode=args.mode,
            constrain_nonsingular=args.constrain,
            gbp=cfg_gbp,
            seed=seed,
            order=order,
        )
        trace = region_pursuit(fg, cfg)
        for s in trace.steps:
            tri = "" if s.triangle is None else " ".join(map(str, s.triangle))
            rows.append([t, seed, s.index, tri, int(s.accepted), "%.12g" % s.error, "%.12g" % s.free_energy, s.iterations, int(s.converged)])
    buf = [",".join(PURSUE_COLUMNS)] + [",".join(map(str, r)) for r in rows]
    _emit("\n".join(buf) + "\n", args.out)
    return 0

def _override(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value

def cmd_experiment(args) -> int:
    spec = harness.ExperimentSpec(
        name=args.name,
        trials=args.trials,
        seed=args.seed,
        output_path=args.out,
        overrides=dict(args.set or ()),
        workers=args.workers,
    )
    result = harness.run_experiment(spec)
    if not args.out:
        sys.stdout.write(result.to_csv())
    if result.failures:
        print(f"{len(result.failures)} failed units recorded", file=sys.stderr)
    return 0

def cmd_export_dot(args) -> int:
    rg = io.read_region_graph(args.rg)
    _emit(io.to_dot(rg), args.out)
    return 0

# -- parser -----------------------------------------------------------------------

def _add_gbp_flags(p) -> None:
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--schedule", choices=gbp.SCHEDULES, default="sequential_topological")
    p.add_argument("--seed", type=int, default=0)

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="srg", description="Region graphs, reductions and generalized belief propagation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random pairwise binary model")
    p.add_argument("--kind", choices=("complete", "bipartite", "grid"), required=True)
    p.add_argument("--n", type=int, required=True, help="nodes, left side size, or grid rows")
    p.add_argument("--m", type=int, help="right side size or grid columns (default: n)")
    p.add_argument("--style", choices=STYLES, default="uniform_small")
    p.add_argument("--strength", type=float, default=1.0)
    p.add_argument("--edge-prob", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build", help="build a region graph for a model")
    p.add_argument("--kind", choices=("bethe", "squares", "star", "loops", "epgraph", "faces"), required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--box-rows", type=int, default=2)
    p.add_argument("--box-cols", type=int, default=2)
    p.add_argument("--triangulate", action="store_true")
    p.add_argument("--width", type=int, default=1)
    p.add_argument("--order", help="comma-separated node order for star roots")
    p.add_argument("--extra", help="extra outer clusters, e.g. '1 2 3;2 3 4'")
    p.add_argument("--loops", help="loops as vertex cycles, e.g. '0 1 2;1 2 3'")
    p.add_argument("--tree-edges", help="EP base tree edges, e.g. '0-3,1-3'; omit for a fully factorized base")
    p.add_argument("--groups", help="edges added by each outer region, e.g. '0-2,1-2;0-4,1-4'")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("validate", help="check connectedness, balance and hierarchy")
    p.add_argument("--rg", required=True)
    p.add_argument("--model", help="also flag model variables no region covers")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("reduce", help="reduce a structured region graph to an ordinary one")
    p.add_argument("--rg", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", help="write the reduction steps here instead of stdout")
    p.add_argument("--no-split-outer", action="store_true", help="stop once inner regions are complete")
    p.add_argument("--complete-outer", action="store_true", help="grow outer regions to single cliques afterwards")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("diagnose", help="decide singularity and print a witness")
    p.add_argument("--rg", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("infer", help="run parent-to-child GBP")
    p.add_argument("--model", required=True)
    p.add_argument("--rg", required=True)
    p.add_argument("--out", help="JSON result path (default: stdout)")
    p.add_argument("--csv", help="also write node marginals as CSV")
    _add_gbp_flags(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("exact", help="brute-force marginals and log partition function")
    p.add_argument("--model", required=True)
    p.add_argument("--state-limit", type=int, default=DEFAULT_STATE_LIMIT)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("pursue", help="greedy triangle pursuit on loop-graphs")
    p.add_argument("--mode", choices=MODES, default="best")
    p.add_argument("--constrain", action="store_true", help="reject triangles that make the graph singular")
    p.add_argument("--max-triangles", type=int, default=35)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", help="model file (default: random complete graphs)")
    p.add_argument("--n", type=int, default=7)
    p.add_argument("--style", choices=STYLES, default="uniform_small")
    p.add_argument("--order", help="fixed_order sequence, e.g. '0 1 2;0 1 3'")
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pursue)

    p = sub.add_parser("experiment", help="run a named experiment and write CSV")
    p.add_argument("--name", choices=harness.EXPERIMENTS, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--set", type=_override, action="append", metavar="KEY=VALUE", help="override a config field (JSON value)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("export-dot", help="Graphviz view with counting numbers")
    p.add_argument("--rg", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_dot)
    return parser

def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SRGError, OSError, ValueError, KeyError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1

if __name__ == "__main__":
    sys.exit(main())
