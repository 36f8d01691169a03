"""JSON text formats for models and region graphs, plus DOT export.

Model document::

    {"format": "srg-model", "version": 1,
     "variables": [{"id": 0, "cardinality": 2}, ...],
     "factors": [{"id": 0, "scope": [0, 1], "table": [v00, v01, v10, v11]}, ...]}

Factor tables are flat and row-major over ``scope``, so the last scope
variable varies fastest.

Region-graph document::

    {"format": "srg-region-graph", "version": 1,
     "factor_scopes": {"0": [0, 1], ...},
     "regions": [{"id": 0, "vars": [0, 1], "cliques": [[0, 1]], "factor_ids": [0]}, ...],
     "edges": [[parent, child], ...]}

Writers emit regions, edges and factors in sorted order so equal objects
serialize to identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidModel, InvalidRegionGraph
from .factor_graph import Factor, FactorGraph, VariableDecl
from .region_graph import Region, RegionGraph

MODEL_FORMAT = "srg-model"
RG_FORMAT = "srg-region-graph"
VERSION = 1


def _check_header(doc: Any, kind: str, error: type) -> None:
    if not isinstance(doc, dict) or doc.get("format") != kind:
        raise error(f"not a {kind} document")
    if doc.get("version") != VERSION:
        raise error(f"unsupported {kind} version {doc.get('version')!r}")


def model_to_dict(fg: FactorGraph) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": VERSION,
        "variables": [{"id": v.id, "cardinality": v.cardinality} for v in sorted(fg.variables, key=lambda v: v.id)],
        "factors": [
            {"id": f.id, "scope": list(f.scope), "table": [float(x) for x in f.table.ravel()]}
            for f in sorted(fg.factors, key=lambda f: f.id)
        ],
    }


def model_from_dict(doc: dict) -> FactorGraph:
    _check_header(doc, MODEL_FORMAT, InvalidModel)
    try:
        variables = [VariableDecl(int(v["id"]), int(v["cardinality"])) for v in doc["variables"]]
        card = {v.id: v.cardinality for v in variables}
        factors = []
        for f in doc["factors"]:
            scope = tuple(int(v) for v in f["scope"])
            if any(v not in card for v in scope):
                raise InvalidModel(f"factor {f['id']} references an undeclared variable")
            shape = tuple(card[v] for v in scope)
            values = np.asarray(f["table"], dtype=float)
            if values.size != int(np.prod(shape, dtype=np.int64)):
                raise InvalidModel(f"factor {f['id']}: {values.size} table entries for shape {shape}")
            factors.append(Factor(int(f["id"]), scope, values.reshape(shape)))
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidModel(f"malformed model document: {e}") from e
    return FactorGraph(tuple(variables), tuple(factors))


def rg_to_dict(rg: RegionGraph) -> dict:
    return {
        "format": RG_FORMAT,
        "version": VERSION,
        "factor_scopes": {str(f): list(s) for f, s in sorted(rg.factor_scopes.items())},
        "regions": [
            {
                "id": rid,
                "vars": sorted(rg[rid].vars),
                "cliques": sorted(sorted(c) for c in rg[rid].cliques),
                "factor_ids": sorted(rg[rid].factor_ids),
            }
            for rid in sorted(rg.ids)
        ],
        "edges": [list(e) for e in sorted(rg.edges)],
    }


def rg_from_dict(doc: dict) -> RegionGraph:
    _check_header(doc, RG_FORMAT, InvalidRegionGraph)
    try:
        scopes = {int(f): tuple(int(v) for v in s) for f, s in doc.get("factor_scopes", {}).items()}
        regions = [
            Region(
                int(r["id"]),
                frozenset(int(v) for v in r["vars"]),
                [frozenset(int(v) for v in c) for c in r["cliques"]],
                frozenset(int(f) for f in r.get("factor_ids", ())),
            )
            for r in doc["regions"]
        ]
        edges = [(int(p), int(c)) for p, c in doc["edges"]]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidRegionGraph(f"malformed region-graph document: {e}") from e
    return RegionGraph(regions, edges, scopes)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def _load(path: str | Path, error: type) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise error(f"{path}: invalid JSON ({e})") from e


def read_model(path: str | Path) -> FactorGraph:
    return model_from_dict(_load(path, InvalidModel))


def write_model(fg: FactorGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(model_to_dict(fg)))


def read_region_graph(path: str | Path) -> RegionGraph:
    return rg_from_dict(_load(path, InvalidRegionGraph))


def write_region_graph(rg: RegionGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(rg_to_dict(rg)))


def to_dot(rg: RegionGraph, name: str = "rg") -> str:
    """Graphviz source with each region labelled by its cliques and counting number."""
    c = rg.counting_numbers
    lines = [f"digraph {name} {{", "  node [shape=box];"]
    for rid in sorted(rg.ids):
        r = rg[rid]
        label = f"{rid}: {r.label()}\\nc={c[rid]}"
        if r.factor_ids:
            label += "\\nf=" + ",".join(map(str, sorted(r.factor_ids)))
        style = ", style=bold" if rg.is_outer(rid) else ""
        lines.append(f'  r{rid} [label="{label}"{style}];')
    for p, ch in sorted(rg.edges):
        lines.append(f"  r{p} -> r{ch};")
    lines.append("}")
    return "\n".join(lines) + "\n"
