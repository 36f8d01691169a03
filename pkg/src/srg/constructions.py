"""Builders for the standard families of region graphs.

Every builder returns a :class:`RegionGraph` whose factor scopes are those
of the model and whose factors are each assigned to one outer region.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import reductions
from .errors import (
    BaseNotDecomposable,
    InvalidDims,
    NotACycle,
    NotPairwise,
    OuterDoesNotSubsumeBase,
    UnassignedFactor,
    UncoveredFactor,
    UncoveredVariable,
    WidthTooLarge,
)
from .factor_graph import FactorGraph, grid_edges
from .region_graph import Region, RegionGraph, is_decomposable, normalize_cliques, subsumes


def _edge(u, v) -> frozenset:
    return frozenset((u, v))


def bethe(fg: FactorGraph) -> RegionGraph:
    """One outer region per factor over its scope and one region per variable below them."""
    regions, edges = [], []
    for f in fg.factors:
        regions.append(Region(f.id, f.scope, [f.scope], [f.id]))
    base = max((f.id for f in fg.factors), default=-1) + 1
    node_id = {v: base + i for i, v in enumerate(fg.var_ids)}
    for v, rid in node_id.items():
        regions.append(Region(rid, {v}, [{v}]))
    for f in fg.factors:
        edges += [(f.id, node_id[v]) for v in f.scope]
    return RegionGraph(regions, edges, fg.factor_scopes)


def _hasse(sets: Sequence[frozenset]) -> list[tuple[int, int]]:
    """Immediate-containment links between distinct sets (indices into ``sets``)."""
    out = []
    for i, a in enumerate(sets):
        below = [j for j, b in enumerate(sets) if b < a]
        for j in below:
            if not any(sets[j] < sets[k] for k in below if k != j):
                out.append((i, j))
    return out


def intersection_closure(clusters: Iterable[Iterable[int]]) -> list[frozenset]:
    """Clusters plus all nonempty intersections, iterated to a fixpoint.

    Given clusters come first in their original order, then the new sets by
    decreasing size and lexicographic order.
    """
    given = []
    for c in clusters:
        c = frozenset(c)
        if c not in given:
            given.append(c)
    known = set(given)
    frontier = list(given)
    while frontier:
        new = set()
        for a in frontier:
            for b in known:
                x = a & b
                if x and x not in known:
                    new.add(x)
        known |= new
        frontier = list(new)
    extra = sorted(known - set(given), key=lambda s: (-len(s), sorted(s)))
    return given + extra


def cluster_variation(fg: FactorGraph, outer_clusters: Iterable[Iterable[int]]) -> RegionGraph:
    """Complete regions for the clusters and all their intersections, linked by immediate containment.

    Each factor goes to the first cluster (in the given order) covering its
    scope.
    """
    clusters = [frozenset(c) for c in outer_clusters]
    for i, a in enumerate(clusters):
        for j, b in enumerate(clusters):
            if i != j and a <= b:
                raise ValueError(f"cluster {sorted(a)} is contained in cluster {sorted(b)}")
    covered = set().union(*clusters) if clusters else set()
    missing = set(fg.var_ids) - covered
    if missing:
        raise UncoveredVariable(f"variables {sorted(missing)} are in no cluster")
    assign: dict[int, list] = {i: [] for i in range(len(clusters))}
    for f in fg.factors:
        owner = next((i for i, c in enumerate(clusters) if set(f.scope) <= c), None)
        if owner is None:
            raise UncoveredFactor(f"factor {f.id} with scope {list(f.scope)} is in no cluster")
        assign[owner].append(f.id)
    sets = intersection_closure(clusters)
    regions = [Region(i, s, [s], assign.get(i, ())) for i, s in enumerate(sets)]
    return RegionGraph(regions, _hasse(sets), fg.factor_scopes)


def star_clusters(
    fg: FactorGraph, width: int, node_order: Sequence[int] | None = None
) -> list[frozenset]:
    """Outer clusters roots+{i,j} for every edge outside the root set (roots = first ``width`` nodes)."""
    if not fg.is_pairwise:
        raise NotPairwise("star construction needs a pairwise model")
    order = list(node_order) if node_order is not None else fg.var_ids
    if sorted(order) != sorted(fg.var_ids):
        raise ValueError("node_order must be a permutation of the model's variables")
    if width < 1 or width + 2 > len(order):
        raise WidthTooLarge(f"width {width} needs 1 <= width <= n-2 = {len(order) - 2}")
    roots = frozenset(order[:width])
    # edges touching the roots give smaller clusters that are absorbed below
    cands = [roots | {i, j} for i, j in fg.edges()]
    pos = {v: k for k, v in enumerate(order)}
    return _maximal_sets(cands, pos)


def _maximal_sets(cands, pos) -> list[frozenset]:
    uniq = set(cands)
    keep = [c for c in uniq if not any(c < d for d in uniq)]
    return sorted(keep, key=lambda c: sorted(pos[v] for v in c))


def star_rg(
    fg: FactorGraph,
    width: int,
    node_order: Sequence[int] | None = None,
    extra_clusters: Iterable[Iterable[int]] = (),
) -> RegionGraph:
    """Star region graph of the given width, optionally with additional outer clusters."""
    clusters = star_clusters(fg, width, node_order)
    order = list(node_order) if node_order is not None else fg.var_ids
    pos = {v: k for k, v in enumerate(order)}
    extra = [frozenset(c) for c in extra_clusters]
    clusters = _maximal_sets(clusters + extra, pos)
    return cluster_variation(fg, clusters)


def box_placements(size: int, box: int) -> list[int]:
    """Start offsets of boxes overlapping by one line; the last box is clamped to the edge."""
    step = max(box - 1, 1)
    starts = list(range(0, size - box + 1, step))
    if starts[-1] + box < size:
        starts.append(size - box)
    return starts


def grid_boxes(
    fg: FactorGraph,
    rows: int,
    cols: int,
    box_rows: int,
    box_cols: int,
    *,
    triangulate: bool = False,
) -> RegionGraph:
    """Overlapping box clusters on a rows x cols grid model (variable id r*cols + c).

    With ``triangulate`` each box is replaced by the complete pieces of a
    triangulation of its internal structure.
    """
    if rows * cols != len(fg.var_ids):
        raise InvalidDims(f"model has {len(fg.var_ids)} variables, not {rows}x{cols}")
    if not (1 <= box_rows <= rows and 1 <= box_cols <= cols):
        raise InvalidDims(f"box {box_rows}x{box_cols} does not fit a {rows}x{cols} grid")
    clusters = []
    for r0 in box_placements(rows, box_rows):
        for c0 in box_placements(cols, box_cols):
            clusters.append(
                frozenset((r0 + r) * cols + c0 + c for r in range(box_rows) for c in range(box_cols))
            )
    rg = cluster_variation(fg, clusters)
    if triangulate:
        for rid in rg.outer_ids:
            if rid in rg and rg.is_outer(rid):
                rg = reductions.triangulate_and_split(rg, rid)
    return rg


@dataclass(frozen=True)
class LoopSpec:
    loops: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        loops = tuple(tuple(int(v) for v in loop) for loop in self.loops)
        seen = set()
        for loop in loops:
            if len(loop) < 3 or len(set(loop)) != len(loop):
                raise NotACycle(f"{list(loop)} is not a simple cycle of length >= 3")
            key = frozenset(reductions.loop_edges(loop))
            if key in seen:
                raise NotACycle(f"loop {list(loop)} is repeated")
            seen.add(key)
        object.__setattr__(self, "loops", loops)

    def edge_sets(self) -> list[frozenset]:
        return [frozenset(reductions.loop_edges(loop)) for loop in self.loops]


def loop_graph(
    fg: FactorGraph,
    spec: LoopSpec,
    extra_edges: Iterable[Iterable[int]] = (),
) -> RegionGraph:
    """Loop regions over their edges over shared nodes.

    Edge regions exist for every loop edge, every pairwise factor and every
    extra edge; a factor goes to the first loop containing its edge, or to
    its own (outer) edge region. Node regions are added for variables
    contained in zero or at least two edge regions. A single-variable
    factor goes to the first outer region containing its variable.
    """
    if any(len(f.scope) > 2 for f in fg.factors):
        raise NotPairwise("loop graphs need factors on at most two variables")
    known = set(fg.var_ids)
    loop_sets = spec.edge_sets()
    for loop in spec.loops:
        if not set(loop) <= known:
            raise NotACycle(f"loop {list(loop)} uses unknown variables")
    all_edges = set().union(*loop_sets) if loop_sets else set()
    all_edges |= {_edge(*e) for e in fg.edges()}
    for e in extra_edges:
        e = frozenset(e)
        if len(e) != 2 or not e <= known:
            raise ValueError(f"extra edge {sorted(e)} is not a pair of model variables")
        all_edges.add(e)
    edge_list = sorted(all_edges, key=sorted)

    n_loops = len(loop_sets)
    edge_id = {e: n_loops + k for k, e in enumerate(edge_list)}
    loops_of = {e: [i for i, s in enumerate(loop_sets) if e in s] for e in edge_list}
    deg = {v: sum(1 for e in edge_list if v in e) for v in fg.var_ids}
    node_vars = [v for v in fg.var_ids if deg[v] != 1]
    node_id = {v: n_loops + len(edge_list) + k for k, v in enumerate(node_vars)}

    factors: dict[int, list] = {}
    for f in sorted(fg.factors, key=lambda f: f.id):
        if len(f.scope) == 2:
            e = _edge(*f.scope)
            owner = loops_of[e][0] if loops_of[e] else edge_id[e]
        else:
            (v,) = f.scope
            owner = _first_outer_with(v, spec.loops, edge_list, loops_of, edge_id, node_id)
            if owner is None:
                raise UnassignedFactor(f"factor {f.id} has no outer region containing variable {v}")
        factors.setdefault(owner, []).append(f.id)

    regions, links = [], []
    for i, (loop, es) in enumerate(zip(spec.loops, loop_sets)):
        regions.append(Region(i, set(loop), es, factors.get(i, ())))
        links += [(i, edge_id[e]) for e in es]
    for e in edge_list:
        rid = edge_id[e]
        regions.append(Region(rid, e, [e], factors.get(rid, ())))
        links += [(rid, node_id[v]) for v in e if v in node_id]
    for v in node_vars:
        regions.append(Region(node_id[v], {v}, [{v}], factors.get(node_id[v], ())))
    return RegionGraph(regions, links, fg.factor_scopes)


def _first_outer_with(v, loops, edge_list, loops_of, edge_id, node_id):
    for i, loop in enumerate(loops):
        if v in loop:
            return i
    for e in edge_list:
        if v in e and not loops_of[e]:
            return edge_id[e]
    return node_id.get(v)


def grid_faces(rows: int, cols: int) -> LoopSpec:
    """Unit squares of a rows x cols grid (variable id r*cols + c) as loops."""
    if rows < 2 or cols < 2:
        raise InvalidDims("grid faces need at least a 2x2 grid")
    loops = []
    for r in range(rows - 1):
        for c in range(cols - 1):
            v = r * cols + c
            loops.append((v, v + 1, v + cols + 1, v + cols))
    return LoopSpec(tuple(loops))


def grid_graph_edges(rows: int, cols: int) -> list[frozenset]:
    return [_edge(*e) for e in grid_edges(rows, cols)]


@dataclass(frozen=True)
class OuterSpec:
    added_cliques: tuple[frozenset, ...] = ()
    factor_ids: tuple[int, ...] = ()


@dataclass(frozen=True)
class EpGraphSpec:
    base_cliques: tuple[frozenset, ...]
    outer_specs: tuple[OuterSpec, ...] = field(default_factory=tuple)


def ep_graph(fg: FactorGraph, spec: EpGraphSpec) -> RegionGraph:
    """Outer regions 0..A-1 (base cliques plus their own) over one base region with id A."""
    base = normalize_cliques(spec.base_cliques)
    if not is_decomposable(base):
        raise BaseNotDecomposable("base cliques are not the maximal cliques of a chordal graph")
    base_vars = set().union(*base) if base else set()
    if base_vars != set(fg.var_ids):
        raise UncoveredVariable(f"base does not cover variables {sorted(set(fg.var_ids) - base_vars)}")
    owner: dict[int, int] = {}
    for i, o in enumerate(spec.outer_specs):
        for f in o.factor_ids:
            if f in owner:
                raise ValueError(f"factor {f} assigned to outer regions {owner[f]} and {i}")
            owner[f] = i
    missing = set(fg.factor_scopes) - set(owner)
    if missing:
        raise UnassignedFactor(f"factors {sorted(missing)} are assigned to no outer region")
    base_region = Region(len(spec.outer_specs), base_vars, base)
    regions = [base_region]
    for i, o in enumerate(spec.outer_specs):
        r = Region.build(i, set(base) | {frozenset(c) for c in o.added_cliques}, o.factor_ids, fg.factor_scopes)
        if not subsumes(r, base_region):
            raise OuterDoesNotSubsumeBase(f"outer region {i} does not subsume the base")
        regions.append(r)
    return RegionGraph(regions, [(i, base_region.id) for i in range(len(spec.outer_specs))], fg.factor_scopes)


def fully_factorized_ep_spec(fg: FactorGraph) -> EpGraphSpec:
    """Singleton base; one outer region per factor adding the factor's scope as a clique."""
    base = tuple(frozenset({v}) for v in fg.var_ids)
    outers = tuple(OuterSpec((frozenset(f.scope),), (f.id,)) for f in fg.factors)
    return EpGraphSpec(base, outers)


def tree_ep_spec(
    fg: FactorGraph,
    tree_edges: Iterable[Iterable[int]],
    outer_edge_groups: Sequence[Iterable[Iterable[int]]],
) -> EpGraphSpec:
    """Tree base plus outer regions each adding a group of edges.

    A factor on an added edge goes to the group adding it. A factor on a
    tree edge goes to the first group whose edges close a cycle through it,
    else to the first group. A single-variable factor follows the lowest-id
    multi-variable factor on its variable.
    """
    tree = [frozenset(e) for e in tree_edges]
    covered = set().union(*tree) if tree else set()
    base = tuple(tree) + tuple(frozenset({v}) for v in fg.var_ids if v not in covered)
    groups = [[frozenset(e) for e in g] for g in outer_edge_groups]
    if not groups:
        raise ValueError("need at least one outer edge group")
    assign: list[list[int]] = [[] for _ in groups]
    group_of_var: dict[int, int] = {}
    for f in sorted(fg.factors, key=lambda f: f.id):
        scope = frozenset(f.scope)
        if len(scope) == 1:
            continue
        target = next((i for i, g in enumerate(groups) if scope in g), None)
        if target is None:
            target = next((i for i, g in enumerate(groups) if _on_cycle(scope, tree + g)), 0)
        assign[target].append(f.id)
        for v in scope:
            group_of_var.setdefault(v, target)
    for f in fg.factors:
        if len(f.scope) == 1:
            assign[group_of_var.get(f.scope[0], 0)].append(f.id)
    outers = tuple(OuterSpec(tuple(g), tuple(a)) for g, a in zip(groups, assign))
    return EpGraphSpec(base, outers)


def _on_cycle(edge: frozenset, edges: list[frozenset]) -> bool:
    """Is ``edge`` on a cycle of the graph formed by ``edges``?"""
    u, v = sorted(edge)
    adj: dict[int, set] = {}
    for e in edges:
        if e == edge:
            continue
        a, b = sorted(e)
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    seen, stack = {u}, [u]
    while stack:
        x = stack.pop()
        for y in adj.get(x, ()):
            if y == v:
                return True
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False


def all_triangles(n_or_vars) -> list[tuple[int, int, int]]:
    vs = range(n_or_vars) if isinstance(n_or_vars, int) else sorted(n_or_vars)
    return list(itertools.combinations(vs, 3))
