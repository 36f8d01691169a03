"""Fixed-point preserving rewrites of region graphs and singularity tests.

Every operator takes a :class:`RegionGraph` and returns a new one; the
input is never modified. Preconditions are checked eagerly and violations
raise a :class:`PreconditionViolated` subclass naming the failing clause.
Pass a list as ``trace`` to collect the :class:`ReductionStep` records of
an operator or of a whole reduction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import chordal
from .errors import (
    ChildCliqueOrphaned,
    ChildStraddlesSplit,
    FactorUncovered,
    MultipleParents,
    NoCoveringSharedChildClique,
    NonDecomposableInnerRegion,
    NotACycle,
    NotALoopGraph,
    NotASeparator,
    NotDecomposable,
    NotOuterRegion,
    PreconditionViolated,
    RegionComplete,
    SeparatorNotComplete,
)
from .region_graph import Region, RegionGraph, is_decomposable, normalize_cliques, subsumes

OPERATORS = ("LinkDeath", "GrowShrink", "Drop", "FactorMove", "Merge", "Split", "DuplicateMerge")

# cliques larger than this are not searched exhaustively for separators
_MAX_SEPARATOR_SEARCH = 12


@dataclass(frozen=True)
class ReductionStep:
    operator: str
    targets: tuple
    parameters: dict = field(default_factory=dict)

    def __str__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        return f"{self.operator}{self.targets}" + (f" [{params}]" if params else "")


@dataclass(frozen=True)
class SingularityVerdict:
    verdict: str  # "NonSingular" | "Singular" | "Unknown"
    witness: object = None

    @property
    def nonsingular(self) -> bool:
        return self.verdict == "NonSingular"


def _record(trace, operator, targets, **params):
    if trace is not None:
        trace.append(ReductionStep(operator, tuple(targets), params))


def _fmt(vs) -> list:
    return sorted(vs)


# -- the six operators ------------------------------------------------------

def link_death(rg: RegionGraph, parent_id: int, child_id: int, trace: list | None = None) -> RegionGraph:
    """Delete the link parent -> child.

    Allowed when the child is also reached from the parent by another path,
    or when the parent shares an ancestor A with another parent of the child
    and the other parents share no ancestor with the parent outside A and
    A's ancestors.
    """
    if (parent_id, child_id) not in rg.edges:
        raise PreconditionViolated("LinkDeath", f"no edge {parent_id}->{child_id}")
    if any(child_id in rg.descendants(x) for x in rg.children(parent_id) - {child_id}):
        _record(trace, "LinkDeath", (parent_id, child_id), clause="descendant")
        return rg.evolve(remove_edges=[(parent_id, child_id)])
    others = rg.parents(child_id) - {parent_id}
    anc_r = rg.ancestors(parent_id)
    for a in sorted(anc_r):
        if not any(a in rg.ancestors(p) for p in others):
            continue
        allowed = {a} | rg.ancestors(a)
        if all((rg.ancestors(p) & anc_r) <= allowed and p not in anc_r for p in others):
            _record(trace, "LinkDeath", (parent_id, child_id), clause="shared-ancestor", ancestor=a)
            return rg.evolve(remove_edges=[(parent_id, child_id)])
    raise PreconditionViolated(
        "LinkDeath", "child is not reachable by another path and no qualifying shared ancestor exists"
    )


def grow_shrink(
    rg: RegionGraph,
    region_id: int,
    add_cliques: Iterable[Iterable[int]] = (),
    remove_cliques: Iterable[Iterable[int]] = (),
    trace: list | None = None,
) -> RegionGraph:
    """Add cliques to and/or remove cliques from an outer region.

    Removal is allowed only when every child clique still lies inside some
    remaining clique. Variables no longer covered by a clique or factor
    leave the region.
    """
    if not rg.is_outer(region_id):
        raise NotOuterRegion("GrowShrink", region_id)
    r = rg[region_id]
    add = [frozenset(c) for c in add_cliques]
    remove = [frozenset(c) for c in remove_cliques]
    for c in add:
        if not c <= r.vars:
            raise PreconditionViolated("GrowShrink", f"added clique {_fmt(c)} has variables outside the region")
    current = set(r.cliques) | set(add)
    for c in remove:
        if c not in current:
            raise PreconditionViolated("GrowShrink", f"clique {_fmt(c)} is not a clique of region {region_id}")
        current.discard(c)
    new = Region.build(region_id, current, r.factor_ids, rg.factor_scopes)
    for ch in rg.children(region_id):
        if not subsumes(new, rg[ch]):
            raise ChildCliqueOrphaned("GrowShrink", f"child {ch} would lose a covering clique")
    _record(trace, "GrowShrink", (region_id,), added=[_fmt(c) for c in add], removed=[_fmt(c) for c in remove])
    return rg.evolve(add=[new])


def drop(rg: RegionGraph, region_id: int, trace: list | None = None) -> RegionGraph:
    """Remove a region with a unique parent, linking that parent to its children."""
    ps = rg.parents(region_id)
    if len(ps) != 1:
        raise MultipleParents("Drop", f"region {region_id} has {len(ps)} parents")
    (p,) = ps
    _record(trace, "Drop", (region_id,), parent=p)
    return rg.evolve(remove=[region_id], add_edges=[(p, c) for c in rg.children(region_id)])


def factor_move(rg: RegionGraph, factor_id: int, from_region: int, to_region: int, trace: list | None = None) -> RegionGraph:
    """Move a factor between two outer regions sharing a child clique that covers it."""
    for rid in (from_region, to_region):
        if not rg.is_outer(rid):
            raise NotOuterRegion("FactorMove", rid)
    src, dst = rg[from_region], rg[to_region]
    if factor_id not in src.factor_ids:
        raise PreconditionViolated("FactorMove", f"factor {factor_id} is not in region {from_region}")
    scope = frozenset(rg.factor_scopes[factor_id])
    shared = rg.children(from_region) & rg.children(to_region)
    if not any(scope <= c for d in shared for c in rg[d].cliques):
        raise NoCoveringSharedChildClique("FactorMove", f"no shared child clique covers factor {factor_id}")
    new_src = Region.build(from_region, src.cliques, src.factor_ids - {factor_id}, rg.factor_scopes)
    new_dst = Region(to_region, dst.vars, dst.cliques, dst.factor_ids | {factor_id})
    if new_src.vars != src.vars:
        raise PreconditionViolated("FactorMove", f"region {from_region} would lose variables")
    _record(trace, "FactorMove", (factor_id, from_region, to_region))
    return rg.evolve(add=[new_src, new_dst])


def merge_violation(rg: RegionGraph, parent_id: int, child_id: int) -> str | None:
    """Reason why Merge(parent, child) is not allowed, or None."""
    if (parent_id, child_id) not in rg.edges:
        return f"no edge {parent_id}->{child_id}"
    r, d = rg[parent_id], rg[child_id]
    if r.factor_ids:
        return "clause 1: parent carries factors"
    if not (subsumes(r, d) and subsumes(d, r)):
        return "clause 2: regions do not subsume each other"
    allowed = {parent_id} | rg.ancestors(parent_id)
    anc_d = rg.ancestors(child_id)
    for x in rg.children(parent_id) - {child_id}:
        if not (rg.ancestors(x) & anc_d) <= allowed:
            return f"clause 3: child {x} shares ancestors with {child_id} outside the parent's ancestry"
        if child_id in rg.ancestors(x) or x in anc_d:
            return f"clause 3: child {x} is related to {child_id} by descent"
    return None


def merge(rg: RegionGraph, parent_id: int, child_id: int, trace: list | None = None) -> RegionGraph:
    """Fuse a factor-free parent into a child it mutually subsumes.

    The fused region keeps the child's id and content and takes the union
    of both regions' parents and children.
    """
    why = merge_violation(rg, parent_id, child_id)
    if why is not None:
        raise PreconditionViolated("Merge", why)
    new_parents = rg.parents(parent_id)
    new_children = rg.children(parent_id) - {child_id}
    _record(trace, "Merge", (parent_id, child_id))
    return rg.evolve(
        remove=[parent_id],
        add_edges=[(p, child_id) for p in new_parents] + [(child_id, c) for c in new_children],
    )


def induced_subregion(r: Region, keep: Iterable[int], new_id: int, factor_scopes, factor_ids=None) -> Region:
    """R[V]: the cliques of R intersected with V, plus the given factors (default: all inside V)."""
    keep = frozenset(keep)
    cliques = normalize_cliques(c & keep for c in r.cliques)
    if factor_ids is None:
        factor_ids = [f for f in r.factor_ids if set(factor_scopes[f]) <= keep]
    return Region.build(new_id, cliques, factor_ids, factor_scopes)


def split(
    rg: RegionGraph,
    region_id: int,
    partition: tuple[Iterable[int], Iterable[int], Iterable[int]],
    trace: list | None = None,
) -> RegionGraph:
    """Replace a region by R[A+S], R[B+S] and (for nonempty S) R[S].

    New ids are ``rg.next_id`` for the A-side, ``+1`` for the B-side and
    ``+2`` for the separator region. Factors covered by both sides go to
    the A-side.
    """
    r = rg[region_id]
    a, b, s = (frozenset(x) for x in partition)
    if a & b or a & s or b & s or (a | b | s) != r.vars:
        raise PreconditionViolated("Split", "A, B, S must partition the region's variables")
    if not a or not b:
        raise PreconditionViolated("Split", "A and B must be nonempty")
    adj = rg.structure_graph(region_id)
    if any(adj[u] & b for u in a):
        raise NotASeparator("Split", f"{_fmt(s)} does not separate {_fmt(a)} from {_fmt(b)}")
    if s and not any(s <= c for c in r.cliques):
        raise SeparatorNotComplete("Split", f"R[{_fmt(s)}] is not complete")
    fa, fb = [], []
    for f in sorted(r.factor_ids):
        scope = set(rg.factor_scopes[f])
        if scope <= a | s:
            fa.append(f)
        elif scope <= b | s:
            fb.append(f)
        else:
            raise FactorUncovered("Split", f"factor {f} is covered by neither side")
    base = rg.next_id
    ra = induced_subregion(r, a | s, base, rg.factor_scopes, fa)
    rb = induced_subregion(r, b | s, base + 1, rg.factor_scopes, fb)
    new = [ra, rb]
    edges = [(p, x.id) for p in rg.parents(region_id) for x in (ra, rb)]
    linked: set = set()
    if s:
        rs = Region(base + 2, s, {s})
        new.append(rs)
        edges += [(ra.id, rs.id), (rb.id, rs.id)]
        for d in sorted(rg.descendants(region_id)):
            if subsumes(rs, rg[d]):
                edges.append((rs.id, d))
                linked.add(d)
    for ch in sorted(rg.children(region_id) - linked):
        if subsumes(ra, rg[ch]):
            edges.append((ra.id, ch))
        elif subsumes(rb, rg[ch]):
            edges.append((rb.id, ch))
        else:
            raise ChildStraddlesSplit("Split", f"child {ch} is not inside either side")
    _record(trace, "Split", (region_id,), A=_fmt(a), B=_fmt(b), S=_fmt(s), new=[x.id for x in new])
    return rg.evolve(remove=[region_id], add=new, add_edges=edges)


# -- canonicalisation helpers ----------------------------------------------

def prune_redundant_links(rg: RegionGraph, trace: list | None = None) -> RegionGraph:
    """Apply Link-Death to every link whose child is reachable by another path."""
    redundant = [
        (p, c)
        for p, c in sorted(rg.edges)
        if any(c in rg.descendants(x) for x in rg.children(p) - {c})
    ]
    for p, c in redundant:
        _record(trace, "LinkDeath", (p, c), clause="descendant")
    return rg.evolve(remove_edges=redundant) if redundant else rg


def duplicate_merge(rg: RegionGraph, trace: list | None = None) -> RegionGraph:
    """Fuse duplicated regions until none can be fused.

    A factor-free region whose child has identical variables and cliques is
    merged into that child whenever Merge allows it. Duplicates that are
    not related by descent are left alone: fusing them would change the
    counting numbers of the graph.
    """
    while True:
        for p, c in sorted(rg.edges):
            if rg[p].content == rg[c].content and merge_violation(rg, p, c) is None:
                _record(trace, "DuplicateMerge", (p, c))
                rg = merge(rg, p, c)
                break
        else:
            return rg


def cleanup(rg: RegionGraph, trace: list | None = None, *, drops: bool = True) -> RegionGraph:
    """Redundant-link removal, duplicate merging and dropping of single-parent regions, to a fixpoint."""
    while True:
        before = (len(rg), len(rg.edges))
        rg = prune_redundant_links(rg, trace)
        rg = duplicate_merge(rg, trace)
        if drops:
            for rid in rg.topological_order():
                if len(rg.parents(rid)) == 1:
                    rg = drop(rg, rid, trace)
                    break
        if (len(rg), len(rg.edges)) == before:
            return rg


def strip_factors(rg: RegionGraph) -> RegionGraph:
    """Same graph with every factor removed; variables covered only by factors are dropped."""
    regions = [Region.build(r.id, r.cliques) for r in rg.regions.values()]
    return RegionGraph(regions, rg.edges, {})


# -- splitting strategies ---------------------------------------------------

def find_split(r: Region) -> tuple[frozenset, frozenset, frozenset]:
    """A complete separator (A, B, S) of a decomposable, incomplete region.

    Disconnected cliques give S = {} with A the component of the lowest
    variable. Otherwise S is the first separator of the MCS junction tree;
    A holds the root side, B the subtree below that separator.
    """
    if r.is_complete:
        raise RegionComplete(f"region {r.id} is complete")
    if not is_decomposable(r.cliques):
        raise NotDecomposable(f"region {r.id} cliques are not decomposable")
    adj = chordal.graph_from_cliques(r.cliques)
    comps = chordal.components(adj)
    if len(comps) > 1:
        a = frozenset(comps[0])
        return a, frozenset(r.vars) - a, frozenset()
    cliques = chordal.mcs_cliques(adj)
    tree = chordal.clique_tree(cliques)
    parent, child, sep = tree[0]
    kids: dict[int, list] = {}
    for p, c, _ in tree:
        kids.setdefault(p, []).append(c)
    below, stack = set(), [child]
    while stack:
        k = stack.pop()
        below.add(k)
        stack.extend(kids.get(k, []))
    b_vars = set().union(*(cliques[k] for k in below)) - sep
    a_vars = set(r.vars) - b_vars - sep
    return frozenset(a_vars), frozenset(b_vars), frozenset(sep)


def _partition_ok(rg: RegionGraph, rid: int, a, b, s) -> bool:
    r = rg[rid]
    ra = induced_subregion(r, a | s, -1, rg.factor_scopes, [])
    rb = induced_subregion(r, b | s, -2, rg.factor_scopes, [])
    rs = Region(-3, s, {s}) if s else None
    for ch in rg.children(rid):
        d = rg[ch]
        if rs is not None and subsumes(rs, d):
            continue
        if not (subsumes(ra, d) or subsumes(rb, d)):
            return False
    for f in r.factor_ids:
        scope = set(rg.factor_scopes[f])
        if not (scope <= a | s or scope <= b | s):
            return False
    return True


def find_clique_separator(rg: RegionGraph, rid: int):
    """Smallest complete separator of a region's structure that keeps its children whole, or None."""
    r = rg[rid]
    if r.is_complete:
        return None
    adj = rg.structure_graph(rid)
    comps = chordal.components(adj)
    if len(comps) > 1:
        a = frozenset(comps[0])
        b = frozenset(r.vars) - a
        if _partition_ok(rg, rid, a, b, frozenset()):
            return a, b, frozenset()
    candidates: set = set()
    for c in r.cliques:
        if len(c) > _MAX_SEPARATOR_SEARCH:
            continue
        items = sorted(c)
        for k in range(1, len(items) + 1):
            candidates.update(frozenset(x) for x in itertools.combinations(items, k))
    for s in sorted(candidates, key=lambda x: (len(x), sorted(x))):
        comps = chordal.components(adj, removed=s)
        if len(comps) < 2:
            continue
        a = frozenset(comps[0])
        b = frozenset(r.vars) - a - s
        if _partition_ok(rg, rid, a, b, s):
            return a, b, s
    return None


def _bottom_incomplete_inner(rg: RegionGraph):
    bad = [rid for rid in rg.inner_ids if not rg[rid].is_complete]
    for rid in reversed(rg.topological_order()):
        if rid in bad and not any(d in bad for d in rg.descendants(rid)):
            return rid
    return None


def reduce_to_ordinary(srg: RegionGraph, *, split_outer: bool = True, trace: list | None = None) -> RegionGraph:
    """Rewrite an SRG with decomposable inner regions into an ordinary region graph.

    Incomplete inner regions are split bottom-up along junction-tree
    separators until every inner region is complete. With ``split_outer``
    each outer region is then cut along complete separators of its
    structure into pieces that cannot be cut further. Duplicates are merged
    and single-parent regions dropped after every split.
    """
    rg = cleanup(srg, trace)
    while True:
        rid = _bottom_incomplete_inner(rg)
        if rid is None:
            break
        if not is_decomposable(rg[rid].cliques):
            raise NonDecomposableInnerRegion(f"inner region {rid} is not decomposable")
        rg = split(rg, rid, find_split(rg[rid]), trace)
        rg = cleanup(rg, trace)
    if split_outer:
        rg = split_outer_regions(rg, trace)
    return rg


def split_outer_regions(rg: RegionGraph, trace: list | None = None) -> RegionGraph:
    """Cut outer regions along complete separators until none applies."""
    while True:
        for rid in rg.outer_ids:
            part = find_clique_separator(rg, rid)
            if part is not None:
                rg = cleanup(split(rg, rid, part, trace), trace)
                break
        else:
            return rg


def complete_outer_regions(rg: RegionGraph, trace: list | None = None) -> RegionGraph:
    """Grow every outer region to a single clique over its variables."""
    for rid in rg.outer_ids:
        r = rg[rid]
        if not r.is_complete:
            rg = grow_shrink(rg, rid, [r.vars], [], trace)
    return rg


def triangulate_and_split(rg: RegionGraph, region_id: int, trace: list | None = None) -> RegionGraph:
    """Replace an outer region by the cliques of a triangulation of its internal structure.

    The region is first shrunk to its children's cliques (its factors keep
    their variables), its structure graph is triangulated, the region is
    grown by the resulting maximal cliques and then split along
    junction-tree separators until every piece is complete.
    """
    r = rg[region_id]
    child_cliques = normalize_cliques(c for ch in rg.children(region_id) for c in rg[ch].cliques)
    rg = grow_shrink(rg, region_id, child_cliques, [c for c in r.cliques if c not in child_cliques], trace)
    adj = rg.structure_graph(region_id)
    tri = chordal.triangulate(adj)
    cliques = chordal.mcs_cliques(tri)
    current = rg[region_id].cliques
    rg = grow_shrink(rg, region_id, [c for c in cliques if c not in current], [], trace)
    pending = [region_id]
    while pending:
        rid = pending.pop()
        if rid not in rg or rg[rid].is_complete:
            continue
        base = rg.next_id
        rg = split(rg, rid, find_split(rg[rid]), trace)
        pending += [base, base + 1]
    return cleanup(rg, trace)


# -- singularity ------------------------------------------------------------

def _isolate_singletons(rg: RegionGraph, trace) -> tuple[RegionGraph, bool]:
    """Break isolated regions into single-variable regions and remove those."""
    changed = False
    for rid in rg.ids:
        if rg.parents(rid) or rg.children(rid):
            continue
        r = rg[rid]
        if len(r.vars) > 1:
            singles = [frozenset({v}) for v in sorted(r.vars)]
            if set(r.cliques) != set(singles):
                rg = grow_shrink(rg, rid, singles, list(r.cliques), trace)
            while len(rg[rid].vars) > 1 if rid in rg else False:
                v = min(rg[rid].vars)
                base = rg.next_id
                rg = split(rg, rid, ({v}, rg[rid].vars - {v}, frozenset()), trace)
                rid = base + 1
        changed = True
    if changed:
        keep_out = [rid for rid in rg.ids if not rg.parents(rid) and not rg.children(rid)]
        rg = rg.evolve(remove=keep_out)
    return rg, changed


def nonsingular_general(srg: RegionGraph, trace: list | None = None, max_steps: int = 100_000) -> SingularityVerdict:
    """Decide non-singularity by reducing the factor-free graph.

    The graph is stripped of factors, its inner regions are made complete,
    and then outer regions are repeatedly shrunk to their children's
    cliques and cut along complete separators, with duplicates merged,
    single-parent regions dropped and isolated regions discarded. Reaching
    only single-variable regions means NonSingular; getting stuck with
    complete inner regions means Singular; anything else is Unknown.
    """
    rg = strip_factors(srg)
    try:
        rg = reduce_to_ordinary(rg, split_outer=False, trace=trace)
    except NonDecomposableInnerRegion:
        return SingularityVerdict("Unknown", rg)
    for _ in range(max_steps):
        rg = cleanup(rg, trace)
        rg, changed = _isolate_singletons(rg, trace)
        if changed:
            continue
        for rid in rg.outer_ids:
            r = rg[rid]
            target = normalize_cliques(c for ch in rg.children(rid) for c in rg[ch].cliques)
            if target != r.cliques:
                rg = grow_shrink(rg, rid, [c for c in target if c not in r.cliques], [c for c in r.cliques if c not in target], trace)
                break
            part = find_clique_separator(rg, rid)
            if part is not None:
                rg = split(rg, rid, part, trace)
                break
        else:
            break
    if all(len(r.vars) == 1 for r in rg.regions.values()):
        return SingularityVerdict("NonSingular", None)
    if all(rg[rid].is_complete for rid in rg.inner_ids):
        return SingularityVerdict("Singular", rg)
    return SingularityVerdict("Unknown", rg)


def peel_loops(loops: Sequence[Iterable[frozenset]]) -> tuple[bool, list[int]]:
    """Repeatedly discard a loop owning an edge no other remaining loop uses.

    ``loops`` are edge sets. Returns (all loops peeled, indices of the
    loops left over).
    """
    remaining = {i: set(map(frozenset, es)) for i, es in enumerate(loops)}
    progress = True
    while remaining and progress:
        progress = False
        for i in sorted(remaining):
            others = set().union(*(remaining[j] for j in remaining if j != i))
            if remaining[i] - others:
                del remaining[i]
                progress = True
                break
    return not remaining, sorted(remaining)


def loop_regions(rg: RegionGraph) -> list[int]:
    """Ids of the loop regions of a loop-graph; raises NotALoopGraph for anything else."""
    loops = []
    for rid in rg.ids:
        r = rg[rid]
        if len(r.vars) <= 2:
            if not r.is_complete:
                raise NotALoopGraph(f"region {rid} is neither an edge nor a node region")
            continue
        if any(len(c) != 2 for c in r.cliques) or not _is_simple_cycle(r.cliques):
            raise NotALoopGraph(f"region {rid} is not a loop region")
        if rg.parents(rid):
            raise NotALoopGraph(f"loop region {rid} has parents")
        kids = {rg[c].content for c in rg.children(rid)}
        for c in r.cliques:
            if (tuple(sorted(c)), (tuple(sorted(c)),)) not in kids:
                raise NotALoopGraph(f"loop region {rid} is not a parent of its edge {sorted(c)}")
        loops.append(rid)
    return loops


def _is_simple_cycle(edges) -> bool:
    adj = chordal.graph_from_cliques(edges)
    return all(len(n) == 2 for n in adj.values()) and len(chordal.components(adj)) == 1


def loop_graph_singular(rg: RegionGraph) -> SingularityVerdict:
    """Singular iff some subset of loops has every edge shared by two of its loops."""
    loops = loop_regions(rg)
    ok, left = peel_loops([rg[rid].cliques for rid in loops])
    if ok:
        return SingularityVerdict("NonSingular", None)
    return SingularityVerdict("Singular", [loops[i] for i in left])


def loop_edges(loop: Sequence[int]) -> list[frozenset]:
    n = len(loop)
    return [frozenset((loop[i], loop[(i + 1) % n])) for i in range(n)]


def check_cycle(loop: Sequence[int], base_edges: set) -> None:
    if len(loop) < 3 or len(set(loop)) != len(loop):
        raise NotACycle(f"{list(loop)} is not a simple cycle of length >= 3")
    for e in loop_edges(loop):
        if e not in base_edges:
            raise NotACycle(f"{list(loop)} uses {sorted(e)}, which is not an edge of the graph")


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of bit-packed row vectors."""
    pivots: dict[int, int] = {}
    rank = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = row
                rank += 1
                break
            row ^= pivots[top]
    return rank


def cycle_space_dependent(loops: Sequence[Sequence[int]], base_edges: Iterable[Iterable[int]]) -> bool:
    """True iff the loops' edge-incidence vectors are linearly dependent over GF(2)."""
    base = {frozenset(e) for e in base_edges}
    index = {e: i for i, e in enumerate(sorted(base, key=sorted))}
    rows = []
    for loop in loops:
        check_cycle(loop, base)
        bits = 0
        for e in loop_edges(loop):
            bits |= 1 << index[e]
        rows.append(bits)
    return gf2_rank(rows) < len(rows)
