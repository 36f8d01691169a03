"""Structured region graphs: regions, counting numbers and validity checks.

A region carries a variable set, a set of cliques and (outer regions only)
a set of factor ids. For discrete variables the cliques alone fix the
region's exponential family, so clique sets are kept in normal form: only
the maximal cliques are stored, since a clique inside a larger one adds
no features.

Regions are identified by integer ids rather than by content, so a graph
may temporarily hold several regions with identical content.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from . import chordal
from .errors import CyclicGraph, InvalidRegionGraph

Clique = frozenset


def normalize_cliques(cliques: Iterable[Iterable[int]]) -> frozenset:
    """Keep the nonempty, maximal cliques."""
    cs = {frozenset(c) for c in cliques}
    cs.discard(frozenset())
    return frozenset(c for c in cs if not any(c < d for d in cs))


def _sorted_cliques(cliques) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(c)) for c in cliques))


@dataclass(frozen=True)
class Region:
    id: int
    vars: frozenset
    cliques: frozenset
    factor_ids: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vars", frozenset(self.vars))
        object.__setattr__(self, "cliques", normalize_cliques(self.cliques))
        object.__setattr__(self, "factor_ids", frozenset(self.factor_ids))
        for c in self.cliques:
            if not c <= self.vars:
                raise InvalidRegionGraph(f"region {self.id}: clique {sorted(c)} not inside its variables")

    @classmethod
    def build(cls, id: int, cliques, factor_ids=(), factor_scopes: Mapping[int, tuple] | None = None) -> "Region":
        """Region whose variables are exactly those covered by its cliques and factors."""
        cliques = normalize_cliques(cliques)
        vars_ = set().union(*cliques) if cliques else set()
        for f in factor_ids:
            vars_ |= set(factor_scopes[f])
        return cls(id, frozenset(vars_), cliques, frozenset(factor_ids))

    @property
    def is_complete(self) -> bool:
        return len(self.cliques) == 1 and next(iter(self.cliques)) == self.vars

    @property
    def content(self) -> tuple:
        """Id-free description used for duplicate detection and comparisons."""
        return (tuple(sorted(self.vars)), _sorted_cliques(self.cliques))

    def with_id(self, new_id: int) -> "Region":
        return Region(new_id, self.vars, self.cliques, self.factor_ids)

    def label(self) -> str:
        return " ".join("{" + ",".join(map(str, c)) + "}" for c in _sorted_cliques(self.cliques))


def subsumes(r: Region, d: Region) -> bool:
    """True when every clique of ``d`` lies inside some clique of ``r``."""
    return all(any(c <= k for k in r.cliques) for c in d.cliques)


def structure_graph(r: Region, factor_scopes: Mapping[int, tuple] | None = None) -> dict[int, set]:
    """Undirected graph over the region's variables linking clique and factor co-members."""
    groups = list(r.cliques)
    for f in r.factor_ids:
        groups.append(frozenset(factor_scopes[f]))
    adj = chordal.graph_from_cliques(groups)
    for v in r.vars:
        adj.setdefault(v, set())
    return adj


def is_decomposable(cliques: Iterable[Iterable[int]]) -> bool:
    """Cliques are exactly the maximal cliques of a chordal graph."""
    given = {frozenset(c) for c in cliques}
    given.discard(frozenset())
    if not given:
        return True
    adj = chordal.graph_from_cliques(given)
    if not chordal.is_chordal(adj):
        return False
    return set(chordal.mcs_cliques(adj)) == given


class RegionGraph:
    """Immutable DAG of regions plus the scope of every model factor it assigns."""

    def __init__(
        self,
        regions: Iterable[Region],
        edges: Iterable[tuple[int, int]],
        factor_scopes: Mapping[int, Iterable[int]] | None = None,
        *,
        check_factors: bool = True,
    ):
        self._regions: dict[int, Region] = {}
        for r in regions:
            if r.id in self._regions:
                raise InvalidRegionGraph(f"duplicate region id {r.id}")
            self._regions[r.id] = r
        self._edges = frozenset((int(p), int(c)) for p, c in edges)
        self.factor_scopes: dict[int, tuple] = {int(f): tuple(s) for f, s in (factor_scopes or {}).items()}
        self._parents: dict[int, set] = {rid: set() for rid in self._regions}
        self._children: dict[int, set] = {rid: set() for rid in self._regions}
        for p, c in self._edges:
            if p not in self._regions or c not in self._regions:
                raise InvalidRegionGraph(f"edge {p}->{c} references an unknown region")
            if p == c:
                raise CyclicGraph(f"self loop on region {p}")
            self._parents[c].add(p)
            self._children[p].add(c)
        self._topo = self._toposort()
        self._check_regions(check_factors)

    # -- construction helpers ------------------------------------------------

    def _toposort(self) -> list[int]:
        indeg = {r: len(ps) for r, ps in self._parents.items()}
        ready = sorted(r for r, d in indeg.items() if d == 0)
        order = []
        heapq.heapify(ready)
        while ready:
            r = heapq.heappop(ready)
            order.append(r)
            for c in self._children[r]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        if len(order) != len(self._regions):
            raise CyclicGraph("region graph contains a directed cycle")
        return order

    def _check_regions(self, check_factors: bool) -> None:
        owner: dict[int, int] = {}
        for r in self._regions.values():
            covered = set().union(*r.cliques) if r.cliques else set()
            for f in r.factor_ids:
                if f not in self.factor_scopes:
                    raise InvalidRegionGraph(f"region {r.id} holds unknown factor {f}")
                if self._parents[r.id]:
                    raise InvalidRegionGraph(f"inner region {r.id} carries factor {f}")
                if f in owner:
                    raise InvalidRegionGraph(f"factor {f} assigned to regions {owner[f]} and {r.id}")
                owner[f] = r.id
                scope = set(self.factor_scopes[f])
                if not scope <= r.vars:
                    raise InvalidRegionGraph(f"factor {f} scope not inside region {r.id}")
                covered |= scope
            if covered != set(r.vars):
                raise InvalidRegionGraph(f"region {r.id}: variables {sorted(set(r.vars) - covered)} are in no clique or factor")
        if check_factors:
            missing = set(self.factor_scopes) - set(owner)
            if missing:
                raise InvalidRegionGraph(f"factors {sorted(missing)} are not assigned to any region")

    def evolve(
        self,
        *,
        remove: Iterable[int] = (),
        add: Iterable[Region] = (),
        remove_edges: Iterable[tuple[int, int]] = (),
        add_edges: Iterable[tuple[int, int]] = (),
        factor_scopes: Mapping[int, Iterable[int]] | None = None,
        check_factors: bool = True,
    ) -> "RegionGraph":
        """New graph with regions/edges removed then added. Edges touching removed regions go too."""
        remove = set(remove)
        add = list(add)
        replaced = {r.id for r in add}
        regions = [r for rid, r in self._regions.items() if rid not in remove and rid not in replaced] + add
        drop_e = set(remove_edges)
        edges = {
            e for e in self._edges if e not in drop_e and e[0] not in remove and e[1] not in remove
        } | set(add_edges)
        scopes = self.factor_scopes if factor_scopes is None else factor_scopes
        return RegionGraph(regions, edges, scopes, check_factors=check_factors)

    def relabel(self) -> "RegionGraph":
        """Copy with region ids renumbered 0..n-1 in topological order."""
        new = {rid: i for i, rid in enumerate(self._topo)}
        return RegionGraph(
            [self._regions[rid].with_id(new[rid]) for rid in self._topo],
            [(new[p], new[c]) for p, c in self._edges],
            self.factor_scopes,
        )

    # -- queries -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._regions)

    def __contains__(self, rid) -> bool:
        return rid in self._regions

    def __getitem__(self, rid: int) -> Region:
        return self._regions[rid]

    def __repr__(self) -> str:
        return f"RegionGraph({len(self._regions)} regions, {len(self._edges)} edges)"

    @property
    def regions(self) -> dict[int, Region]:
        return dict(self._regions)

    @property
    def ids(self) -> list[int]:
        return sorted(self._regions)

    @property
    def edges(self) -> frozenset:
        return self._edges

    @property
    def next_id(self) -> int:
        return max(self._regions, default=-1) + 1

    def parents(self, rid: int) -> frozenset:
        return frozenset(self._parents[rid])

    def children(self, rid: int) -> frozenset:
        return frozenset(self._children[rid])

    def topological_order(self) -> list[int]:
        return list(self._topo)

    def is_outer(self, rid: int) -> bool:
        return not self._parents[rid]

    @property
    def outer_ids(self) -> list[int]:
        return [r for r in self._topo if not self._parents[r]]

    @property
    def inner_ids(self) -> list[int]:
        return [r for r in self._topo if self._parents[r]]

    @cached_property
    def _ancestors(self) -> dict[int, frozenset]:
        anc: dict[int, frozenset] = {}
        for r in self._topo:
            acc = set()
            for p in self._parents[r]:
                acc.add(p)
                acc |= anc[p]
            anc[r] = frozenset(acc)
        return anc

    @cached_property
    def _descendants(self) -> dict[int, frozenset]:
        desc: dict[int, frozenset] = {}
        for r in reversed(self._topo):
            acc = set()
            for c in self._children[r]:
                acc.add(c)
                acc |= desc[c]
            desc[r] = frozenset(acc)
        return desc

    def ancestors(self, rid: int) -> frozenset:
        return self._ancestors[rid]

    def descendants(self, rid: int) -> frozenset:
        return self._descendants[rid]

    @property
    def variables(self) -> list[int]:
        out: set = set()
        for r in self._regions.values():
            out |= r.vars
        return sorted(out)

    def regions_containing(self, var: int) -> list[int]:
        return [rid for rid in self._topo if var in self._regions[rid].vars]

    def structure_graph(self, rid: int) -> dict[int, set]:
        return structure_graph(self._regions[rid], self.factor_scopes)

    @cached_property
    def counting_numbers(self) -> dict[int, int]:
        return counting_numbers(self)

    def content_signature(self) -> tuple:
        """Id-free description of regions and edges; equal signatures mean isomorphic graphs."""
        regions = sorted(r.content for r in self._regions.values())
        edges = sorted((self._regions[p].content, self._regions[c].content) for p, c in self._edges)
        return (tuple(regions), tuple(edges))


def counting_numbers(rg: RegionGraph) -> dict[int, int]:
    """c_R = 1 - sum of c_A over all ancestors A, computed top-down."""
    c: dict[int, int] = {}
    for r in rg.topological_order():
        c[r] = 1 - sum(c[a] for a in rg.ancestors(r))
    return c


def total_counting_number(rg: RegionGraph) -> int:
    return sum(rg.counting_numbers.values())


def is_complete(r: Region) -> bool:
    return r.is_complete


def is_acyclic(rg: RegionGraph) -> bool:
    """No undirected cycle among regions (the region graph is a forest)."""
    adj = {rid: set() for rid in rg.ids}
    for p, c in rg.edges:
        adj[p].add(c)
        adj[c].add(p)
    return len(rg.edges) == len(adj) - len(chordal.components(adj))


@dataclass
class ValidityReport:
    connected_per_variable: dict[int, bool]
    balanced_per_variable: dict[int, bool]
    hierarchy_ok: dict[tuple[int, int], bool]
    overall: bool = field(init=False)

    def __post_init__(self):
        self.overall = (
            all(self.connected_per_variable.values())
            and all(self.balanced_per_variable.values())
            and all(self.hierarchy_ok.values())
        )

    def failures(self) -> list[str]:
        out = [f"variable {v}: regions containing it are not connected" for v, ok in sorted(self.connected_per_variable.items()) if not ok]
        out += [f"variable {v}: counting numbers do not sum to 1" for v, ok in sorted(self.balanced_per_variable.items()) if not ok]
        out += [f"edge {p}->{c}: parent does not subsume child" for (p, c), ok in sorted(self.hierarchy_ok.items()) if not ok]
        return out


def validate(rg: RegionGraph, variables: Iterable[int] | None = None) -> ValidityReport:
    """Connectedness and balancedness per variable, hierarchy per edge.

    ``variables`` defaults to every variable that occurs in some region; pass
    the model's variables to also flag variables no region covers.
    """
    c = rg.counting_numbers
    adj = {rid: set() for rid in rg.ids}
    for p, ch in rg.edges:
        adj[p].add(ch)
        adj[ch].add(p)
    vars_ = sorted(set(rg.variables) | set(variables or ()))
    connected, balanced = {}, {}
    for v in vars_:
        members = set(rg.regions_containing(v))
        sub = {rid: adj[rid] & members for rid in members}
        connected[v] = len(chordal.components(sub)) == 1
        balanced[v] = sum(c[rid] for rid in members) == 1
    hierarchy = {(p, ch): subsumes(rg[p], rg[ch]) for p, ch in sorted(rg.edges)}
    return ValidityReport(connected, balanced, hierarchy)
