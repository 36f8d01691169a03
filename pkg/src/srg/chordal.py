"""Maximum-cardinality search, chordality and clique trees.

Graphs are adjacency dicts ``{vertex: set(neighbours)}`` over integer
vertices. All tie-breaking is by lowest vertex id so results are
deterministic.
"""
from __future__ import annotations

from typing import Iterable, Mapping

Adjacency = Mapping[int, set]


def graph_from_cliques(cliques: Iterable[Iterable[int]]) -> dict[int, set]:
    adj: dict[int, set] = {}
    for c in cliques:
        c = list(c)
        for v in c:
            adj.setdefault(v, set())
        for i, u in enumerate(c):
            for v in c[i + 1:]:
                adj[u].add(v)
                adj[v].add(u)
    return adj


def components(adj: Adjacency, removed: Iterable[int] = ()) -> list[set]:
    removed = set(removed)
    seen: set = set()
    out = []
    for start in sorted(adj):
        if start in seen or start in removed:
            continue
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in comp and w not in removed:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        out.append(comp)
    return out


def mcs_order(adj: Adjacency) -> tuple[list[int], dict[int, set]]:
    """Visit order of maximum-cardinality search and each vertex's earlier neighbours."""
    weight = {v: 0 for v in adj}
    order: list[int] = []
    earlier: dict[int, set] = {}
    visited: set = set()
    while len(order) < len(adj):
        v = min((u for u in adj if u not in visited), key=lambda u: (-weight[u], u))
        earlier[v] = {u for u in adj[v] if u in visited}
        visited.add(v)
        order.append(v)
        for u in adj[v]:
            if u not in visited:
                weight[u] += 1
    return order, earlier


def is_chordal(adj: Adjacency) -> bool:
    order, earlier = mcs_order(adj)
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        if not earlier[v]:
            continue
        last = max(earlier[v], key=pos.__getitem__)
        if not (earlier[v] - {last}) <= earlier[last]:
            return False
    return True


def mcs_cliques(adj: Adjacency) -> list[frozenset]:
    """Maximal cliques of a chordal graph, in the order MCS completes them."""
    order, earlier = mcs_order(adj)
    cands = [frozenset({v} | earlier[v]) for v in order]
    out: list[frozenset] = []
    for i, c in enumerate(cands):
        if any(c < d for d in cands[i + 1:]) or c in out:
            continue
        out.append(c)
    return out


def clique_tree(cliques: list[frozenset]) -> list[tuple[int, int, frozenset]]:
    """Junction-tree edges ``(parent, child, separator)`` for cliques in MCS order.

    Each clique is attached to the earliest previous clique containing its
    intersection with all previous cliques; cliques in other connected
    components start new trees and get no edge.
    """
    edges = []
    seen: set = set()
    for j, c in enumerate(cliques):
        sep = frozenset(c & seen)
        seen |= c
        if j == 0 or not sep:
            continue
        parent = next(i for i in range(j) if sep <= cliques[i])
        edges.append((parent, j, sep))
    return edges


def triangulate(adj: Adjacency) -> dict[int, set]:
    """Chordal supergraph by greedy min-fill elimination (ties by lowest id)."""
    work = {v: set(n) for v, n in adj.items()}
    filled = {v: set(n) for v, n in adj.items()}
    remaining = set(work)
    while remaining:
        def fill(v):
            nb = sorted(work[v] & remaining)
            return sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in work[a])

        v = min(remaining, key=lambda u: (fill(u), u))
        nb = sorted(work[v] & remaining)
        for i, a in enumerate(nb):
            for b in nb[i + 1:]:
                work[a].add(b)
                work[b].add(a)
                filled[a].add(b)
                filled[b].add(a)
        remaining.discard(v)
    return filled
