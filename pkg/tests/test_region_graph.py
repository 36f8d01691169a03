import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srg import chordal
from srg.constructions import bethe, ep_graph, fully_factorized_ep_spec, grid_boxes, star_rg
from srg.errors import CyclicGraph, InvalidRegionGraph
from srg.factor_graph import grid_model, pairwise_binary_model
from srg.region_graph import (
    Region,
    RegionGraph,
    counting_numbers,
    is_acyclic,
    is_complete,
    is_decomposable,
    structure_graph,
    subsumes,
    total_counting_number,
    validate,
)

from conftest import complete_edges, triangle_model


def region(rid, cliques, factors=(), scopes=None):
    return Region.build(rid, cliques, factors, scopes)


def counting_oracle(rg, rng):
    """Counting-number recursion via networkx ancestors, evaluated in a random topological order."""
    g = nx.DiGraph()
    g.add_nodes_from(rg.ids)
    g.add_edges_from(rg.edges)
    orders = list(itertools.islice(nx.all_topological_sorts(g), 50))
    order = orders[rng.integers(len(orders))]
    c = {}
    for r in order:
        c[r] = 1 - sum(c[a] for a in nx.ancestors(g, r))
    return c


def test_bethe_triangle_counts():
    rg = bethe(triangle_model())
    c = rg.counting_numbers
    pair = [r for r in rg.ids if len(rg[r].vars) == 2]
    single = [r for r in rg.ids if len(rg[r].vars) == 1 and not rg[r].factor_ids]
    assert [c[r] for r in pair] == [1, 1, 1]
    # unary factors are outer regions of their own; without them the nodes have c = -1
    plain = bethe(pairwise_binary_model(3, [(0, 1), (1, 2), (0, 2)], [0.1, 0.2, 0.3]))
    cp = plain.counting_numbers
    assert sorted(cp.values()) == [-1, -1, -1, 1, 1, 1]
    assert total_counting_number(plain) == 0
    assert single


def test_grid_squares_counts():
    rg = grid_boxes(grid_model(4, 4, 0, biases=False), 4, 4, 2, 2)
    by_size = {}
    for rid, c in rg.counting_numbers.items():
        by_size.setdefault(len(rg[rid].vars), []).append(c)
    assert sorted(by_size[4]) == [1] * 9
    assert sorted(by_size[2]) == [-1] * 12
    assert sorted(by_size[1]) == [1] * 4
    assert total_counting_number(rg) == 1
    assert not is_acyclic(rg)


def test_star_k4_counts():
    fg = pairwise_binary_model(4, complete_edges(4), [0.1] * 6)
    rg = star_rg(fg, 1)
    got = sorted((tuple(sorted(rg[r].vars)), c) for r, c in rg.counting_numbers.items())
    assert got == [((0,), 1), ((0, 1), -1), ((0, 1, 2), 1), ((0, 1, 3), 1), ((0, 2), -1), ((0, 2, 3), 1), ((0, 3), -1)]
    assert total_counting_number(rg) == 1


@given(st.integers(0, 10_000))
def test_counting_numbers_match_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 7))
    fg = pairwise_binary_model(n, complete_edges(n), rng.normal(0, 1, n * (n - 1) // 2))
    width = int(rng.integers(1, n - 1))
    for rg in (bethe(fg), star_rg(fg, width, list(rng.permutation(n)))):
        assert counting_numbers(rg) == counting_oracle(rg, rng)


def test_cyclic_graph_rejected():
    a = region(0, [{1, 2}])
    b = region(1, [{1, 2}])
    with pytest.raises(CyclicGraph):
        RegionGraph([a, b], [(0, 1), (1, 0)])


def test_region_invariants():
    with pytest.raises(InvalidRegionGraph):
        Region(0, {1}, [{1, 2}])
    with pytest.raises(InvalidRegionGraph):
        # variable 3 is in no clique or factor
        RegionGraph([Region(0, {1, 2, 3}, [{1, 2}])], [])
    with pytest.raises(InvalidRegionGraph):
        # factor on an inner region
        RegionGraph([region(0, [{1, 2}]), Region(1, {1, 2}, [{1, 2}], {0})], [(0, 1)], {0: (1, 2)})
    with pytest.raises(InvalidRegionGraph):
        RegionGraph([region(0, [{1, 2}])], [], {0: (1, 2)})  # unassigned factor


def test_subsumes_examples():
    assert subsumes(region(0, [{1, 2, 3}]), region(1, [{1, 2}, {3}]))
    assert not subsumes(region(0, [{1, 2}, {2, 3}]), region(1, [{1, 3}]))
    r = region(0, [{1, 2}, {2, 3}])
    assert subsumes(r, r)


clique_sets = st.lists(st.frozensets(st.integers(0, 5), min_size=1, max_size=3), min_size=1, max_size=4)


@given(clique_sets, clique_sets, clique_sets)
def test_subsumes_reflexive_transitive(a, b, c):
    ra, rb, rc = region(0, a), region(1, b), region(2, c)
    assert subsumes(ra, ra)
    if subsumes(ra, rb) and subsumes(rb, rc):
        assert subsumes(ra, rc)


def test_structure_graph_examples():
    g = structure_graph(region(0, [{1, 2}, {2, 3}]))
    assert g == {1: {2}, 2: {1, 3}, 3: {2}}
    g = structure_graph(region(0, [{1, 2, 3}]))
    assert g == {1: {2, 3}, 2: {1, 3}, 3: {1, 2}}
    g = structure_graph(region(0, [], [7], {7: (4, 5)}), {7: (4, 5)})
    assert g == {4: {5}, 5: {4}}


def test_decomposable_examples():
    assert is_decomposable([{1, 2}, {1, 3}, {1, 4}])
    assert not is_decomposable([{1, 2}, {2, 3}, {3, 4}, {4, 1}])
    assert is_decomposable([{1, 2, 3}, {2, 3, 4}])
    # chordal union, but the given sets are not its maximal cliques
    assert not is_decomposable([{1, 2}, {2, 3}, {1, 3}])


@given(st.integers(0, 10_000))
def test_decomposable_matches_networkx(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 8))
    g = nx.gnp_random_graph(n, float(rng.uniform(0.2, 0.8)), seed=int(seed))
    g.add_nodes_from(range(n))
    adj = {v: set(g[v]) for v in g}
    assert chordal.is_chordal(adj) == nx.is_chordal(g)
    if nx.is_chordal(g):
        maximal = [frozenset(c) for c in nx.find_cliques(g)]
        assert set(chordal.mcs_cliques(adj)) == set(maximal)
        assert is_decomposable(maximal)
        tri = chordal.triangulate(adj)
        assert all(tri[v] == adj[v] for v in adj)
    else:
        tri = chordal.triangulate(adj)
        gt = nx.Graph([(u, v) for u in tri for v in tri[u]])
        gt.add_nodes_from(tri)
        assert nx.is_chordal(gt)
        assert all(adj[v] <= tri[v] for v in adj)


def test_is_complete():
    assert is_complete(region(0, [{1, 2, 3}]))
    assert not is_complete(region(0, [{1, 2}, {2, 3}]))


def test_ep_graph_acyclic_total_one():
    fg = grid_model(2, 4, 0)
    rg = ep_graph(fg, fully_factorized_ep_spec(fg))
    assert is_acyclic(rg) and total_counting_number(rg) == 1


def test_validate_bethe_and_broken_variants():
    fg = pairwise_binary_model(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], [0.1] * 5)
    rg = bethe(fg)
    assert validate(rg).overall
    node0 = next(r for r in rg.ids if rg[r].vars == {0} and not rg[r].factor_ids)
    broken = rg.evolve(remove=[node0])
    report = validate(broken)
    assert not report.overall and not report.balanced_per_variable[0]
    assert report.failures()

    bad = RegionGraph([region(0, [{1, 2}]), region(1, [{1, 3}])], [(0, 1)], check_factors=False)
    assert not validate(bad).hierarchy_ok[(0, 1)]


def test_validate_connectedness():
    # two regions containing variable 1 with no link between them
    rg = RegionGraph([region(0, [{1, 2}]), region(1, [{1, 3}])], [])
    report = validate(rg)
    assert not report.connected_per_variable[1]


def test_validate_flags_uncovered_model_variable():
    rg = RegionGraph([region(0, [{0, 1}])], [])
    assert validate(rg).overall
    assert not validate(rg, [0, 1, 2]).overall
