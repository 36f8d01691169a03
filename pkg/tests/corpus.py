"""A fixed corpus of region graphs shared by several test modules."""
import numpy as np

from srg.constructions import (
    EpGraphSpec,
    LoopSpec,
    OuterSpec,
    bethe,
    cluster_variation,
    ep_graph,
    fully_factorized_ep_spec,
    grid_boxes,
    grid_faces,
    loop_graph,
    star_rg,
    tree_ep_spec,
)
from srg.factor_graph import (
    fold_unary_factors,
    grid_model,
    pairwise_binary_model,
    random_bipartite_model,
    random_complete_model,
)
from srg.harness import K23_GROUPS, K23_TREE

from conftest import complete_edges, random_tree_model

K4_TRIANGLES = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
K23_LOOPS = [(0, 2, 1, 3), (0, 2, 1, 4), (0, 3, 1, 4)]


def grid_tree_spec(fg, rows, cols):
    """Comb tree (all rows plus the first column) with one outer region per row gap."""
    v = lambda r, c: r * cols + c
    tree = [(v(r, c), v(r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    tree += [(v(r, 0), v(r + 1, 0)) for r in range(rows - 1)]
    groups = [[(v(k, c), v(k + 1, c)) for c in range(1, cols)] for k in range(rows - 1)]
    return tree_ep_spec(fg, tree, groups)


def ep_corpus():
    """(name, model, EP-graph) triples."""
    out = []
    g24 = grid_model(2, 4, 0)
    out.append(("ep_factorized_grid2x4", g24, ep_graph(g24, fully_factorized_ep_spec(g24))))
    g44 = grid_model(4, 4, 1)
    out.append(("ep_tree_grid4x4", g44, ep_graph(g44, grid_tree_spec(g44, 4, 4))))
    g33 = grid_model(3, 3, 2)
    out.append(("ep_tree_grid3x3", g33, ep_graph(g33, grid_tree_spec(g33, 3, 3))))
    k23 = random_bipartite_model(2, 3, 0)
    out.append(("ep_k23", k23, ep_graph(k23, tree_ep_spec(k23, K23_TREE, K23_GROUPS))))
    k4 = random_complete_model(4, 0)
    out.append(("ep_factorized_k4", k4, ep_graph(k4, fully_factorized_ep_spec(k4))))
    # a star tree base on K5 with each outer region adding one remaining edge
    k5 = random_complete_model(5, 1)
    tree = [(0, i) for i in range(1, 5)]
    rest = [e for e in complete_edges(5) if e[0] != 0]
    out.append(("ep_star_k5", k5, ep_graph(k5, tree_ep_spec(k5, tree, [[e] for e in rest]))))
    # a base of two disjoint blocks, one outer region per factor
    chain = pairwise_binary_model(4, [(0, 1), (1, 2), (2, 3)], [0.3, -0.2, 0.5])
    blocks = (frozenset({0, 1}), frozenset({2, 3}))
    spec = EpGraphSpec(blocks, (OuterSpec((), (0,)), OuterSpec((frozenset({1, 2}),), (1,)), OuterSpec((), (2,))))
    out.append(("ep_blocks_chain", chain, ep_graph(chain, spec)))
    return out


def loop_corpus():
    """(name, model, loop-graph, expected verdict or None)."""
    k4 = fold_unary_factors(random_complete_model(4, 2))
    k23 = fold_unary_factors(random_bipartite_model(2, 3, 1))
    out = [
        ("loops_k4_all", k4, loop_graph(k4, LoopSpec(tuple(K4_TRIANGLES))), "Singular"),
        ("loops_k4_three", k4, loop_graph(k4, LoopSpec(tuple(K4_TRIANGLES[:3]))), "NonSingular"),
        ("loops_k4_none", k4, loop_graph(k4, LoopSpec(())), "NonSingular"),
        ("loops_k23_all", k23, loop_graph(k23, LoopSpec(tuple(K23_LOOPS))), "Singular"),
        ("loops_k23_two", k23, loop_graph(k23, LoopSpec(tuple(K23_LOOPS[:2]))), "NonSingular"),
    ]
    for r, c in ((2, 2), (3, 3), (3, 4), (4, 4)):
        fg = grid_model(r, c, r * c, biases=False)
        out.append((f"faces_{r}x{c}", fg, loop_graph(fg, grid_faces(r, c)), "NonSingular"))
    return out


def ordinary_corpus():
    """(name, model, ordinary region graph) triples from the direct constructions."""
    out = []
    for seed in range(3):
        fg = random_tree_model(6, seed)
        out.append((f"bethe_tree{seed}", fg, bethe(fg)))
    k6 = random_complete_model(6, 0)
    out.append(("bethe_k6", k6, bethe(k6)))
    for w in (1, 2, 3):
        out.append((f"star{w}_k6", k6, star_rg(k6, w)))
    k5 = random_complete_model(5, 3)
    out.append(("star1_k5_order", k5, star_rg(k5, 1, [2, 0, 4, 1, 3])))
    b33 = random_bipartite_model(3, 3, 0)
    out.append(("star1_bipartite3x3", b33, star_rg(b33, 1)))
    out.append(("star2_bipartite3x3", b33, star_rg(b33, 2)))
    g44 = grid_model(4, 4, 0)
    out.append(("squares_4x4", g44, grid_boxes(g44, 4, 4, 2, 2)))
    out.append(("boxes3x3_4x4", g44, grid_boxes(g44, 4, 4, 3, 3)))
    out.append(("boxes3x3_4x4_tri", g44, grid_boxes(g44, 4, 4, 3, 3, triangulate=True)))
    g46 = grid_model(4, 6, 0)
    out.append(("boxes4x3_4x6", g46, grid_boxes(g46, 4, 6, 4, 3)))
    out.append(("cvm_single", k5, cluster_variation(k5, [range(5)])))
    return out


def singular_corpus():
    """(name, model, region graph) known to be singular: stars with one extra region."""
    k6 = random_complete_model(6, 0)
    return [(f"star{w}+1_k6", k6, star_rg(k6, w, extra_clusters=[range(1, w + 3)])) for w in (1, 2, 3)]


def uniform_copy(fg):
    return fg.with_uniform_factors()


def all_graphs():
    out = [(n, fg, rg) for n, fg, rg in ep_corpus()]
    out += [(n, fg, rg) for n, fg, rg, _ in loop_corpus()]
    out += ordinary_corpus()
    out += singular_corpus()
    return out


def rng_for(name):
    return np.random.default_rng(abs(hash(name)) % 2**32)
