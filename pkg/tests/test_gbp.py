import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srg import gbp
from srg.bp import loopy_bp
from srg.constructions import bethe, cluster_variation, ep_graph, fully_factorized_ep_spec, grid_boxes, star_rg
from srg.errors import NonCompleteInnerRegion, ShapeMismatch, UncoveredVariable
from srg.factor_graph import exact_inference, grid_model, random_bipartite_model, random_complete_model
from srg.reductions import nonsingular_general, reduce_to_ordinary
from srg.region_graph import Region, RegionGraph, is_acyclic

from conftest import brute_force, random_tree_model
from corpus import all_graphs


def run(rg, fg, **kw):
    return gbp.run_gbp(rg, fg, gbp.GbpConfig(**kw))


@settings(max_examples=15)
@given(st.integers(2, 12), st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_tree_exactness(n, seed, card):
    fg = random_tree_model(n, seed, card)
    rg = bethe(fg)
    res = run(rg, fg)
    assert res.converged
    exact = exact_inference(fg)
    marg = gbp.node_marginals(rg, res.beliefs, fg.var_ids)
    assert gbp.max_marginal_error(marg, exact.marginals) < 1e-9
    assert res.free_energy == pytest.approx(-exact.log_partition, abs=1e-9)


def test_acyclic_box_graph_is_exact():
    fg = grid_model(4, 6, 3, strength=0.5)
    rg = grid_boxes(fg, 4, 6, 4, 3)
    assert is_acyclic(rg)
    res = run(rg, fg)
    exact = exact_inference(fg)
    marg, log_z = exact.marginals, exact.log_partition
    assert res.converged
    assert gbp.max_marginal_error(gbp.node_marginals(rg, res.beliefs), marg) < 1e-9
    assert res.free_energy == pytest.approx(-log_z, abs=1e-9)


def test_single_region_is_exact():
    fg = random_complete_model(5, 2, "minka_qi")
    rg = cluster_variation(fg, [range(5)])
    res = run(rg, fg)
    marg, log_z = brute_force(fg)
    assert gbp.max_marginal_error(gbp.node_marginals(rg, res.beliefs), marg) < 1e-12
    assert res.free_energy == pytest.approx(-log_z, abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_bethe_matches_loopy_bp(seed):
    fg = random_complete_model(6, seed, "gaussian")
    rg = bethe(fg)
    res = run(rg, fg, tolerance=1e-12)
    bp = loopy_bp(fg)
    assert res.converged and bp.converged
    marg = gbp.node_marginals(rg, res.beliefs)
    assert gbp.max_marginal_error(marg, bp.marginals) < 1e-9


def test_factorized_ep_reduction_matches_loopy_bp():
    fg = grid_model(2, 4, 1)
    rg = reduce_to_ordinary(ep_graph(fg, fully_factorized_ep_spec(fg)))
    res = run(rg, fg, tolerance=1e-12)
    assert gbp.max_marginal_error(gbp.node_marginals(rg, res.beliefs), loopy_bp(fg).marginals) < 1e-9


def nonsingular_ordinary():
    out = []
    for name, fg, rg in all_graphs():
        if not nonsingular_general(rg).nonsingular:
            continue
        if any(not rg[r].is_complete for r in rg.inner_ids):
            rg = reduce_to_ordinary(rg)
        out.append((name, fg, rg))
    return out


@pytest.mark.parametrize("name,fg,rg", nonsingular_ordinary()[::3], ids=lambda x: x if isinstance(x, str) else "")
def test_uniform_factors_give_uniform_beliefs(name, fg, rg):
    uni = fg.with_uniform_factors()
    for seed in range(3):
        res = run(rg, uni, init="random", seed=seed)
        assert res.converged
        dev = max(float(np.abs(q - 1.0 / q.size).max()) for q in res.beliefs.values())
        assert dev < 1e-8


def test_free_energy_uniform_single_region():
    fg = random_complete_model(3, 0, biases=False).with_uniform_factors()
    rg = cluster_variation(fg, [range(3)])
    q = {rg.ids[0]: np.full((2, 2, 2), 1 / 8)}
    assert gbp.free_energy(rg, fg, q) == pytest.approx(-math.log(8))
    with pytest.raises(ShapeMismatch):
        gbp.free_energy(rg, fg, {rg.ids[0]: np.full((2, 2), 0.25)})


def exact_region_beliefs(rg, fg):
    """Region marginals of the exact joint."""
    ids = fg.var_ids
    joint = np.ones([2] * len(ids))
    for f in fg.factors:
        shape = [1] * len(ids)
        order = sorted(range(len(f.scope)), key=lambda k: f.scope[k])
        for k in order:
            shape[ids.index(f.scope[k])] = 2
        joint = joint * np.transpose(f.table, order).reshape(shape)
    joint /= joint.sum()
    out = {}
    for r in rg.ids:
        keep = sorted(rg[r].vars)
        out[r] = joint.sum(axis=tuple(i for i, v in enumerate(ids) if v not in keep))
    return out


def test_constraint_residual_examples():
    fg = random_complete_model(5, 1)
    rg = star_rg(fg, 1)
    assert gbp.constraint_residual(rg, exact_region_beliefs(rg, fg)) < 1e-15
    uniform = {r: np.full([2] * len(rg[r].vars), 0.5 ** len(rg[r].vars)) for r in rg.ids}
    assert gbp.constraint_residual(rg, uniform) == 0.0
    two = RegionGraph([Region(0, {0, 1}, [{0, 1}]), Region(1, {1}, [{1}])], [(0, 1)])
    qp = np.array([[0.1, 0.2], [0.3, 0.4]])
    qc = np.array([0.5, 0.5])
    # parent marginal on variable 1 is [0.4, 0.6]
    assert gbp.constraint_residual(two, {0: qp, 1: qc}) == pytest.approx(0.1)


def test_converged_results_are_consistent():
    fg = random_complete_model(6, 4)
    for rg in (bethe(fg), star_rg(fg, 1), star_rg(fg, 2)):
        res = run(rg, fg)
        assert res.converged
        assert res.max_constraint_residual <= 10 * 1e-10
        for q in res.beliefs.values():
            assert abs(q.sum() - 1) < 1e-12 and np.all(q >= 0)
        # regions containing a variable agree up to the residual times a path length in RG(v)
        for v in fg.var_ids:
            holders = rg.regions_containing(v)
            ms = [gbp._marginal_on(res.beliefs[r], tuple(sorted(rg[r].vars)), {v}) for r in holders]
            spread = max(float(np.abs(m - ms[0]).max()) for m in ms)
            assert spread <= len(holders) * res.max_constraint_residual + 1e-14


def test_damping_does_not_move_fixed_point():
    fg = random_complete_model(6, 5)
    rg = star_rg(fg, 1)
    a = run(rg, fg, damping=0.3)
    b = run(rg, fg, damping=0.7)
    ma, mb = gbp.node_marginals(rg, a.beliefs), gbp.node_marginals(rg, b.beliefs)
    assert gbp.max_marginal_error(ma, mb) < 1e-8
    assert a.free_energy == pytest.approx(b.free_energy, abs=1e-8)


def test_random_schedule_same_fixed_point():
    fg = random_complete_model(6, 6)
    rg = star_rg(fg, 2)
    a = run(rg, fg)
    b = run(rg, fg, schedule="random_permutation", seed=3)
    assert b.converged
    assert gbp.max_marginal_error(gbp.node_marginals(rg, a.beliefs), gbp.node_marginals(rg, b.beliefs)) < 1e-8
    c = run(rg, fg, schedule="random_permutation", seed=3)
    assert c.iterations == b.iterations and c.free_energy == b.free_energy


@given(st.floats(0.01, 100.0), st.integers(0, 20))
@settings(max_examples=10)
def test_factor_scaling(const, fid):
    fg = random_complete_model(5, 7)
    rg = star_rg(fg, 1)
    res = run(rg, fg)
    scaled = fg.scale_factor(fid % len(fg.factors), const)
    owner = next(r for r in rg.ids if fid % len(fg.factors) in rg[r].factor_ids)
    shift = -rg.counting_numbers[owner] * math.log(const)
    assert gbp.free_energy(rg, scaled, res.beliefs) == pytest.approx(res.free_energy + shift, abs=1e-9)
    res2 = run(rg, scaled)
    assert gbp.max_marginal_error(gbp.node_marginals(rg, res.beliefs), gbp.node_marginals(rg, res2.beliefs)) < 1e-8


def test_star_beats_bethe_on_a_few_seeds():
    errs = {"bethe": [], "star1": []}
    for seed in range(5):
        fg = random_complete_model(6, seed)
        exact = exact_inference(fg).marginals
        for name, rg in (("bethe", bethe(fg)), ("star1", star_rg(fg, 1))):
            res = run(rg, fg)
            errs[name].append(gbp.max_marginal_error(gbp.node_marginals(rg, res.beliefs), exact))
    assert np.mean(errs["star1"]) < np.mean(errs["bethe"])


def test_node_marginal_region_choice():
    fg = random_complete_model(4, 0)
    rg = star_rg(fg, 1)
    # variable 0 lives in the root node region at the bottom of the graph
    r = gbp.marginal_region(rg, 0)
    assert rg[r].vars == {0}
    with pytest.raises(UncoveredVariable):
        gbp.marginal_region(rg, 99)


def test_engine_rejects_structured_graphs():
    fg = grid_model(2, 4, 0)
    with pytest.raises(NonCompleteInnerRegion):
        run(ep_graph(fg, fully_factorized_ep_spec(fg)), fg)


def test_config_validation():
    for bad in ({"damping": 1.0}, {"tolerance": 0.0}, {"max_iters": 0}, {"schedule": "x"}, {"init": "x"}):
        with pytest.raises(ValueError):
            gbp.GbpConfig(**bad)


def test_nonconvergence_is_flagged():
    fg = random_bipartite_model(3, 3, 0, "minka_qi", strength=3.0)
    res = run(bethe(fg), fg, max_iters=3)
    assert not res.converged and res.iterations == 3
    assert len(res.deltas) == 3
