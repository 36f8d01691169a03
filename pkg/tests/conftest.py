import itertools
import math

import numpy as np
import pytest
from hypothesis import settings

from srg.factor_graph import Factor, FactorGraph, VariableDecl, pairwise_binary_model

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running experiment checks")


def brute_force(fg):
    """Marginals and log Z by an explicit loop over joint states (independent of exact_inference)."""
    ids = fg.var_ids
    cards = [fg.cardinality(v) for v in ids]
    pos = {v: i for i, v in enumerate(ids)}
    weights = {}
    for x in itertools.product(*(range(k) for k in cards)):
        w = 1.0
        for f in fg.factors:
            w *= float(f.table[tuple(x[pos[v]] for v in f.scope)])
        weights[x] = w
    z = sum(weights.values())
    marg = {v: np.zeros(k) for v, k in zip(ids, cards)}
    for x, w in weights.items():
        for v in ids:
            marg[v][x[pos[v]]] += w / z
    return marg, math.log(z)


def random_tree_model(n, seed, card=2):
    """Random tree (random parent per node) with random positive tables and unary factors."""
    rng = np.random.default_rng(seed)
    variables = [VariableDecl(i, card) for i in range(n)]
    factors = []
    for i in range(1, n):
        p = int(rng.integers(0, i))
        factors.append(Factor(len(factors), (p, i), rng.uniform(0.2, 2.0, (card, card))))
    for i in range(n):
        factors.append(Factor(len(factors), (i,), rng.uniform(0.2, 2.0, card)))
    return FactorGraph(variables, factors)


def triangle_model(seed=0):
    rng = np.random.default_rng(seed)
    return pairwise_binary_model(3, [(0, 1), (1, 2), (0, 2)], rng.normal(0, 0.5, 3), rng.normal(0, 0.5, 3))


def complete_edges(n):
    return list(itertools.combinations(range(n), 2))


@pytest.fixture
def k4_model():
    rng = np.random.default_rng(3)
    return pairwise_binary_model(4, complete_edges(4), rng.normal(0, 0.5, 6), rng.normal(0, 0.5, 4))
