"""Textbook sum-product loopy belief propagation on a factor graph.

Kept independent of the region-graph machinery so it can serve as a
reference for GBP on the Bethe region graph.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .factor_graph import FactorGraph


@dataclass
class BpResult:
    marginals: dict[int, np.ndarray]
    converged: bool
    iterations: int


def _normalize(x: np.ndarray) -> np.ndarray:
    return x / x.sum()


def loopy_bp(
    fg: FactorGraph,
    *,
    damping: float = 0.5,
    max_iters: int = 5000,
    tolerance: float = 1e-13,
) -> BpResult:
    """Flooding-schedule sum-product with damped factor-to-variable messages."""
    var_to_f = {(v, f.id): np.full(fg.cardinality(v), 1.0 / fg.cardinality(v)) for f in fg.factors for v in f.scope}
    f_to_var = {(f.id, v): np.full(fg.cardinality(v), 1.0 / fg.cardinality(v)) for f in fg.factors for v in f.scope}
    factors_of = {v: [f for f in fg.factors if v in f.scope] for v in fg.var_ids}
    it = 0
    converged = False
    for it in range(1, max_iters + 1):
        delta = 0.0
        for f in fg.factors:
            for k, v in enumerate(f.scope):
                t = np.array(f.table)
                for j, u in enumerate(f.scope):
                    if j != k:
                        shape = [1] * t.ndim
                        shape[j] = -1
                        t = t * var_to_f[(u, f.id)].reshape(shape)
                axes = tuple(j for j in range(t.ndim) if j != k)
                new = _normalize(t.sum(axis=axes) if axes else t)
                old = f_to_var[(f.id, v)]
                new = (1 - damping) * new + damping * old
                delta = max(delta, float(np.abs(new - old).max()))
                f_to_var[(f.id, v)] = new
        for v in fg.var_ids:
            for f in factors_of[v]:
                msg = np.ones(fg.cardinality(v))
                for g in factors_of[v]:
                    if g.id != f.id:
                        msg = msg * f_to_var[(g.id, v)]
                var_to_f[(v, f.id)] = _normalize(msg)
        if delta < tolerance:
            converged = True
            break
    marginals = {}
    for v in fg.var_ids:
        b = np.ones(fg.cardinality(v))
        for f in factors_of[v]:
            b = b * f_to_var[(f.id, v)]
        marginals[v] = _normalize(b)
    return BpResult(marginals, converged, it)
