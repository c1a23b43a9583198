"""The 15 manual account features.

Only TRANS edges feed the statistics, so a node gets the same features in the
heterogeneous graph and in its homogeneous projection. Amount aggregates are
computed with Python integers and converted to float once per feature.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import NegativeValue
from .matrix import FeatureMatrix
from .graph import IN, OUT


def gini(values) -> float:
    """Gini coefficient, ``sum_ij |x_i - x_j| / (2 n^2 mean)``.

    Returns 0.0 for an empty or all-zero input. Integer input is evaluated
    exactly and rounded once.
    """
    xs = sorted(values)
    n = len(xs)
    if n == 0:
        return 0.0
    if xs[0] < 0:
        raise NegativeValue(f"gini of negative value {xs[0]}")
    exact = all(isinstance(x, (int, np.integer)) for x in xs)
    if exact:
        xs = [int(x) for x in xs]
        total = sum(xs)
        if total == 0:
            return 0.0
        # sorted-rank identity: sum_ij |xi - xj| = 2 * sum_i (2i - n - 1) x_(i)
        num = sum((2 * i - n - 1) * x for i, x in enumerate(xs, start=1))
        return num / (n * total)
    xs = [float(x) for x in xs]
    total = math.fsum(xs)
    if total == 0.0:
        return 0.0
    num = math.fsum((2 * i - n - 1) * x for i, x in enumerate(xs, start=1))
    return min(max(num / (n * total), 0.0), 1.0)


def _stats(amounts: list[int]) -> tuple[float, float, float, float]:
    n = len(amounts)
    if n == 0:
        return 0.0, 0.0, 0.0, 0.0
    total = sum(amounts)
    sq = sum(a * a for a in amounts)
    # population variance as one exact rational
    var = (n * sq - total * total) / (n * n)
    return float(total), total / n, float(max(amounts)), var


@dataclass(frozen=True)
class ManualFeatures:
    income_total: float
    income_avg: float
    income_max: float
    income_var: float
    expend_total: float
    expend_avg: float
    expend_max: float
    expend_var: float
    expend_income_ratio: float
    balance: float
    n_sent: int
    n_received: int
    gini_invest: float
    gini_return: float
    lifecycle: int

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


FEATURE_NAMES = tuple(f.name for f in fields(ManualFeatures))


def account_features(g, v: str) -> ManualFeatures:
    """Manual features of account ``v`` in a HetGraph or HomGraph."""
    i = g.node_index(v)
    return _features_at(g, i)


def _features_at(g, i: int) -> ManualFeatures:
    amounts, stamps = g.trans_amounts, g.trans_timestamps
    in_e = g.trans_incidence(i, IN)
    out_e = g.trans_incidence(i, OUT)
    income = [amounts[e] for e in in_e]
    expend = [amounts[e] for e in out_e]
    inc_total, expend_total = sum(income), sum(expend)
    touched = np.concatenate([stamps[in_e], stamps[out_e]])
    lifecycle = int(touched.max() - touched.min()) if len(touched) >= 2 else 0
    return ManualFeatures(
        *_stats(income),
        *_stats(expend),
        expend_total / inc_total if inc_total else 0.0,
        float(inc_total - expend_total),
        len(expend),
        len(income),
        gini(income),
        gini(expend),
        lifecycle,
    )


def feature_matrix(g, nodes=None) -> FeatureMatrix:
    """Rows of manual features in the order of ``nodes`` (all graph nodes by default)."""
    nodes = list(g.ids) if nodes is None else list(nodes)
    idx = [g.node_index(v) for v in nodes]
    cache: dict[int, np.ndarray] = {}
    rows = np.zeros((len(nodes), len(FEATURE_NAMES)))
    for r, i in enumerate(idx):
        if i not in cache:
            cache[i] = _features_at(g, i).as_array()
        rows[r] = cache[i]
    return FeatureMatrix(nodes, rows, "f")
