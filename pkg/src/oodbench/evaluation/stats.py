"""Friedman test over benchmark rankings and the Nemenyi critical difference."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError

# two-tailed Nemenyi q at alpha = 0.05 (studentized range / sqrt(2)), k = 2..10
NEMENYI_Q05 = {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164}

_EPS = 1e-15
_TINY = 1e-300


def _gamma_series(a, x):
    term = total = 1.0 / a
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_frac(a, x):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    if a <= 0 or x < 0:
        raise ParameterError("gammaincc needs a > 0 and x >= 0")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return _gamma_cont_frac(a, x)


def chi2_sf(x: float, df: int) -> float:
    if x <= 0:
        return 1.0
    return gammaincc(df / 2.0, x / 2.0)


def rank_row(values) -> np.ndarray:
    """Ranks with 1 = largest value; ties share the average of their ranks."""
    v = np.asarray(values, dtype=np.float64)
    order = np.argsort(-v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass
class RankMatrix:
    methods: list
    benchmarks: list
    # (k methods, N benchmarks), higher is better
    values: np.ndarray

    @property
    def ranks(self) -> np.ndarray:
        return np.column_stack([rank_row(self.values[:, j]) for j in range(self.values.shape[1])])

    @property
    def mean_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=1)

    @classmethod
    def from_ranks(cls, ranks, methods=None):
        ranks = np.asarray(ranks, dtype=np.float64)
        methods = methods or [f"m{i}" for i in range(ranks.shape[0])]
        # negated ranks reproduce the same ordering (rank 1 = best)
        return cls(list(methods), [f"b{j}" for j in range(ranks.shape[1])], -ranks)


def friedman_statistic(ranks) -> float:
    ranks = np.asarray(ranks, dtype=np.float64)
    k, n = ranks.shape
    r = ranks.mean(axis=1)
    return 12.0 * n / (k * (k + 1)) * (float(np.sum(r**2)) - k * (k + 1) ** 2 / 4.0)


def friedman(matrix: RankMatrix) -> dict:
    k, n = matrix.values.shape
    if k < 2 or n < 2:
        raise ParameterError(f"Friedman test needs >= 2 methods and >= 2 benchmarks, got {k}x{n}")
    chi2 = friedman_statistic(matrix.ranks)
    # rounding can leave a tiny negative value for all-tied data
    chi2 = max(chi2, 0.0)
    return {"chi2_F": chi2, "df": k - 1, "p_value": chi2_sf(chi2, k - 1)}


def friedman_monte_carlo_p(observed: float, k: int, n: int, n_perm: int = 100_000, seed: int = 0) -> float:
    """P(chi2_F >= observed) under the null, by sampling independent random rankings per benchmark."""
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = 10_000
    done = 0
    while done < n_perm:
        m = min(chunk, n_perm - done)
        ranks = np.argsort(rng.random((m, n, k)), axis=2).argsort(axis=2) + 1.0
        r = ranks.mean(axis=1)
        stat = 12.0 * n / (k * (k + 1)) * ((r**2).sum(axis=1) - k * (k + 1) ** 2 / 4.0)
        hits += int(np.sum(stat >= observed - 1e-9))
        done += m
    return hits / n_perm


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    if alpha != 0.05:
        raise ParameterError("only alpha = 0.05 is tabulated")
    if k not in NEMENYI_Q05:
        raise ParameterError(f"Nemenyi table covers 2..10 methods, got {k}")
    if n < 2:
        raise ParameterError("need at least two benchmarks")
    return NEMENYI_Q05[k] * math.sqrt(k * (k + 1) / (6.0 * n))


def cd_groups(mean_ranks: dict, cd: float) -> list:
    """Maximal runs of methods (sorted by mean rank) whose rank spread is below ``cd``."""
    ordered = sorted(mean_ranks.items(), key=lambda kv: (kv[1], kv[0]))
    groups = []
    last_end = -1
    for i in range(len(ordered)):
        j = i
        while j + 1 < len(ordered) and ordered[j + 1][1] - ordered[i][1] < cd:
            j += 1
        if j > i and j > last_end:
            groups.append([name for name, _ in ordered[i : j + 1]])
            last_end = j
    return groups
