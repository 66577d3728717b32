"""Seeded k-means (k-means++ initialisation, Lloyd iterations) and elbow selection."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError

MAX_ITER = 300
# knee strength below which the SSE curve is treated as having no elbow
MIN_KNEE = 0.5


@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    sse: float
    n_iter: int


def _sq_dists(points, centroids):
    return ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=-1)


def _kmeans_pp(points, k, rng):
    n = len(points)
    centroids = [points[rng.integers(n)]]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # every point already coincides with a centroid
            idx = rng.integers(n)
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids.append(points[idx])
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return np.array(centroids, dtype=np.float64)


def kmeans(points, k: int, seed: int = 0, max_iter: int = MAX_ITER) -> KMeansResult:
    """Cluster ``points`` (n, d) into ``k`` groups.

    Iterates until the assignment no longer changes or ``max_iter`` is reached.
    A cluster that becomes empty is re-seeded at the point farthest from its
    current centroid.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp(points, k, rng)
    assign = np.full(n, -1)
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dists(points, centroids)
        new_assign = d2.argmin(axis=1)
        counts = np.bincount(new_assign, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            own = d2[np.arange(n), new_assign]
            far = int(own.argmax())
            new_assign[far] = empty
            centroids[empty] = points[far]
            d2[far] = _sq_dists(points[far : far + 1], centroids)[0]
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            centroids[j] = points[assign == j].mean(axis=0)
    sse = float(((points - centroids[assign]) ** 2).sum())
    return KMeansResult(centroids, assign, sse, it)


def sse_curve(points, k_values, seed=0):
    return np.array([kmeans(points, int(k), seed).sse for k in k_values])


def knee_distances(k_values, sse):
    """Perpendicular distance of each (k, SSE) point to the chord joining the endpoints.

    Both axes are rescaled to [0, 1] first; this does not change the argmax.
    """
    k = np.asarray(k_values, dtype=np.float64)
    s = np.asarray(sse, dtype=np.float64)
    kn = (k - k[0]) / (k[-1] - k[0])
    span = s[0] - s[-1]
    if span <= 0:
        return np.zeros_like(k)
    sn = (s - s[-1]) / span
    # chord from (0, 1) to (1, 0): x + y - 1 = 0
    return np.abs(kn + sn - 1.0) / np.sqrt(2.0)


def elbow_k(points, k_range, seed: int = 0, min_knee: float = MIN_KNEE) -> int:
    """Pick k at the knee of the SSE curve; falls back to the smallest k without a clear knee."""
    k_values = sorted(int(k) for k in k_range)
    n = len(points)
    if not k_values or k_values[0] < 1 or k_values[-1] > n:
        raise ParameterError(f"k_range must lie within [1, {n}]")
    if len(k_values) < 3:
        warnings.warn("elbow analysis needs at least three k values; using the smallest", UserWarning)
        return k_values[0]
    sse = sse_curve(points, k_values, seed)
    dist = knee_distances(k_values, sse)
    if sse[0] <= 0 or dist.max() < min_knee * np.sqrt(0.5):
        warnings.warn("SSE curve has no pronounced elbow; using the smallest k", UserWarning)
        return k_values[0]
    return k_values[int(dist.argmax())]
