"""Procedural shape datasets for desk-scale benchmarks.

``shapes`` draws ten geometric classes; ``foreign_shapes`` draws five other
classes used as novelty data. Every image is a single 28x28 grayscale channel
with seeded jitter in position, scale, rotation, intensity and background noise.
"""

from __future__ import annotations

import numpy as np

SUPERSAMPLE = 2


def _disk(u, v):
    return u * u + v * v < 0.36


def _ring(u, v):
    r2 = u * u + v * v
    return (r2 > 0.16) & (r2 < 0.45)


def _square(u, v):
    return (np.abs(u) < 0.5) & (np.abs(v) < 0.5)


def _square_outline(u, v):
    a = np.maximum(np.abs(u), np.abs(v))
    return (a < 0.6) & (a > 0.38)


def _triangle(u, v):
    return (v < 0.5) & (v > 1.6 * np.abs(u) - 0.6)


def _plus(u, v):
    return ((np.abs(u) < 0.16) & (np.abs(v) < 0.7)) | ((np.abs(v) < 0.16) & (np.abs(u) < 0.7))


def _cross(u, v):
    inside = (np.abs(u) < 0.65) & (np.abs(v) < 0.65)
    return inside & ((np.abs(u - v) < 0.22) | (np.abs(u + v) < 0.22))


def _bars(u, v):
    return (np.abs(u) < 0.7) & ((np.abs(v - 0.35) < 0.13) | (np.abs(v + 0.35) < 0.13))


def _ell(u, v):
    return ((np.abs(u + 0.45) < 0.15) & (np.abs(v) < 0.7)) | ((np.abs(v - 0.55) < 0.15) & (u > -0.6) & (u < 0.6))


def _diamond(u, v):
    return np.abs(u) + np.abs(v) < 0.65


def _checker(u, v):
    inside = (np.abs(u) < 0.6) & (np.abs(v) < 0.6)
    return inside & ((np.floor(u / 0.3) + np.floor(v / 0.3)) % 2 == 0)


def _dots(u, v):
    out = np.zeros_like(u, dtype=bool)
    for cu in (-0.45, 0.0, 0.45):
        for cv in (-0.45, 0.0, 0.45):
            out |= (u - cu) ** 2 + (v - cv) ** 2 < 0.018
    return out


def _crescent(u, v):
    return (u * u + v * v < 0.42) & ((u - 0.3) ** 2 + v * v > 0.3)


def _star(u, v):
    r = np.sqrt(u * u + v * v)
    theta = np.arctan2(v, u)
    return r < 0.3 + 0.35 * np.abs(np.cos(2.5 * theta))


def _spiral(u, v):
    r = np.sqrt(u * u + v * v)
    theta = np.arctan2(v, u)
    phase = (r * 12.0 - theta) % (2 * np.pi)
    return (r < 0.75) & (phase < 2.2)


SHAPES = (_disk, _ring, _square, _square_outline, _triangle, _plus, _cross, _bars, _ell, _diamond)
FOREIGN_SHAPES = (_checker, _dots, _crescent, _star, _spiral)


def _render(fn, rng, size):
    n = size * SUPERSAMPLE
    t = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    y, x = np.meshgrid(t, t, indexing="ij")
    scale = rng.uniform(0.75, 1.05)
    angle = rng.uniform(-0.25, 0.25)
    dx, dy = rng.uniform(-0.15, 0.15, size=2)
    cos, sin = np.cos(angle), np.sin(angle)
    xs, ys = (x - dx) / scale, (y - dy) / scale
    u = cos * xs + sin * ys
    v = -sin * xs + cos * ys
    mask = fn(u, v).astype(np.float64)
    mask = mask.reshape(size, SUPERSAMPLE, size, SUPERSAMPLE).mean(axis=(1, 3))
    fg = rng.uniform(0.7, 1.0)
    bg = rng.uniform(0.0, 0.15)
    img = bg + (fg - bg) * mask + rng.normal(0.0, 0.03, size=mask.shape)
    return np.clip(img, 0.0, 1.0)


def _generate(fns, n_per_class, size, seed):
    rng = np.random.default_rng(seed)
    images = np.empty((n_per_class * len(fns), 1, size, size))
    labels = np.repeat(np.arange(len(fns)), n_per_class)
    for i, lab in enumerate(labels):
        images[i, 0] = _render(fns[lab], rng, size)
    return images, labels


def shapes(n_per_class: int = 600, size: int = 28, seed: int = 0):
    """Ten-class in-distribution shape dataset as ``(images (N, 1, size, size), labels)``."""
    return _generate(SHAPES, n_per_class, size, seed)


def foreign_shapes(n_per_class: int = 200, size: int = 28, seed: int = 1):
    """Five shape classes disjoint from :func:`shapes`, for novelty benchmarks."""
    return _generate(FOREIGN_SHAPES, n_per_class, size, seed)
