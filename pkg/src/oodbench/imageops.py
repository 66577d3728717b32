"""Small image helpers on (C, H, W) float arrays."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve1d


def bilinear_sample(img, rows, cols):
    """Sample every channel of ``img`` at fractional (rows, cols); outside the frame reads 0."""
    c, h, w = img.shape
    # sub-nanopixel snapping keeps exact grid hits exact (e.g. quarter-turn rotations)
    rows = np.round(rows, 9)
    cols = np.round(cols, 9)
    r0 = np.floor(rows).astype(np.int64)
    c0 = np.floor(cols).astype(np.int64)
    fr = rows - r0
    fc = cols - c0
    out = np.zeros((c,) + rows.shape)
    for dr, wr in ((0, 1.0 - fr), (1, fr)):
        for dc, wc in ((0, 1.0 - fc), (1, fc)):
            rr = r0 + dr
            cc = c0 + dc
            weight = wr * wc
            ok = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w) & (weight != 0)
            vals = np.zeros((c,) + rows.shape)
            vals[:, ok] = img[:, rr[ok], cc[ok]]
            out += vals * weight
    return out


def resize(img, height, width):
    """Bilinear resize with pixel-centre alignment."""
    c, h, w = img.shape
    r = (np.arange(height) + 0.5) * h / height - 0.5
    q = (np.arange(width) + 0.5) * w / width - 0.5
    rows, cols = np.meshgrid(np.clip(r, 0, h - 1), np.clip(q, 0, w - 1), indexing="ij")
    return bilinear_sample(img, rows, cols)


def gaussian_kernel1d(sigma, radius=None):
    if sigma <= 0:
        return np.ones(1)
    if radius is None:
        radius = max(1, int(np.ceil(3.0 * sigma)))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (t / sigma) ** 2)
    return k / k.sum()


def separable_filter(img, kernel):
    """Apply a 1D kernel along rows then columns of every channel (reflect padding)."""
    out = convolve1d(img, kernel, axis=1, mode="reflect")
    return convolve1d(out, kernel, axis=2, mode="reflect")


def total_variation(img):
    return float(np.abs(np.diff(img, axis=-1)).sum() + np.abs(np.diff(img, axis=-2)).sum())


def match_channels(images, channels):
    """Replicate grayscale to RGB or average RGB to grayscale for (N, C, H, W) batches."""
    have = images.shape[1]
    if have == channels:
        return images
    if have == 1:
        return np.repeat(images, channels, axis=1)
    if channels == 1:
        return images.mean(axis=1, keepdims=True)
    raise ValueError(f"cannot convert {have} channels to {channels}")


def match_shape(images, shape):
    """Bring a (N, C, H, W) batch to per-image ``shape`` (channels then spatial size)."""
    c, h, w = shape
    images = match_channels(images, c)
    if images.shape[2:] == (h, w):
        return images
    return np.stack([resize(im, h, w) for im in images])
