"""Seeded image corruptions on (C, H, W) arrays in [0, 1].

Severity tables are this package's own constants (indexed 1..5); they are
recorded in every benchmark manifest through :meth:`FaultTemplate.resolved_params`.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve

from ..errors import ParameterError
from ..imageops import bilinear_sample, gaussian_kernel1d, separable_filter

NOISE_SIGMA = {1: 0.04, 2: 0.06, 3: 0.08, 4: 0.09, 5: 0.10}
GAUSSIAN_BLUR_SIGMA = {1: 0.5, 2: 0.75, 3: 1.0, 4: 1.5, 5: 2.0}
ZOOM_STEP = 0.04
# (blur sigma, swap radius, swap passes)
GLASS = {1: (0.5, 1, 1), 2: (0.6, 1, 2), 3: (0.7, 2, 1), 4: (0.8, 2, 2), 5: (0.9, 3, 2)}
# (speck density, motion-blur length)
SNOW = {1: (0.01, 3), 2: (0.02, 4), 3: (0.03, 5), 4: (0.045, 6), 5: (0.06, 7)}
FOG_WEIGHT = {1: 0.15, 2: 0.25, 3: 0.35, 4: 0.45, 5: 0.55}
FOG_ROUGHNESS = 0.6
PIXEL_TRAP_FRACTION = {1: 0.1, 2: 0.2, 3: 0.3, 4: 0.45, 5: 0.6}
ROW_ADD_OFFSET = {1: 1, 2: 2, 3: 3, 4: 4, 5: 5}
SHIFT_MAX = {1: 1, 2: 2, 3: 3, 4: 5, 5: 7}


def check_severity(severity):
    if severity not in (1, 2, 3, 4, 5):
        raise ParameterError(f"severity must be an integer in 1..5, got {severity!r}")
    return int(severity)


def _as_image(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ParameterError(f"expected a (C, H, W) image, got shape {x.shape}")
    return x


# -- noise ------------------------------------------------------------------


def gaussian_noise(x, severity=1, seed=0, sigma=None):
    x = _as_image(x)
    if sigma is None:
        sigma = NOISE_SIGMA[check_severity(severity)]
    rng = np.random.default_rng(seed)
    return np.clip(x + rng.normal(0.0, sigma, size=x.shape), 0.0, 1.0)


# -- blur -------------------------------------------------------------------


def gaussian_blur(x, severity=1, sigma=None):
    x = _as_image(x)
    if sigma is None:
        sigma = GAUSSIAN_BLUR_SIGMA[check_severity(severity)]
    k = gaussian_kernel1d(sigma)
    if len(k) > min(x.shape[1:]):
        raise ParameterError(f"blur kernel of width {len(k)} exceeds image size {x.shape[1:]}")
    return np.clip(separable_filter(x, k), 0.0, 1.0)


def zoom_blur(x, severity=1, max_zoom=None):
    """Average of centre crops rescaled by factors from 1 to ``max_zoom`` in 0.01 steps."""
    x = _as_image(x)
    if max_zoom is None:
        max_zoom = 1.0 + ZOOM_STEP * check_severity(severity)
    _, h, w = x.shape
    rc, cc = (h - 1) / 2.0, (w - 1) / 2.0
    rows, cols = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    factors = np.linspace(1.0, max_zoom, int(round((max_zoom - 1.0) / 0.01)) + 1)
    acc = np.zeros_like(x)
    for z in factors:
        acc += bilinear_sample(x, rc + (rows - rc) / z, cc + (cols - cc) / z)
    return np.clip(acc / len(factors), 0.0, 1.0)


def glass_blur(x, severity=1, seed=0):
    """Seeded local pixel swaps within a radius, then a gaussian blur."""
    x = _as_image(x)
    sigma, radius, passes = GLASS[check_severity(severity)]
    k = gaussian_kernel1d(sigma)
    if len(k) > min(x.shape[1:]) or 2 * radius + 1 > min(x.shape[1:]):
        raise ParameterError(f"glass blur footprint exceeds image size {x.shape[1:]}")
    rng = np.random.default_rng(seed)
    out = np.array(x)
    _, h, w = x.shape
    for _ in range(passes):
        offsets = rng.integers(-radius, radius + 1, size=(h, w, 2))
        for r in range(h):
            for c in range(w):
                r2 = min(max(r + offsets[r, c, 0], 0), h - 1)
                c2 = min(max(c + offsets[r, c, 1], 0), w - 1)
                tmp = out[:, r, c].copy()
                out[:, r, c] = out[:, r2, c2]
                out[:, r2, c2] = tmp
    return np.clip(separable_filter(out, k), 0.0, 1.0)


def blur(x, variant="gaussian", severity=1, seed=0):
    if variant == "gaussian":
        return gaussian_blur(x, severity)
    if variant == "zoom":
        return zoom_blur(x, severity)
    if variant == "glass":
        return glass_blur(x, severity, seed)
    raise ParameterError(f"unknown blur variant {variant!r}")


# -- weather ----------------------------------------------------------------


def _motion_kernel(length, angle):
    size = length if length % 2 else length + 1
    k = np.zeros((size, size))
    c = size // 2
    for t in np.linspace(-(length - 1) / 2.0, (length - 1) / 2.0, length):
        r = int(round(c - t * np.sin(angle)))
        q = int(round(c + t * np.cos(angle)))
        k[r, q] += 1.0
    return k / k.sum()


def snow(x, severity=1, seed=0, density=None):
    """Bright specks at a given density, smeared along a seeded direction and added on top."""
    x = _as_image(x)
    s = check_severity(severity)
    dens, length = SNOW[s]
    if density is not None:
        dens = density
    rng = np.random.default_rng(seed)
    _, h, w = x.shape
    specks = (rng.random((h, w)) < dens) * rng.uniform(0.7, 1.0, size=(h, w))
    angle = rng.uniform(-np.pi, np.pi)
    layer = convolve(specks, _motion_kernel(length, angle), mode="constant")
    layer = np.clip(layer * length * 0.8, 0.0, 1.0)
    return np.clip(x + layer[None], 0.0, 1.0)


def plasma(size_hw, seed=0, roughness=FOG_ROUGHNESS):
    """Diamond-square fractal field cropped to ``size_hw`` and scaled to [0, 1]."""
    h, w = size_hw
    n = 1
    while n + 1 < max(h, w):
        n *= 2
    n_side = n + 1
    rng = np.random.default_rng(seed)
    f = np.zeros((n_side, n_side))
    f[0, 0], f[0, n], f[n, 0], f[n, n] = rng.uniform(0.0, 1.0, size=4)
    step = n
    amp = 1.0
    while step > 1:
        half = step // 2
        # diamond step: centres of squares
        for r in range(half, n_side, step):
            for c in range(half, n_side, step):
                avg = (f[r - half, c - half] + f[r - half, c + half] + f[r + half, c - half] + f[r + half, c + half]) / 4
                f[r, c] = avg + rng.uniform(-amp, amp) * 0.5
        # square step: edge midpoints
        for r in range(0, n_side, half):
            for c in range((r + half) % step, n_side, step):
                vals = [f[rr, cc] for rr, cc in ((r - half, c), (r + half, c), (r, c - half), (r, c + half)) if 0 <= rr < n_side and 0 <= cc < n_side]
                f[r, c] = sum(vals) / len(vals) + rng.uniform(-amp, amp) * 0.5
        step = half
        amp *= roughness
    f = f[:h, :w]
    lo, hi = f.min(), f.max()
    return (f - lo) / (hi - lo) if hi > lo else np.full((h, w), 0.5)


def fog(x, severity=1, seed=0, weight=None):
    x = _as_image(x)
    if weight is None:
        weight = FOG_WEIGHT[check_severity(severity)]
    field = plasma(x.shape[1:], seed)
    return np.clip((1.0 - weight) * x + weight * field[None], 0.0, 1.0)


def weather(x, variant="snow", severity=1, seed=0):
    if variant == "snow":
        return snow(x, severity, seed)
    if variant == "fog":
        return fog(x, severity, seed)
    raise ParameterError(f"unknown weather variant {variant!r}")


# -- geometric / photometric --------------------------------------------------


def rotate(x, angle):
    """Counter-clockwise rotation (degrees) about the image centre; uncovered pixels are 0."""
    x = _as_image(x)
    if not -180.0 < angle <= 180.0:
        raise ParameterError(f"rotation angle must be in (-180, 180], got {angle}")
    _, h, w = x.shape
    rc, cc = (h - 1) / 2.0, (w - 1) / 2.0
    t = np.deg2rad(angle)
    cos, sin = np.cos(t), np.sin(t)
    rows, cols = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    # output pixel (xo, yo) in a y-up frame comes from R(-t) applied to it
    xo, yo = cols - cc, rc - rows
    xs = cos * xo + sin * yo
    ys = -sin * xo + cos * yo
    return np.clip(bilinear_sample(x, rc - ys, cc + xs), 0.0, 1.0)


def brightness(x, delta):
    if not -1.0 <= delta <= 1.0:
        raise ParameterError(f"brightness delta must be in [-1, 1], got {delta}")
    return np.clip(_as_image(x) + delta, 0.0, 1.0)


def contrast(x, factor):
    if not factor > 0:
        raise ParameterError(f"contrast factor must be positive, got {factor}")
    return np.clip(0.5 + (_as_image(x) - 0.5) * factor, 0.0, 1.0)


def geometric_photometric(x, variant, param):
    if variant == "rotate":
        return rotate(x, param)
    if variant == "brightness":
        return brightness(x, param)
    if variant == "contrast":
        return contrast(x, param)
    raise ParameterError(f"unknown geometric/photometric variant {variant!r}")


# -- anomalies --------------------------------------------------------------


def pixel_trap(x, severity=1, seed=0, fraction=None):
    """Black out a seeded random subset of rows."""
    x = _as_image(x)
    if fraction is None:
        fraction = PIXEL_TRAP_FRACTION[check_severity(severity)]
    _, h, _ = x.shape
    rng = np.random.default_rng(seed)
    rows = rng.choice(h, size=int(round(fraction * h)), replace=False)
    out = np.array(x)
    out[:, rows, :] = 0.0
    return out


def row_add_logic(x, severity=1, seed=0):
    """Saturating add of each row onto the row ``severity`` positions below it."""
    x = _as_image(x)
    k = ROW_ADD_OFFSET[check_severity(severity)]
    out = np.array(x)
    if k < x.shape[1]:
        out[:, k:, :] = np.clip(x[:, k:, :] + x[:, :-k, :], 0.0, 1.0)
    return out


def shifted_pixel(x, severity=1, seed=0, max_shift=None):
    """Circularly shift each row horizontally by a seeded offset in [-d, d]."""
    x = _as_image(x)
    if max_shift is None:
        max_shift = SHIFT_MAX[check_severity(severity)]
    _, h, _ = x.shape
    rng = np.random.default_rng(seed)
    shifts = rng.integers(-max_shift, max_shift + 1, size=h)
    out = np.empty_like(x)
    for r in range(h):
        out[:, r, :] = np.roll(x[:, r, :], shifts[r], axis=-1)
    return out


def anomaly(x, variant, severity=1, seed=0):
    if variant == "pixel_trap":
        return pixel_trap(x, severity, seed)
    if variant == "row_add_logic":
        return row_add_logic(x, severity, seed)
    if variant == "shifted_pixel":
        return shifted_pixel(x, severity, seed)
    raise ParameterError(f"unknown anomaly variant {variant!r}")
