"""Deterministic image resampling: Gaussian blur and bicubic resize.

These are the reference operators for producing low-resolution inputs and
for the bicubic comparison baseline, so they are implemented here rather
than delegated to an image library: results must be bit-reproducible
across runs and documented well enough to reimplement.  Everything runs in
float64 and is fully separable.

Bicubic uses the standard two-piece cubic kernel with a = -0.5:

    k(t) = (a+2)|t|^3 - (a+3)|t|^2 + 1          for |t| <= 1
         = a|t|^3 - 5a|t|^2 + 8a|t| - 4a        for 1 < |t| < 2
         = 0                                     otherwise

Source positions map through the half-pixel convention
u = (j + 0.5) * src/dst - 0.5; four taps at floor(u)-1 .. floor(u)+2 are
clamped to the image (border replication) and their weights renormalized
to sum to 1.  Axis 0 is resampled before axis 1.
"""

import math

import numpy as np
from scipy.ndimage import correlate1d

BICUBIC_A = -0.5


def bicubic_kernel(t, a=BICUBIC_A):
    t = np.abs(np.asarray(t, dtype=np.float64))
    out = np.zeros_like(t)
    near = t <= 1.0
    mid = (t > 1.0) & (t < 2.0)
    out[near] = (a + 2.0) * t[near] ** 3 - (a + 3.0) * t[near] ** 2 + 1.0
    out[mid] = a * t[mid] ** 3 - 5.0 * a * t[mid] ** 2 + 8.0 * a * t[mid] - 4.0 * a
    return out


def _axis_taps(src, dst):
    j = np.arange(dst, dtype=np.float64)
    u = (j + 0.5) * (src / dst) - 0.5
    base = np.floor(u).astype(np.int64)
    idx = base[:, None] + np.arange(-1, 3)[None, :]
    weights = bicubic_kernel(u[:, None] - idx)
    weights = weights / weights.sum(axis=1, keepdims=True)
    return np.clip(idx, 0, src - 1), weights


def _resample_axis0(img, out_n):
    idx, w = _axis_taps(img.shape[0], out_n)
    return np.einsum("ot,ot...->o...", w, img[idx])


def bicubic_resize(img, out_h, out_w):
    """Resize [H, W, ...] to [out_h, out_w, ...]; float64 output."""
    img = np.asarray(img, dtype=np.float64)
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"cannot resize empty image {img.shape}")
    if out_h < 1 or out_w < 1:
        raise ValueError(f"target size {out_h}x{out_w} must be positive")
    img = _resample_axis0(img, out_h)
    return np.swapaxes(_resample_axis0(np.swapaxes(img, 0, 1), out_w), 0, 1)


def gaussian_taps(sigma):
    """Normalized 1-D Gaussian taps with radius ceil(2 * sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    r = math.ceil(2.0 * sigma)
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def gaussian_blur(img, sigma):
    """Separable Gaussian blur with replicated borders; float64 output."""
    img = np.asarray(img, dtype=np.float64)
    taps = gaussian_taps(sigma)
    out = correlate1d(img, taps, axis=0, mode="nearest")
    return correlate1d(out, taps, axis=1, mode="nearest")


def degrade(img, factor, out_hw=None):
    """Simulated capture at a coarser resolution: blur, then bicubic resize.

    The blur width follows the downscaling factor (sigma = factor / 2).
    Output size defaults to floor(size / factor) per axis.
    """
    if factor < 1.0:
        raise ValueError(f"degrade factor must be >= 1, got {factor}")
    img = np.asarray(img, dtype=np.float64)
    if out_hw is None:
        out_hw = (
            math.floor(img.shape[0] / factor),
            math.floor(img.shape[1] / factor),
        )
    blurred = gaussian_blur(img, factor / 2.0)
    return bicubic_resize(blurred, out_hw[0], out_hw[1])
