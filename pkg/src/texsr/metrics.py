"""Fidelity metrics over RGB images in [0, 1].

Conventions, fixed across the whole project: inputs are float arrays scaled
to [0, 1]; no border cropping, no luma conversion; computations run in
float64.  PSNR uses a unit peak, so identical images report +inf.  SSIM
uses an 11-tap Gaussian window (sigma 1.5), K1=0.01, K2=0.03, unit dynamic
range, statistics normalized by window mass, and scores averaged over the
window-valid interior only, per channel, then over channels.

Distribution-level metrics (feature-space distances over image sets) are
out of scope here: they need reference corpora and a pretrained embedding
network, neither of which belongs in this package's hermetic test surface.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim not in (2, 3):
        raise ValueError(f"expected [H, W] or [H, W, C] images, got {a.shape}")
    return a, b


def psnr(a, b):
    """Peak signal-to-noise ratio in dB; +inf for identical inputs."""
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_taps(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    r = (size - 1) // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def _windowed(img, taps):
    out = correlate1d(img, taps, axis=0, mode="constant")
    return correlate1d(out, taps, axis=1, mode="constant")


def _ssim_single(a, b):
    taps = _gaussian_taps()
    r = (SSIM_WINDOW - 1) // 2
    h, w = a.shape
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise ValueError(
            f"image {a.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    mu_a = _windowed(a, taps)
    mu_b = _windowed(b, taps)
    aa = _windowed(a * a, taps) - mu_a * mu_a
    bb = _windowed(b * b, taps) - mu_b * mu_b
    ab = _windowed(a * b, taps) - mu_a * mu_b
    score = ((2 * mu_a * mu_b + c1) * (2 * ab + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (aa + bb + c2)
    )
    # Only window positions fully inside the image count.
    return float(score[r : h - r, r : w - r].mean())


def ssim(a, b):
    """Mean structural similarity; channels scored separately, then averaged."""
    a, b = _check_pair(a, b)
    if a.ndim == 2:
        return _ssim_single(a, b)
    return float(np.mean([_ssim_single(a[..., c], b[..., c]) for c in range(a.shape[2])]))


def abs_error_map(a, b):
    """Per-pixel absolute difference, averaged over channels -> [H, W] float."""
    a, b = _check_pair(a, b)
    d = np.abs(a - b)
    if d.ndim == 3:
        d = d.mean(axis=2)
    return d


def error_map(a, b):
    """Render the absolute error as an RGB heat image.

    The colormap is a fixed monotone ramp from black through red and orange
    to white: with t the error normalized by its own maximum, the channels
    are (t, t^2, t^4).  Each channel rises monotonically with error, and the
    largest-error pixel always lands on the ramp's top (white).  Identical
    inputs give an all-black map.
    """
    d = abs_error_map(a, b)
    peak = float(d.max())
    t = d / peak if peak > 0.0 else np.zeros_like(d)
    return np.stack([t, t**2, t**4], axis=-1)


@dataclass
class MetricRow:
    image_id: str
    scale: float
    psnr: float
    ssim: float
    renderer: str = "model"


@dataclass
class MetricReport:
    rows: list = field(default_factory=list)

    def add(self, image_id, scale, psnr_val, ssim_val, renderer="model"):
        self.rows.append(MetricRow(image_id, float(scale), psnr_val, ssim_val, renderer))

    def aggregate(self):
        """Means keyed by (renderer, scale); +inf rows propagate to the mean."""
        groups = {}
        for r in self.rows:
            groups.setdefault((r.renderer, r.scale), []).append(r)
        out = {}
        for key, rows in sorted(groups.items()):
            out[key] = {
                "psnr": float(np.mean([r.psnr for r in rows])),
                "ssim": float(np.mean([r.ssim for r in rows])),
                "count": len(rows),
            }
        return out

    def to_records(self):
        return [
            {
                "image_id": r.image_id,
                "scale": r.scale,
                "psnr": r.psnr,
                "ssim": r.ssim,
                "renderer": r.renderer,
            }
            for r in self.rows
        ]

    def format_table(self):
        lines = [f"{'renderer':<12} {'scale':>6} {'n':>4} {'psnr':>9} {'ssim':>8}"]
        for (renderer, scale), agg in self.aggregate().items():
            lines.append(
                f"{renderer:<12} {scale:>6.2f} {agg['count']:>4d} "
                f"{agg['psnr']:>9.3f} {agg['ssim']:>8.4f}"
            )
        return "\n".join(lines)
