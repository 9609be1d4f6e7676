"""Synthetic quasi-periodic test images.

Small procedurally generated RGB images with smooth color ramps plus a few
oriented sinusoidal gratings and soft blobs.  They carry enough repeating
structure for texture retrieval to latch onto while staying cheap to
generate inside tests and demos.
"""

import numpy as np


def make_texture_image(size=96, rng=None, n_waves=5, n_blobs=3):
    rng = np.random.default_rng(rng)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / size

    img = np.zeros((size, size, 3))
    # gentle color ramp so channels differ
    for c in range(3):
        gy, gx = rng.uniform(-0.4, 0.4, size=2)
        img[..., c] = 0.5 + gy * (yy - 0.5) + gx * (xx - 0.5)

    for _ in range(n_waves):
        theta = rng.uniform(0, np.pi)
        freq = rng.uniform(4.0, 18.0)
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(0.05, 0.18)
        wave = np.sin(2 * np.pi * freq * (np.cos(theta) * xx + np.sin(theta) * yy) + phase)
        mix = rng.uniform(0.2, 1.0, size=3)
        img += amp * wave[..., None] * mix[None, None, :]

    for _ in range(n_blobs):
        cy, cx = rng.uniform(0.15, 0.85, size=2)
        radius = rng.uniform(0.06, 0.2)
        strength = rng.uniform(-0.25, 0.25)
        blob = np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * radius**2)))
        img += strength * blob[..., None]

    lo, hi = img.min(), img.max()
    img = 0.05 + 0.9 * (img - lo) / max(hi - lo, 1e-9)
    return img.astype(np.float32)


def make_corpus(count, size=96, seed=0):
    rng = np.random.default_rng(seed)
    return [make_texture_image(size, rng) for _ in range(count)]
