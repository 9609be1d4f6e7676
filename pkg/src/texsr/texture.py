"""Texture branch: per-cell sinusoids evaluated at continuous offsets.

Three convolutions over the encoder features predict, per source cell, an
amplitude vector and two spatial frequency vectors.  A per-render phase
vector comes from the query pixel footprint through an affine map squashed
to (0, 1).  The texture feature of a query point is then, channel-wise,

    amp * sin(freq_x * dx + freq_y * dy + phase)

with (dy, dx) the offset from the source cell center in normalized
coordinates.  At zero offset this reduces to amp * sin(phase), which is the
form used to build retrieval key banks on the source grid itself.
"""

from typing import NamedTuple

import torch
import torch.nn as nn


class TextureMaps(NamedTuple):
    amp: torch.Tensor     # [B, T, h, w]
    freq_y: torch.Tensor  # [B, T, h, w]
    freq_x: torch.Tensor  # [B, T, h, w]


class SineTexture(nn.Module):
    def __init__(self, in_dim=64, tex_dim=256):
        super().__init__()
        self.tex_dim = tex_dim
        self.amp_conv = nn.Conv2d(in_dim, tex_dim, 3, padding=1)
        self.freq_y_conv = nn.Conv2d(in_dim, tex_dim, 3, padding=1)
        self.freq_x_conv = nn.Conv2d(in_dim, tex_dim, 3, padding=1)
        self.phase_map = nn.Linear(2, tex_dim)

    def maps(self, feat):
        return TextureMaps(
            amp=self.amp_conv(feat),
            freq_y=self.freq_y_conv(feat),
            freq_x=self.freq_x_conv(feat),
        )

    def phase(self, cell):
        """Phase vector in (0, 1) from the (dy, dx) query footprint, [B, T]."""
        return torch.sigmoid(self.phase_map(cell))

    @staticmethod
    def evaluate(amp, freq_y, freq_x, offsets, phase):
        """Channel-wise sinusoid at per-query offsets.

        amp/freq_y/freq_x: [B, N, T] gathered at each query's source cell.
        offsets: [B, N, 2] (dy, dx) from that cell's center.
        phase:   [B, T] or [B, N, T].
        """
        if phase.ndim == 2:
            phase = phase.unsqueeze(1)
        dy = offsets[..., 0:1]
        dx = offsets[..., 1:2]
        return amp * torch.sin(freq_x * dx + freq_y * dy + phase)

    def query_vectors(self, maps, flat_idx, offsets, phase):
        """Texture features for explicit queries, [B, N, T].

        flat_idx: [B, N] row-major indices into the source grid.
        offsets:  [B, N, 2] (dy, dx) offsets from the indexed cell centers.
        """
        amp = gather_cells(maps.amp, flat_idx)
        fy = gather_cells(maps.freq_y, flat_idx)
        fx = gather_cells(maps.freq_x, flat_idx)
        return self.evaluate(amp, fy, fx, offsets, phase)

    def key_bank(self, maps, phase):
        """Texture features of every source cell at zero offset, [B, hw, T]."""
        b, t, h, w = maps.amp.shape
        amp = maps.amp.view(b, t, h * w).transpose(1, 2)
        if phase.ndim == 2:
            phase = phase.unsqueeze(1)
        return amp * torch.sin(phase)


class ConvTexture(nn.Module):
    """Offset-blind replacement for the sinusoidal branch.

    A single convolution lifts encoder features to the texture width; query
    vectors are nearest-cell gathers, ignoring sub-cell offsets and footprint.
    """

    def __init__(self, in_dim=64, tex_dim=256):
        super().__init__()
        self.tex_dim = tex_dim
        self.proj = nn.Conv2d(in_dim, tex_dim, 3, padding=1)

    def maps(self, feat):
        return self.proj(feat)

    def query_vectors(self, maps, flat_idx, offsets, phase):
        return gather_cells(maps, flat_idx)

    def phase(self, cell):
        return None

    def key_bank(self, maps, phase):
        b, t, h, w = maps.shape
        return maps.view(b, t, h * w).transpose(1, 2)


def gather_cells(feature_map, flat_idx):
    """Gather [B, N, C] vectors from a [B, C, h, w] map by flat cell index."""
    b, c, h, w = feature_map.shape
    flattened = feature_map.view(b, c, h * w).transpose(1, 2)  # [B, hw, C]
    idx = flat_idx.unsqueeze(-1).expand(-1, -1, c)
    return flattened.gather(1, idx)
