"""Decoding heads that turn per-query features into RGB values."""

import torch
import torch.nn as nn


class Mlp(nn.Module):
    def __init__(self, in_dim, out_dim, hidden):
        super().__init__()
        layers = []
        d = in_dim
        for h in hidden:
            layers += [nn.Linear(d, h), nn.ReLU(inplace=True)]
            d = h
        layers.append(nn.Linear(d, out_dim))
        self.net = nn.Sequential(*layers)

    def forward(self, x):
        return self.net(x)


class PixelDecoder(nn.Module):
    """RGB from a fused pixel feature, blended over four bracketing cells.

    The decoder itself conditions on (feature, offset to a cell center,
    query footprint); it is evaluated once per bracketing cell with the
    *same* fused feature but that cell's offset, and the four RGB values are
    averaged with the caller's area weights.
    """

    def __init__(self, feat_dim=64, hidden=(256, 256, 256, 256)):
        super().__init__()
        self.feat_dim = feat_dim
        self.mlp = Mlp(feat_dim + 4, 3, list(hidden))

    def decode(self, feat, offsets, cell):
        """Single-point evaluation: feat [..., F], offsets [..., 2], cell [..., 2]."""
        return self.mlp(torch.cat([feat, offsets, cell], dim=-1))

    def forward(self, feat, corner_offsets, cell, corner_weights):
        """Ensemble evaluation.

        feat [B, N, F]; corner_offsets [B, N, 4, 2]; cell [B, 2] or [B, N, 2];
        corner_weights [B, N, 4].  Returns [B, N, 3].
        """
        b, n, _ = feat.shape
        feat4 = feat.unsqueeze(2).expand(-1, -1, 4, -1)
        if cell.ndim == 2:
            cell = cell.unsqueeze(1).expand(-1, n, -1)
        cell4 = cell.unsqueeze(2).expand(-1, -1, 4, -1)
        rgb = self.decode(feat4, corner_offsets, cell4)  # [B, N, 4, 3]
        return (rgb * corner_weights.unsqueeze(-1)).sum(dim=2)


class TextureDecoder(nn.Module):
    """RGB from a texture feature vector alone.

    The texture vector already encodes the query's sub-cell position through
    its sinusoidal argument, so no ensemble is needed: blending four copies
    of the same vector with simplex weights would return the same value.
    """

    def __init__(self, tex_dim=256, hidden=(256,)):
        super().__init__()
        self.mlp = Mlp(tex_dim, 3, list(hidden))

    def forward(self, tex_feat):
        return self.mlp(tex_feat)
