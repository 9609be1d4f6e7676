"""Per-pixel attention over a 3x3 neighborhood plus its pooled summary.

Each position attends over ten candidate vectors drawn from its own window:
itself, the window mean, and the eight surrounding positions.  Borders are
replicate-padded so every position, corners included, sees exactly ten
sources.  Projections are shared across positions; there is no output
projection and no residual path inside this module.
"""

import math

import torch
import torch.nn as nn
import torch.nn.functional as F


class LocalSourceAttention(nn.Module):
    def __init__(self, dim=64):
        super().__init__()
        self.dim = dim
        self.proj_q = nn.Linear(dim, dim, bias=False)
        self.proj_k = nn.Linear(dim, dim, bias=False)
        self.proj_v = nn.Linear(dim, dim, bias=False)

    def sources(self, feat):
        """Assemble the ten source vectors per position, [B, HW, 10, C]."""
        b, c, h, w = feat.shape
        padded = F.pad(feat, (1, 1, 1, 1), mode="replicate")
        windows = F.unfold(padded, kernel_size=3)  # [B, C*9, HW]
        windows = windows.view(b, c, 9, h * w)
        center = windows[:, :, 4]
        pooled = windows.mean(dim=2)
        neighbor_ids = [0, 1, 2, 3, 5, 6, 7, 8]
        neighbors = windows[:, :, neighbor_ids]
        stack = torch.cat(
            [center.unsqueeze(2), pooled.unsqueeze(2), neighbors], dim=2
        )  # [B, C, 10, HW]
        return stack.permute(0, 3, 2, 1)

    def forward(self, feat):
        b, c, h, w = feat.shape
        if c != self.dim:
            raise ValueError(f"expected {self.dim} channels, got {c}")
        src = self.sources(feat)  # [B, HW, 10, C]
        center = src[:, :, 0]
        q = self.proj_q(center).unsqueeze(2)
        k = self.proj_k(src)
        v = self.proj_v(src)
        logits = (q * k).sum(dim=-1) / math.sqrt(self.dim)
        attn = torch.softmax(logits, dim=-1)
        out = (attn.unsqueeze(-1) * v).sum(dim=2)
        return out.permute(0, 2, 1).view(b, c, h, w)
