"""Feature encoder: residual convolutional stack, spatial size preserving."""

import torch
import torch.nn as nn


class ResidualBlock(nn.Module):
    def __init__(self, width):
        super().__init__()
        self.conv1 = nn.Conv2d(width, width, 3, padding=1)
        self.conv2 = nn.Conv2d(width, width, 3, padding=1)
        self.act = nn.ReLU(inplace=True)

    def forward(self, x):
        return x + self.conv2(self.act(self.conv1(x)))


class ResidualEncoder(nn.Module):
    """Maps an RGB image to a same-resolution feature map.

    A 3->width head conv, n_blocks residual conv blocks, and a width->width
    tail conv.  All convs are 3x3 stride 1 with zero-padding, so output
    spatial dims equal input dims and the network is translation co-variant
    away from the borders.
    """

    def __init__(self, n_blocks=8, width=64, in_channels=3):
        super().__init__()
        if n_blocks < 1:
            raise ValueError(f"n_blocks must be >= 1, got {n_blocks}")
        self.width = width
        self.in_channels = in_channels
        self.head = nn.Conv2d(in_channels, width, 3, padding=1)
        self.blocks = nn.Sequential(*[ResidualBlock(width) for _ in range(n_blocks)])
        self.tail = nn.Conv2d(width, width, 3, padding=1)
        for m in self.modules():
            if isinstance(m, nn.Conv2d):
                nn.init.zeros_(m.bias)

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ValueError(
                f"expected [B, {self.in_channels}, H, W] input, got {tuple(x.shape)}"
            )
        return self.tail(self.blocks(self.head(x)))
