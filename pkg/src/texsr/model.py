"""Full super-resolution model: encoder, two branches, decoders.

The model separates feature extraction (runs once per image) from query
decoding (runs per continuous sample point), so callers can reuse features
across many query batches.  Ablation switches prune whole submodules; a
disabled module contributes no parameters at all, which keeps parameter
censuses honest.
"""

from dataclasses import dataclass, asdict
from typing import NamedTuple, Optional

import numpy as np
import torch
import torch.nn as nn

from . import geometry
from .decoders import PixelDecoder, TextureDecoder
from .encoder import ResidualEncoder
from .errors import ConfigError
from .fusion import TextureFusion
from .texture import ConvTexture, SineTexture, gather_cells
from .window_attention import LocalSourceAttention


@dataclass
class ModelConfig:
    encoder_blocks: int = 8
    pixel_dim: int = 64
    tex_dim: int = 256
    use_local_attention: bool = True
    use_texture_fusion: bool = True
    use_sine_texture: bool = True
    use_texture_decoder: bool = True
    pixel_decoder_hidden: tuple = (256, 256, 256, 256)
    texture_decoder_hidden: tuple = (256,)
    fusion_hidden: int = 256
    retrieval_chunk: int = 4096

    def __post_init__(self):
        self.pixel_decoder_hidden = tuple(int(v) for v in self.pixel_decoder_hidden)
        self.texture_decoder_hidden = tuple(int(v) for v in self.texture_decoder_hidden)
        for name in ("encoder_blocks", "pixel_dim", "tex_dim", "fusion_hidden", "retrieval_chunk"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"model.{name} must be a positive integer, got {v!r}")
        for name in ("pixel_decoder_hidden", "texture_decoder_hidden"):
            widths = getattr(self, name)
            if not widths or any(w < 1 for w in widths):
                raise ConfigError(f"model.{name} must be non-empty positive widths, got {widths!r}")

    def to_dict(self):
        d = asdict(self)
        d["pixel_decoder_hidden"] = list(self.pixel_decoder_hidden)
        d["texture_decoder_hidden"] = list(self.texture_decoder_hidden)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)


class QueryBatch(NamedTuple):
    """Torch-side geometry for a batch of query sets sharing one source shape."""

    lr_shape: tuple
    nearest_flat: torch.Tensor    # [B, N] int64
    local: torch.Tensor           # [B, N, 2]
    cell: torch.Tensor            # [B, 2]
    corner_flat: torch.Tensor     # [B, N, 4] int64
    corner_weights: torch.Tensor  # [B, N, 4]
    corner_offsets: torch.Tensor  # [B, N, 4, 2]

    @classmethod
    def from_query_sets(cls, query_sets, device="cpu", dtype=torch.float32):
        shapes = {qs.lr_shape for qs in query_sets}
        if len(shapes) != 1:
            raise ValueError(f"query sets must share one source shape, got {shapes}")
        (lr_h, lr_w) = shapes.pop()
        nb = [geometry.ensemble_neighbors(qs.hr_coords, lr_h, lr_w) for qs in query_sets]
        off = [
            geometry.ensemble_offsets(qs.hr_coords, b, lr_h, lr_w)
            for qs, b in zip(query_sets, nb)
        ]

        def fjoin(arrs, as_dtype=dtype):
            return torch.from_numpy(np.stack(arrs)).to(device=device, dtype=as_dtype)

        return cls(
            lr_shape=(lr_h, lr_w),
            nearest_flat=fjoin([qs.nearest_flat for qs in query_sets], torch.int64),
            local=fjoin([qs.local for qs in query_sets]),
            cell=fjoin([qs.cell for qs in query_sets]),
            corner_flat=fjoin([b.flat for b in nb], torch.int64),
            corner_weights=fjoin([b.weights for b in nb]),
            corner_offsets=fjoin(off),
        )


class FeatureBundle(NamedTuple):
    pixel: torch.Tensor
    tex: object          # TextureMaps, raw map, or None
    lr_shape: tuple


class RenderParts(NamedTuple):
    rgb: torch.Tensor
    pixel_rgb: torch.Tensor
    texture_rgb: Optional[torch.Tensor]
    match_index: Optional[torch.Tensor]
    match_confidence: Optional[torch.Tensor]


class SRModel(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        c = config
        self.encoder = ResidualEncoder(n_blocks=c.encoder_blocks, width=c.pixel_dim)
        self.mixer = LocalSourceAttention(dim=c.pixel_dim) if c.use_local_attention else None

        needs_texture = c.use_texture_fusion or c.use_texture_decoder
        if not needs_texture:
            self.texture = None
        elif c.use_sine_texture:
            self.texture = SineTexture(in_dim=c.pixel_dim, tex_dim=c.tex_dim)
        else:
            self.texture = ConvTexture(in_dim=c.pixel_dim, tex_dim=c.tex_dim)

        self.fusion = (
            TextureFusion(
                pixel_dim=c.pixel_dim,
                tex_dim=c.tex_dim,
                hidden=c.fusion_hidden,
                chunk=c.retrieval_chunk,
            )
            if c.use_texture_fusion
            else None
        )
        self.pixel_decoder = PixelDecoder(feat_dim=c.pixel_dim, hidden=c.pixel_decoder_hidden)
        self.texture_decoder = (
            TextureDecoder(tex_dim=c.tex_dim, hidden=c.texture_decoder_hidden)
            if c.use_texture_decoder
            else None
        )

    def features(self, x):
        """Encode a [B, 3, h, w] image batch once; queries come later."""
        f_lr = self.encoder(x)
        f_px = self.mixer(f_lr) if self.mixer is not None else f_lr
        tex = self.texture.maps(f_lr) if self.texture is not None else None
        return FeatureBundle(pixel=f_px, tex=tex, lr_shape=tuple(x.shape[-2:]))

    def query_rgb(self, feats, qb: QueryBatch, return_parts=False, key_bank=None):
        """Decode RGB at continuous query points, [B, N, 3], unclamped.

        `key_bank` overrides the retrieval bank (normally built from the
        same features); tiled rendering passes a whole-image bank here so
        retrieval still scans every source cell.
        """
        if feats.lr_shape != qb.lr_shape:
            raise ValueError(
                f"feature grid {feats.lr_shape} != query source grid {qb.lr_shape}"
            )
        f_q = gather_cells(feats.pixel, qb.nearest_flat)

        phase = self.texture.phase(qb.cell) if self.texture is not None else None

        match_idx = match_conf = None
        if self.fusion is not None:
            bank = key_bank if key_bank is not None else self.texture.key_bank(feats.tex, phase)
            fused, match_idx, match_conf = self.fusion(f_q, bank)
        else:
            fused = f_q

        pixel_rgb = self.pixel_decoder(fused, qb.corner_offsets, qb.cell, qb.corner_weights)

        texture_rgb = None
        if self.texture_decoder is not None:
            tex_vec = self.texture.query_vectors(feats.tex, qb.nearest_flat, qb.local, phase)
            texture_rgb = self.texture_decoder(tex_vec)
            rgb = pixel_rgb + texture_rgb
        else:
            rgb = pixel_rgb

        if return_parts:
            return RenderParts(rgb, pixel_rgb, texture_rgb, match_idx, match_conf)
        return rgb

    def forward(self, x, qb: QueryBatch):
        return self.query_rgb(self.features(x), qb)

    @torch.no_grad()
    def render(self, image, scale, chunk=16384, clamp=True):
        """Upscale a [h, w, 3] float array in [0, 1] to floor(scale * size).

        Evaluates the full output grid in query chunks.  Queries decode
        independently, so the chunk size only affects results through
        last-ulp rounding in batched matmuls.
        """
        dev = next(self.parameters()).device
        dt = next(self.parameters()).dtype
        img = np.asarray(image, dtype=np.float32)
        if img.ndim != 3 or img.shape[2] != 3:
            raise ValueError(f"expected [h, w, 3] image, got {img.shape}")
        h, w = img.shape[:2]
        qs = geometry.build_query_set(h, w, scale)
        out_h, out_w = qs.out_shape
        x = torch.from_numpy(img.transpose(2, 0, 1)).unsqueeze(0).to(dev, dt)
        feats = self.features(x)
        pieces = []
        n = qs.hr_coords.shape[0]
        for start in range(0, n, chunk):
            sub = geometry.query_set_for_coords(
                h, w, qs.hr_coords[start : start + chunk], qs.cell
            )
            qb = QueryBatch.from_query_sets([sub], device=dev, dtype=dt)
            pieces.append(self.query_rgb(feats, qb)[0])
        rgb = torch.cat(pieces, dim=0).view(out_h, out_w, 3)
        if clamp:
            rgb = rgb.clamp(0.0, 1.0)
        return rgb.cpu().numpy()

    def parameter_census(self):
        """Per-parameter element counts, keyed by qualified name."""
        return {name: p.numel() for name, p in self.named_parameters()}


def build_model(config: ModelConfig, seed=None):
    """Construct a model; with a seed, initialization is reproducible."""
    if seed is None:
        return SRModel(config)
    with torch.random.fork_rng():
        torch.manual_seed(seed)
        return SRModel(config)


def ablation_variants(base: ModelConfig):
    """The standard ablation sweep: full model plus four single-switch cuts."""
    def variant(**overrides):
        d = base.to_dict()
        d.update(overrides)
        return ModelConfig.from_dict(d)

    return {
        "full": variant(),
        "no_local_attention": variant(use_local_attention=False),
        "no_texture_fusion": variant(use_texture_fusion=False),
        "no_sine_texture": variant(use_sine_texture=False),
        "no_texture_decoder": variant(use_texture_decoder=False),
    }
