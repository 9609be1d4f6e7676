"""Tiled and region-limited rendering for inputs too large to decode whole.

The output grid is always the full image's: every query keeps its position,
sub-cell offset, and footprint in the whole image's normalized frame, and
only gather indices are remapped into the tile crop.  That makes per-query
conditioning identical to untiled rendering; the remaining differences come
from encoder border context (bounded by the crop margin) and, optionally,
from retrieval scanning a tile-local key pool instead of the global one.

Tiles overlap; in the overlap band contributions are feathered with a
linear ramp so seams blend smoothly even where tile outputs differ.
"""

import math

import numpy as np
import torch

from . import geometry
from .model import QueryBatch


def receptive_radius(config):
    """Pixels of context a feature cell depends on (3x3 convs, one mixer hop)."""
    r = 2 + 2 * config.encoder_blocks
    if config.use_local_attention:
        r += 1
    return r


def _global_queries_for_rect(lr_shape, out_shape, row_range, col_range, crop_box):
    """QueryBatch for a rectangle of global output pixels, gathered in a crop.

    crop_box is (y0, y1, x0, x1) in source cells; every index the queries
    touch must fall inside it.  All coordinate values stay in the full
    image's frame.
    """
    lr_h, lr_w = lr_shape
    out_h, out_w = out_shape
    y0, y1, x0, x1 = crop_box
    rows = np.arange(row_range[0], row_range[1])
    cols = np.arange(col_range[0], col_range[1])
    cy = -1.0 + (2.0 * rows + 1.0) / out_h
    cx = -1.0 + (2.0 * cols + 1.0) / out_w
    coords = np.empty((rows.size, cols.size, 2))
    coords[..., 0] = cy[:, None]
    coords[..., 1] = cx[None, :]
    coords = coords.reshape(-1, 2)

    cell = (2.0 / out_h, 2.0 / out_w)
    qs = geometry.query_set_for_coords(lr_h, lr_w, coords, cell)
    nb = geometry.ensemble_neighbors(coords, lr_h, lr_w)
    off = geometry.ensemble_offsets(coords, nb, lr_h, lr_w)

    for arr in (qs.nearest, nb.indices):
        ys = arr[..., 0]
        xs = arr[..., 1]
        if ys.min() < y0 or ys.max() >= y1 or xs.min() < x0 or xs.max() >= x1:
            raise ValueError("crop box does not cover the queried cells")

    nx = x1 - x0
    near_local = (qs.nearest[:, 0] - y0) * nx + (qs.nearest[:, 1] - x0)
    corner_local = (nb.indices[..., 0] - y0) * nx + (nb.indices[..., 1] - x0)

    def t(a, dtype=torch.float32):
        return torch.from_numpy(np.ascontiguousarray(a)).to(dtype).unsqueeze(0)

    qb = QueryBatch(
        lr_shape=(y1 - y0, nx),
        nearest_flat=t(near_local, torch.int64),
        local=t(qs.local),
        cell=torch.tensor([cell], dtype=torch.float32),
        corner_flat=t(corner_local, torch.int64),
        corner_weights=t(nb.weights),
        corner_offsets=t(off),
    )
    return qb, (rows.size, cols.size)


def _decode_rect(model, feats, qb, shape, chunk, key_bank=None):
    n = qb.nearest_flat.shape[1]
    pieces = []
    for start in range(0, n, chunk):
        sub = QueryBatch(
            lr_shape=qb.lr_shape,
            nearest_flat=qb.nearest_flat[:, start : start + chunk],
            local=qb.local[:, start : start + chunk],
            cell=qb.cell,
            corner_flat=qb.corner_flat[:, start : start + chunk],
            corner_weights=qb.corner_weights[:, start : start + chunk],
            corner_offsets=qb.corner_offsets[:, start : start + chunk],
        )
        pieces.append(model.query_rgb(feats, sub, key_bank=key_bank)[0])
    return torch.cat(pieces, dim=0).view(*shape, 3).numpy()


def _axis_feather(units, core_lo, core_hi, overlap, axis_len):
    """Blend weight per output position from its source-cell-unit location."""
    w = np.ones_like(units)
    if core_lo > 0:
        w = np.minimum(w, np.clip(1.0 - (core_lo - units) / overlap, 0.0, None))
    if core_hi < axis_len:
        w = np.minimum(w, np.clip(1.0 - (units - core_hi) / overlap, 0.0, None))
    return np.clip(w, 0.0, 1.0)


@torch.no_grad()
def stitch_render(
    model,
    image,
    scale,
    tile=96,
    overlap=12,
    margin=None,
    global_keys=True,
    chunk=16384,
    clamp=True,
):
    """Render floor(scale * size) output by sweeping overlapping tiles.

    tile and overlap are in source cells.  margin is extra crop context
    beyond the blend zone (defaults to the model's receptive radius).  With
    global_keys the retrieval bank covers every source cell of the whole
    image, matching untiled semantics; switching it off keeps memory
    proportional to the tile by scanning only the tile's own cells.
    """
    if tile < 1 or overlap < 0:
        raise ValueError(f"bad tile/overlap: {tile}/{overlap}")
    img = np.asarray(image, dtype=np.float32)
    h, w = img.shape[:2]
    out_h, out_w = geometry.output_size(scale, h, w)
    if margin is None:
        margin = receptive_radius(model.config)

    dev = next(model.parameters()).device
    x_full = torch.from_numpy(img.transpose(2, 0, 1)).unsqueeze(0).to(dev)

    bank = None
    if global_keys and model.fusion is not None:
        feats_full = model.features(x_full)
        cellv = torch.tensor([[2.0 / out_h, 2.0 / out_w]], dtype=torch.float32, device=dev)
        phase = model.texture.phase(cellv)
        bank = model.texture.key_bank(feats_full.tex, phase)
        del feats_full

    # Output pixel centers measured in source cells (0 .. h) per axis.
    uy = (np.arange(out_h) + 0.5) * (h / out_h)
    ux = (np.arange(out_w) + 0.5) * (w / out_w)

    acc = np.zeros((out_h, out_w, 3), dtype=np.float64)
    wsum = np.zeros((out_h, out_w, 1), dtype=np.float64)

    for ty in range(0, h, tile):
        for tx in range(0, w, tile):
            by, bx = min(ty + tile, h), min(tx + tile, w)
            zone_y = (max(0.0, ty - overlap), min(float(h), by + overlap))
            zone_x = (max(0.0, tx - overlap), min(float(w), bx + overlap))
            rsel = np.nonzero((uy > zone_y[0]) & (uy < zone_y[1]))[0]
            csel = np.nonzero((ux > zone_x[0]) & (ux < zone_x[1]))[0]
            if rsel.size == 0 or csel.size == 0:
                continue
            r0, r1 = int(rsel[0]), int(rsel[-1]) + 1
            c0, c1 = int(csel[0]), int(csel[-1]) + 1

            y0 = max(0, ty - overlap - margin)
            y1 = min(h, by + overlap + margin)
            x0 = max(0, tx - overlap - margin)
            x1 = min(w, bx + overlap + margin)
            # widen if the 2x2 ensemble of an edge query pokes past the crop
            y0 = min(y0, max(0, int(math.floor(uy[r0] - 1.5))))
            y1 = max(y1, min(h, int(math.ceil(uy[r1 - 1] + 1.5))))
            x0 = min(x0, max(0, int(math.floor(ux[c0] - 1.5))))
            x1 = max(x1, min(w, int(math.ceil(ux[c1 - 1] + 1.5))))

            crop = img[y0:y1, x0:x1]
            x_t = torch.from_numpy(crop.transpose(2, 0, 1)).unsqueeze(0).to(dev)
            feats = model.features(x_t)
            qb, shape = _global_queries_for_rect(
                (h, w), (out_h, out_w), (r0, r1), (c0, c1), (y0, y1, x0, x1)
            )
            pred = _decode_rect(model, feats, qb, shape, chunk, key_bank=bank)

            wy = _axis_feather(uy[r0:r1], ty, by, max(overlap, 1e-9), h)
            wx = _axis_feather(ux[c0:c1], tx, bx, max(overlap, 1e-9), w)
            w2d = (wy[:, None] * wx[None, :])[..., None]
            acc[r0:r1, c0:c1] += w2d * pred
            wsum[r0:r1, c0:c1] += w2d

    out = acc / wsum
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    return out.astype(np.float32)


@torch.no_grad()
def image_features(model, image):
    """Whole-image FeatureBundle, for reuse across many region renders."""
    img = np.asarray(image, dtype=np.float32)
    dev = next(model.parameters()).device
    x_full = torch.from_numpy(img.transpose(2, 0, 1)).unsqueeze(0).to(dev)
    return model.features(x_full)


@torch.no_grad()
def render_region(model, image, x, y, w, h, scale, chunk=16384, clamp=True, feats=None):
    """Render one rectangle of the global output grid, from whole-image features.

    (x, y, w, h) select source cells; the result covers global output rows
    floor(scale * y) .. floor(scale * y) + floor(scale * h) and the matching
    columns, so adjacent regions share no pixels and butt together exactly.
    Pass a precomputed `feats` (from image_features) to skip re-encoding.
    """
    img = np.asarray(image, dtype=np.float32)
    ih, iw = img.shape[:2]
    if w < 1 or h < 1 or x < 0 or y < 0 or x + w > iw or y + h > ih:
        raise ValueError(
            f"region x={x} y={y} w={w} h={h} outside {ih}x{iw} image"
        )
    out_h, out_w = geometry.output_size(scale, ih, iw)
    r0 = math.floor(scale * y)
    c0 = math.floor(scale * x)
    rh = math.floor(scale * h)
    cw = math.floor(scale * w)
    r1, c1 = min(r0 + rh, out_h), min(c0 + cw, out_w)

    if feats is None:
        feats = image_features(model, img)
    qb, shape = _global_queries_for_rect(
        (ih, iw), (out_h, out_w), (r0, r1), (c0, c1), (0, ih, 0, iw)
    )
    pred = _decode_rect(model, feats, qb, shape, chunk)
    if clamp:
        pred = np.clip(pred, 0.0, 1.0)
    return pred.astype(np.float32)
