"""Continuous-coordinate geometry for sampling images at arbitrary scales.

Every axis of length n is mapped to normalized coordinates in [-1, 1] with
cell centers at -1 + (2*i + 1) / n, so the first and last cells sit half a
cell away from the boundary.  All functions here are pure numpy (float64);
they produce index/coordinate tensors that the network modules consume.

Axis order is (row, col) == (y, x) everywhere.  Flattened indices are
row-major: flat = iy * width + ix.
"""

from dataclasses import dataclass
import math

import numpy as np


def axis_coords(n):
    """Normalized center coordinates of an axis with n cells, shape [n]."""
    if n < 1:
        raise ValueError(f"axis length must be >= 1, got {n}")
    return -1.0 + (2.0 * np.arange(n, dtype=np.float64) + 1.0) / n


def coord_grid(height, width):
    """Dense [H, W, 2] grid of (y, x) cell-center coordinates."""
    ys = axis_coords(height)
    xs = axis_coords(width)
    grid = np.empty((height, width, 2), dtype=np.float64)
    grid[..., 0] = ys[:, None]
    grid[..., 1] = xs[None, :]
    return grid


def output_size(scale, lr_h, lr_w):
    """Output resolution for a given magnification: floor(scale * size) per axis."""
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    out_h = math.floor(scale * lr_h)
    out_w = math.floor(scale * lr_w)
    if out_h < 1 or out_w < 1:
        raise ValueError(f"scale {scale} collapses {lr_h}x{lr_w} to zero size")
    return out_h, out_w


def nearest_index(coords, n):
    """Index of the cell whose center is nearest to each coordinate.

    Cell i covers the half-open span (-1 + 2i/n, -1 + 2(i+1)/n); a coordinate
    exactly on the midpoint between two centers resolves to the lower index.
    Coordinates outside [-1, 1] clamp to the border cells.
    """
    coords = np.asarray(coords, dtype=np.float64)
    t = (coords + 1.0) * (n / 2.0)
    idx = np.ceil(t).astype(np.int64) - 1
    return np.clip(idx, 0, n - 1)


@dataclass(frozen=True)
class QuerySet:
    """Everything needed to evaluate a batch of continuous query points.

    hr_coords    [N, 2] query positions in the shared normalized frame
    nearest      [N, 2] (iy, ix) of the nearest source cell per query
    nearest_flat [N]    row-major flat index of the same cell
    local        [N, 2] offset query - source center, each component in
                        [-1/size, 1/size] per axis (up to boundary clamping)
    cell         [2]    query pixel footprint (2/out_h, 2/out_w)
    lr_shape     (h, w) of the source grid
    out_shape    (H, W) of the target grid, or None for free-form queries
    """

    lr_shape: tuple
    out_shape: tuple
    hr_coords: np.ndarray
    nearest: np.ndarray
    nearest_flat: np.ndarray
    local: np.ndarray
    cell: np.ndarray


def query_set_for_coords(lr_h, lr_w, coords, cell, out_shape=None):
    """Build a QuerySet for explicit query coordinates.

    coords is [N, 2] (y, x); cell is the (dy, dx) footprint to report to the
    decoders, normally (2/out_h, 2/out_w) of the grid the queries came from.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise ValueError(f"coords must be [N, 2], got {coords.shape}")
    iy = nearest_index(coords[:, 0], lr_h)
    ix = nearest_index(coords[:, 1], lr_w)
    centers_y = -1.0 + (2.0 * iy + 1.0) / lr_h
    centers_x = -1.0 + (2.0 * ix + 1.0) / lr_w
    local = np.stack([coords[:, 0] - centers_y, coords[:, 1] - centers_x], axis=1)
    return QuerySet(
        lr_shape=(lr_h, lr_w),
        out_shape=tuple(out_shape) if out_shape is not None else None,
        hr_coords=coords,
        nearest=np.stack([iy, ix], axis=1),
        nearest_flat=iy * lr_w + ix,
        local=local,
        cell=np.asarray(cell, dtype=np.float64),
    )


def build_query_set(lr_h, lr_w, scale):
    """QuerySet covering the full output grid at the given magnification.

    Queries are the output grid's own cell centers, in row-major order, so
    reshaping the decoded values to (out_h, out_w, ...) yields the image.
    """
    out_h, out_w = output_size(scale, lr_h, lr_w)
    coords = coord_grid(out_h, out_w).reshape(-1, 2)
    cell = (2.0 / out_h, 2.0 / out_w)
    return query_set_for_coords(lr_h, lr_w, coords, cell, out_shape=(out_h, out_w))


@dataclass(frozen=True)
class EnsembleNeighbors:
    """Four source cells bracketing each query, with area-based blend weights.

    indices [N, 4, 2] (iy, ix) per corner, ordered (top-left, top-right,
            bottom-left, bottom-right); duplicates appear at image borders.
    flat    [N, 4] row-major flat indices of the same cells.
    weights [N, 4] nonnegative, each row summing to exactly 1.0.
    """

    indices: np.ndarray
    flat: np.ndarray
    weights: np.ndarray


def _axis_bracket(c, n):
    """Two bracketing cell indices per coordinate plus their blend weights.

    Takes the nearest cell and its neighbor on the query's far side (the next
    higher index when the query sits exactly on a center), clamped at the
    borders where the pair degenerates to a duplicate.  Weights follow linear
    interpolation: each cell's share is the distance to the *other* cell's
    center over their span.  A zero span (duplicate cell at a border, or an
    exact hit with no distinct neighbor) splits evenly, which is harmless
    because both slots then address the same cell.
    """
    near = nearest_index(c, n)
    centers_near = -1.0 + (2.0 * near + 1.0) / n
    side = np.where(c >= centers_near, 1, -1)
    other = np.clip(near + side, 0, n - 1)
    centers_other = -1.0 + (2.0 * other + 1.0) / n

    lo = np.minimum(near, other)
    hi = np.maximum(near, other)
    d_near = np.abs(c - centers_near)
    d_other = np.abs(c - centers_other)
    span = d_near + d_other
    w_near = np.where(span > 0.0, d_other / np.where(span > 0.0, span, 1.0), 0.5)
    w_other = np.where(span > 0.0, d_near / np.where(span > 0.0, span, 1.0), 0.5)
    w_lo = np.where(near <= other, w_near, w_other)
    w_hi = np.where(near <= other, w_other, w_near)
    return lo, hi, w_lo, w_hi


def ensemble_neighbors(coords, lr_h, lr_w):
    """Select the 2x2 neighborhood around each query and its blend weights.

    Per axis the pair is the nearest cell and the cell on the query's other
    side, so the four corners bracket the query; at the borders the pair
    clamps to a duplicate.  A corner's weight is the normalized area of the
    rectangle spanned by the query and the center of the diagonally opposite
    corner, computed as the product of per-axis linear weights (the two are
    algebraically identical while the corners are distinct, and the per-axis
    form stays well defined when a query lands exactly on a cell center:
    the full weight collapses onto the hit cell).  Rows are nonnegative and
    sum to 1.
    """
    coords = np.asarray(coords, dtype=np.float64)
    y, x = coords[:, 0], coords[:, 1]

    iy_lo, iy_hi, wy_lo, wy_hi = _axis_bracket(y, lr_h)
    ix_lo, ix_hi, wx_lo, wx_hi = _axis_bracket(x, lr_w)

    weights = np.stack(
        [wy_lo * wx_lo, wy_lo * wx_hi, wy_hi * wx_lo, wy_hi * wx_hi], axis=1
    )

    indices = np.empty((coords.shape[0], 4, 2), dtype=np.int64)
    indices[:, 0] = np.stack([iy_lo, ix_lo], axis=1)
    indices[:, 1] = np.stack([iy_lo, ix_hi], axis=1)
    indices[:, 2] = np.stack([iy_hi, ix_lo], axis=1)
    indices[:, 3] = np.stack([iy_hi, ix_hi], axis=1)
    flat = indices[..., 0] * lr_w + indices[..., 1]
    return EnsembleNeighbors(indices=indices, flat=flat, weights=weights)


def ensemble_offsets(coords, neighbors, lr_h, lr_w):
    """Offsets query - corner center, [N, 4, 2], for decoder conditioning."""
    coords = np.asarray(coords, dtype=np.float64)
    cy = -1.0 + (2.0 * neighbors.indices[..., 0] + 1.0) / lr_h
    cx = -1.0 + (2.0 * neighbors.indices[..., 1] + 1.0) / lr_w
    off = np.empty(neighbors.indices.shape, dtype=np.float64)
    off[..., 0] = coords[:, None, 0] - cy
    off[..., 1] = coords[:, None, 1] - cx
    return off


def nn_upsample(values, out_h, out_w):
    """Nearest-source upsampling of a [h, w, ...] array to [out_h, out_w, ...].

    Each output cell takes the value of the source cell nearest to its center
    in normalized coordinates.  Sampling the result back at the source grid's
    own cell centers returns the original values whenever the output is at
    least as fine as the source.
    """
    values = np.asarray(values)
    h, w = values.shape[:2]
    rows = nearest_index(axis_coords(out_h), h)
    cols = nearest_index(axis_coords(out_w), w)
    return values[np.ix_(rows, cols)]
