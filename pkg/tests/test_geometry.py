"""Coordinate and ensemble geometry checks against hand-derived oracles."""

import math

import numpy as np
import pytest

from texsr import geometry


def test_axis_coords_formula():
    for n in (1, 2, 3, 4, 7, 48):
        got = geometry.axis_coords(n)
        want = np.array([-1.0 + (2 * i + 1) / n for i in range(n)])
        assert np.allclose(got, want, atol=0, rtol=0)


def test_axis_coords_rejects_empty():
    with pytest.raises(ValueError):
        geometry.axis_coords(0)


def test_coord_grid_matches_axes():
    g = geometry.coord_grid(3, 5)
    assert g.shape == (3, 5, 2)
    assert np.array_equal(g[:, 0, 0], geometry.axis_coords(3))
    assert np.array_equal(g[0, :, 1], geometry.axis_coords(5))
    # same y along a row, same x along a column
    assert np.all(g[1, :, 0] == g[1, 0, 0])
    assert np.all(g[:, 2, 1] == g[0, 2, 1])


def test_output_size_floor_rule():
    assert geometry.output_size(2.0, 48, 48) == (96, 96)
    assert geometry.output_size(3.7, 48, 48) == (177, 177)
    assert geometry.output_size(7.3, 10, 20) == (73, 146)
    assert geometry.output_size(1.0, 5, 5) == (5, 5)


def test_nearest_index_doubling_enumeration():
    # 2-cell axis sampled on a 4-cell grid: centers -0.75, -0.25, 0.25, 0.75
    # fall in source cells 0, 0, 1, 1.
    idx = geometry.nearest_index(geometry.axis_coords(4), 2)
    assert idx.tolist() == [0, 0, 1, 1]


def test_nearest_index_tie_prefers_lower():
    # With n=2 the midpoint between the two centers is 0.0 exactly.
    assert geometry.nearest_index(np.array([0.0]), 2).tolist() == [0]
    # n=4: midpoints at -0.5, 0.0, 0.5
    assert geometry.nearest_index(np.array([-0.5, 0.0, 0.5]), 4).tolist() == [0, 1, 2]


def test_nearest_index_clamps_out_of_range():
    idx = geometry.nearest_index(np.array([-1.5, -1.0, 1.0, 1.7]), 3)
    assert idx.tolist() == [0, 0, 2, 2]


def test_nearest_index_randomized_against_bruteforce():
    rng = np.random.default_rng(711)
    for _ in range(200):
        n = int(rng.integers(1, 30))
        c = rng.uniform(-1.2, 1.2, size=17)
        centers = geometry.axis_coords(n)
        got = geometry.nearest_index(c, n)
        dist = np.abs(c[:, None] - centers[None, :])
        # argmin breaks ties toward the lower index already
        want = np.argmin(dist, axis=1)
        assert np.array_equal(got, want)


def test_full_grid_query_set_shapes_and_cell():
    qs = geometry.build_query_set(4, 6, 2.5)
    assert qs.out_shape == (10, 15)
    assert qs.hr_coords.shape == (150, 2)
    assert qs.nearest.shape == (150, 2)
    assert np.allclose(qs.cell, [2.0 / 10, 2.0 / 15])
    # flat index consistency
    assert np.array_equal(qs.nearest_flat, qs.nearest[:, 0] * 6 + qs.nearest[:, 1])


def test_local_offsets_bounded_by_cell_half_width():
    rng = np.random.default_rng(2)
    for _ in range(50):
        h = int(rng.integers(1, 20))
        w = int(rng.integers(1, 20))
        scale = float(rng.uniform(1.0, 6.0))
        qs = geometry.build_query_set(h, w, scale)
        assert np.all(np.abs(qs.local[:, 0]) <= 1.0 / h + 1e-12)
        assert np.all(np.abs(qs.local[:, 1]) <= 1.0 / w + 1e-12)


def test_query_set_identity_scale_has_zero_offsets():
    qs = geometry.build_query_set(7, 5, 1.0)
    assert np.allclose(qs.local, 0.0, atol=1e-15)
    assert np.array_equal(
        qs.nearest_flat, np.arange(35)
    )


def test_ensemble_weights_simplex_many_cases():
    rng = np.random.default_rng(3)
    total_checked = 0
    while total_checked < 10_000:
        h = int(rng.integers(1, 24))
        w = int(rng.integers(1, 24))
        coords = rng.uniform(-1.0, 1.0, size=(64, 2))
        nb = geometry.ensemble_neighbors(coords, h, w)
        assert np.all(nb.weights >= 0.0)
        assert np.all(np.abs(nb.weights.sum(axis=1) - 1.0) <= 1e-6)
        assert np.all(nb.indices[..., 0] >= 0) and np.all(nb.indices[..., 0] < h)
        assert np.all(nb.indices[..., 1] >= 0) and np.all(nb.indices[..., 1] < w)
        total_checked += coords.shape[0]


def test_ensemble_exact_on_center_hit():
    h = w = 5
    g = geometry.coord_grid(h, w).reshape(-1, 2)
    nb = geometry.ensemble_neighbors(g, h, w)
    # All blend mass lands on the hit cell, exactly.  Corners may repeat the
    # hit cell at borders, so aggregate weight per distinct cell.
    for q in range(g.shape[0]):
        mass = 0.0
        for corner in range(4):
            if nb.flat[q, corner] == q:
                mass += nb.weights[q, corner]
            else:
                assert nb.weights[q, corner] == 0.0
        assert mass == 1.0
    # Interior hits have distinct corners and the literal one-hot pattern.
    center_q = 2 * w + 2
    assert sorted(nb.weights[center_q].tolist()) == [0.0, 0.0, 0.0, 1.0]
    assert len(set(nb.flat[center_q].tolist())) == 4


def test_ensemble_degenerate_single_cell_uniform():
    # 1x1 source: all four corners are the same cell and all areas vanish.
    nb = geometry.ensemble_neighbors(np.array([[0.3, -0.2]]), 1, 1)
    assert np.allclose(nb.weights, 0.25)
    assert np.all(nb.flat == 0)


def test_ensemble_interpolates_bilinear_on_interior():
    # Away from borders the four corners bracket the query and the area
    # weights reproduce bilinear interpolation of a linear field exactly.
    rng = np.random.default_rng(4)
    h = w = 9
    field = np.fromfunction(lambda i, j: 0.3 * i - 0.7 * j + 0.1, (h, w))
    coords = rng.uniform(-0.6, 0.6, size=(200, 2))
    nb = geometry.ensemble_neighbors(coords, h, w)
    gathered = field.reshape(-1)[nb.flat]
    blended = (gathered * nb.weights).sum(axis=1)
    iy = (coords[:, 0] + 1.0) * h / 2 - 0.5
    ix = (coords[:, 1] + 1.0) * w / 2 - 0.5
    want = 0.3 * iy - 0.7 * ix + 0.1
    assert np.allclose(blended, want, atol=1e-9)


def test_ensemble_offsets_point_at_corner_centers():
    coords = np.random.default_rng(5).uniform(-1, 1, size=(40, 2))
    nb = geometry.ensemble_neighbors(coords, 6, 8)
    off = geometry.ensemble_offsets(coords, nb, 6, 8)
    cy = -1.0 + (2.0 * nb.indices[..., 0] + 1.0) / 6
    cx = -1.0 + (2.0 * nb.indices[..., 1] + 1.0) / 8
    assert np.allclose(coords[:, None, 0], cy + off[..., 0])
    assert np.allclose(coords[:, None, 1], cx + off[..., 1])


def test_nn_upsample_enumerated_3x3_from_2x2():
    src = np.arange(4.0).reshape(2, 2)
    up = geometry.nn_upsample(src, 3, 3)
    # Output centers at -2/3, 0, 2/3; the middle one ties and keeps index 0.
    want = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [2.0, 2.0, 3.0]])
    assert np.array_equal(up, want)


def test_nn_upsample_roundtrip_at_source_centers():
    rng = np.random.default_rng(6)
    for _ in range(30):
        h = int(rng.integers(1, 12))
        w = int(rng.integers(1, 12))
        scale = float(rng.uniform(1.0, 5.0))
        vals = rng.normal(size=(h, w, 3))
        oh, ow = geometry.output_size(scale, h, w)
        up = geometry.nn_upsample(vals, oh, ow)
        rows = geometry.nearest_index(geometry.axis_coords(h), oh)
        cols = geometry.nearest_index(geometry.axis_coords(w), ow)
        back = up[np.ix_(rows, cols)]
        assert np.array_equal(back, vals)


def test_nn_upsample_identity():
    vals = np.random.default_rng(7).normal(size=(5, 4))
    assert np.array_equal(geometry.nn_upsample(vals, 5, 4), vals)
