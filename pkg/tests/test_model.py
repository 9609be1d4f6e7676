import numpy as np
import pytest
import torch

from texsr import geometry
from texsr.errors import ConfigError
from texsr.model import (
    ModelConfig,
    QueryBatch,
    SRModel,
    ablation_variants,
    build_model,
)


def tiny_config(**overrides):
    base = dict(
        encoder_blocks=1,
        pixel_dim=8,
        tex_dim=12,
        pixel_decoder_hidden=(16, 16),
        texture_decoder_hidden=(16,),
        fusion_hidden=16,
    )
    base.update(overrides)
    return ModelConfig(**base)


def make_batch(lr_h=5, lr_w=6, scale=2.3, device="cpu", dtype=torch.float32):
    qs = geometry.build_query_set(lr_h, lr_w, scale)
    return QueryBatch.from_query_sets([qs], device=device, dtype=dtype), qs


def test_config_roundtrip():
    cfg = tiny_config(use_sine_texture=False)
    again = ModelConfig.from_dict(cfg.to_dict())
    assert again == cfg


def test_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ConfigError):
        ModelConfig.from_dict({"window_size": 7})
    with pytest.raises(ConfigError):
        ModelConfig(encoder_blocks=0)
    with pytest.raises(ConfigError):
        ModelConfig(pixel_decoder_hidden=())


def test_forward_shapes_and_parts_sum():
    model = build_model(tiny_config(), seed=100).eval()
    qb, qs = make_batch()
    x = torch.rand(1, 3, 5, 6)
    with torch.no_grad():
        feats = model.features(x)
        parts = model.query_rgb(feats, qb, return_parts=True)
    n = qs.hr_coords.shape[0]
    assert parts.rgb.shape == (1, n, 3)
    assert torch.equal(parts.rgb, parts.pixel_rgb + parts.texture_rgb)
    assert parts.match_index.shape == (1, n)
    assert parts.match_confidence.shape == (1, n)
    assert torch.all(parts.match_index >= 0)
    assert torch.all(parts.match_index < 30)


def test_seeded_build_is_reproducible():
    a = build_model(tiny_config(), seed=7)
    b = build_model(tiny_config(), seed=7)
    for (na, pa), (nb, pb) in zip(a.named_parameters(), b.named_parameters()):
        assert na == nb
        assert torch.equal(pa, pb)
    c = build_model(tiny_config(), seed=8)
    assert any(
        not torch.equal(pa, pc)
        for (_, pa), (_, pc) in zip(a.named_parameters(), c.named_parameters())
    )


def test_identical_batch_rows_decode_identically():
    model = build_model(tiny_config(), seed=101).eval()
    qs = geometry.build_query_set(4, 4, 2.0)
    qb = QueryBatch.from_query_sets([qs, qs])
    img = torch.rand(1, 3, 4, 4)
    x = torch.cat([img, img])
    with torch.no_grad():
        out = model(x, qb)
    assert torch.allclose(out[0], out[1], atol=1e-6)


def test_grid_mismatch_raises():
    model = build_model(tiny_config(), seed=102).eval()
    qb, _ = make_batch(lr_h=5, lr_w=6)
    with torch.no_grad():
        feats = model.features(torch.rand(1, 3, 6, 6))
        with pytest.raises(ValueError):
            model.query_rgb(feats, qb)


def test_render_output_sizes_follow_floor_rule():
    model = build_model(tiny_config(), seed=103).eval()
    img = np.random.default_rng(0).random((7, 9, 3)).astype(np.float32)
    assert model.render(img, 2.0).shape == (14, 18, 3)
    assert model.render(img, 3.7).shape == (25, 33, 3)
    assert model.render(img, 1.0).shape == (7, 9, 3)


def test_render_clamps_to_unit_range_only_when_asked():
    model = build_model(tiny_config(), seed=104).eval()
    img = np.random.default_rng(1).random((5, 5, 3)).astype(np.float32)
    out = model.render(img, 2.0)
    assert out.min() >= 0.0 and out.max() <= 1.0
    raw = model.render(img, 2.0, clamp=False)
    # The unclamped head output is unbounded; for an untrained model some
    # values generically spill outside [0, 1].
    assert raw.min() < 0.0 or raw.max() > 1.0


def test_render_chunk_size_does_not_change_output():
    model = build_model(tiny_config(), seed=105).eval()
    img = np.random.default_rng(2).random((6, 5, 3)).astype(np.float32)
    a = model.render(img, 2.5, chunk=10**9)
    for chunk in (1, 7, 64):
        b = model.render(img, 2.5, chunk=chunk)
        # Queries are independent; differences can only come from batched
        # matmul rounding, which stays at the last-ulp level.
        assert np.allclose(a, b, atol=1e-6)


def _param_names(cfg):
    return set(build_model(cfg, seed=0).parameter_census())


def test_ablation_variants_prune_expected_parameters():
    variants = ablation_variants(tiny_config())
    assert set(variants) == {
        "full",
        "no_local_attention",
        "no_texture_fusion",
        "no_sine_texture",
        "no_texture_decoder",
    }
    full = _param_names(variants["full"])

    missing = full - _param_names(variants["no_local_attention"])
    assert missing and all(n.startswith("mixer.") for n in missing)
    assert _param_names(variants["no_local_attention"]) - full == set()

    missing = full - _param_names(variants["no_texture_fusion"])
    assert missing and all(n.startswith("fusion.") for n in missing)

    gone = full - _param_names(variants["no_sine_texture"])
    new = _param_names(variants["no_sine_texture"]) - full
    assert gone and all(n.startswith("texture.") for n in gone)
    assert new and all(n.startswith("texture.") for n in new)

    missing = full - _param_names(variants["no_texture_decoder"])
    assert missing and all(n.startswith("texture_decoder.") for n in missing)


def test_texture_module_absent_when_nothing_consumes_it():
    cfg = tiny_config(use_texture_fusion=False, use_texture_decoder=False)
    model = SRModel(cfg)
    assert model.texture is None
    assert all(not n.startswith("texture.") for n in model.parameter_census())


def test_ablated_forward_still_runs():
    qb, qs = make_batch(lr_h=4, lr_w=4, scale=2.0)
    x = torch.rand(1, 3, 4, 4)
    for name, cfg in ablation_variants(tiny_config()).items():
        model = build_model(cfg, seed=9).eval()
        with torch.no_grad():
            out = model(x, qb)
        assert out.shape == (1, qs.hr_coords.shape[0], 3), name
        assert torch.all(torch.isfinite(out)), name
