import pytest

from texsr.config import load_config, parse_assignment
from texsr.errors import ConfigError


def test_defaults_without_file():
    cfg = load_config()
    assert cfg.get("infer.tile") == 96
    assert cfg.get("infer.overlap") == 12
    assert cfg.get("serve.max_scale") == 8.0
    assert cfg.get("data.root") is None


def test_file_parsing(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(
        "# comment line\n"
        "train.steps = 50\n"
        "model.encoder_blocks=2   # trailing comment\n"
        "train.val_scales = 2.0, 3.7\n"
        "model.use_sine_texture = false\n"
        "\n"
        "data.root = /tmp/imgs\n"
    )
    cfg = load_config(p)
    assert cfg.get("train.steps") == 50
    assert cfg.get("model.encoder_blocks") == 2
    assert cfg.get("train.val_scales") == (2.0, 3.7)
    assert cfg.get("model.use_sine_texture") is False
    assert cfg.get("data.root") == "/tmp/imgs"


def test_set_overrides_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("train.steps = 50\n")
    cfg = load_config(p, sets=["train.steps=7", "train.lr=0.003"])
    assert cfg.get("train.steps") == 7
    assert cfg.get("train.lr") == 0.003


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config key"):
        parse_assignment("train.stepz=10")


def test_bad_value_rejected():
    with pytest.raises(ConfigError, match="integer"):
        parse_assignment("train.steps=soon")
    with pytest.raises(ConfigError, match="boolean"):
        parse_assignment("model.use_sine_texture=maybe")


def test_file_error_names_line(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("train.steps = 10\nbogus.key = 1\n")
    with pytest.raises(ConfigError, match=r"run\.cfg:2"):
        load_config(p)


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/path.cfg")


def test_model_and_train_config_assembly():
    cfg = load_config(
        sets=[
            "model.encoder_blocks=1",
            "model.pixel_dim=8",
            "model.pixel_decoder_hidden=16,16",
            "train.steps=5",
            "train.out_dir=/tmp/x",
        ]
    )
    mc = cfg.model_config()
    assert mc.encoder_blocks == 1
    assert mc.pixel_dim == 8
    assert mc.pixel_decoder_hidden == (16, 16)
    tc = cfg.train_config()
    assert tc.steps == 5
    assert tc.out_dir == "/tmp/x"
    # untouched fields keep their dataclass defaults
    assert tc.batch_size == 4


def test_require_reports_key():
    cfg = load_config()
    with pytest.raises(ConfigError, match="data.root"):
        cfg.require("data.root")
