"""Flat key=value configuration with dotted keys and typed parsing.

A config file is plain text: one `key = value` per line, `#` comments,
blank lines ignored.  The same keys can be overridden on the command line
via repeated `--set key=value`.  Every key is declared in SCHEMA with a
parser; unknown keys fail loudly instead of being carried along silently.
"""

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .model import ModelConfig
from .pipeline import TrainConfig


def _parse_bool(raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def _parse_int(raw):
    try:
        return int(raw.strip())
    except ValueError as e:
        raise ConfigError(f"expected an integer, got {raw!r}") from e


def _parse_float(raw):
    try:
        return float(raw.strip())
    except ValueError as e:
        raise ConfigError(f"expected a number, got {raw!r}") from e


def _parse_str(raw):
    return raw.strip()


def _parse_int_list(raw):
    return tuple(_parse_int(p) for p in raw.split(",") if p.strip())


def _parse_float_list(raw):
    return tuple(_parse_float(p) for p in raw.split(",") if p.strip())


SCHEMA = {
    "model.encoder_blocks": _parse_int,
    "model.pixel_dim": _parse_int,
    "model.tex_dim": _parse_int,
    "model.use_local_attention": _parse_bool,
    "model.use_texture_fusion": _parse_bool,
    "model.use_sine_texture": _parse_bool,
    "model.use_texture_decoder": _parse_bool,
    "model.pixel_decoder_hidden": _parse_int_list,
    "model.texture_decoder_hidden": _parse_int_list,
    "model.fusion_hidden": _parse_int,
    "model.retrieval_chunk": _parse_int,
    "train.steps": _parse_int,
    "train.batch_size": _parse_int,
    "train.lr": _parse_float,
    "train.lr_patch": _parse_int,
    "train.n_query": _parse_int,
    "train.scale_min": _parse_float,
    "train.scale_max": _parse_float,
    "train.seed": _parse_int,
    "train.val_every": _parse_int,
    "train.val_scales": _parse_float_list,
    "train.checkpoint_every": _parse_int,
    "train.out_dir": _parse_str,
    "data.root": _parse_str,
    "data.val_root": _parse_str,
    "eval.scales": _parse_float_list,
    "infer.tile": _parse_int,
    "infer.overlap": _parse_int,
    "serve.port": _parse_int,
    "serve.images": _parse_str,
    "serve.max_scale": _parse_float,
    "serve.max_region": _parse_int,
    "serve.cache": _parse_int,
}

DEFAULTS = {
    "eval.scales": (2.0, 3.0, 4.0, 6.0, 8.0),
    "infer.tile": 96,
    "infer.overlap": 12,
    "serve.port": 8000,
    "serve.max_scale": 8.0,
    "serve.max_region": 16384,
    "serve.cache": 128,
}


@dataclass
class AppConfig:
    values: dict

    def get(self, key, default=None):
        return self.values.get(key, DEFAULTS.get(key, default))

    def require(self, key, hint=""):
        v = self.get(key)
        if v is None:
            msg = f"config key {key!r} is required"
            if hint:
                msg += f" ({hint})"
            raise ConfigError(msg)
        return v

    def _section(self, prefix):
        plen = len(prefix)
        return {k[plen:]: v for k, v in self.values.items() if k.startswith(prefix)}

    def model_config(self):
        return ModelConfig.from_dict(self._section("model."))

    def train_config(self):
        return TrainConfig.from_dict(self._section("train."))


def parse_assignment(text):
    if "=" not in text:
        raise ConfigError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    if key not in SCHEMA:
        import difflib

        close = difflib.get_close_matches(key, SCHEMA, n=3)
        hint = f" (did you mean {', '.join(close)}?)" if close else ""
        raise ConfigError(
            f"unknown config key {key!r}{hint}; valid keys: {', '.join(sorted(SCHEMA))}"
        )
    return key, SCHEMA[key](raw)


def load_config(path=None, sets=()):
    """Read a config file (optional) and apply --set overrides in order."""
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        for ln, line in enumerate(p.read_text().splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            try:
                key, value = parse_assignment(stripped)
            except ConfigError as e:
                raise ConfigError(f"{p}:{ln}: {e}") from e
            values[key] = value
    for assignment in sets:
        key, value = parse_assignment(assignment)
        values[key] = value
    return AppConfig(values)
