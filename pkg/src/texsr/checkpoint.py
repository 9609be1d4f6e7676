"""Single-file model checkpoints with tamper evidence.

Layout, all integers little-endian:

    bytes 0..8    magic b"TEXSRCK1"
    bytes 8..16   header length (u64)
    bytes 16..48  sha256 of the header JSON (raw digest)
    header JSON   UTF-8, schema below
    payload       all parameters as raw little-endian float32, concatenated

The header carries the model config, the training step, a manifest of
parameter names/shapes/offsets, and a sha256 of the payload.  Loading
verifies both digests and the manifest against a freshly built model, so
any single flipped or truncated byte is detected rather than silently
producing a subtly different network.  Parameters are stored in float32
regardless of the module's runtime dtype.
"""

import hashlib
import json
import os

import numpy as np
import torch

from .errors import CheckpointError
from .model import ModelConfig, build_model

MAGIC = b"TEXSRCK1"
FORMAT_VERSION = 1
_PREFIX_LEN = len(MAGIC) + 8 + 32


def save_checkpoint(path, model, step=0, extra=None):
    """Write model weights and config to `path` atomically."""
    manifest = []
    chunks = []
    offset = 0
    for name, p in model.named_parameters():
        arr = p.detach().cpu().numpy().astype("<f4")
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        raw = arr.tobytes()
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)

    header = {
        "format_version": FORMAT_VERSION,
        "model_config": model.config.to_dict(),
        "step": int(step),
        "manifest": manifest,
        "data_len": len(payload),
        "data_sha256": hashlib.sha256(payload).hexdigest(),
        "extra": extra or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    blob = b"".join(
        [
            MAGIC,
            len(header_bytes).to_bytes(8, "little"),
            hashlib.sha256(header_bytes).digest(),
            header_bytes,
            payload,
        ]
    )
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(blob)
    os.replace(tmp, path)
    return header


def read_header(path):
    """Parse and verify the header only; raises CheckpointError on damage."""
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    return _split(blob)[0]


def _split(blob):
    if len(blob) < _PREFIX_LEN:
        raise CheckpointError(
            f"file too short to be a checkpoint ({len(blob)} bytes)"
        )
    if blob[:8] != MAGIC:
        raise CheckpointError(f"bad magic {blob[:8]!r}, expected {MAGIC!r}")
    header_len = int.from_bytes(blob[8:16], "little")
    if header_len <= 0 or _PREFIX_LEN + header_len > len(blob):
        raise CheckpointError(f"header length {header_len} exceeds file size")
    stored_digest = blob[16:48]
    header_bytes = blob[_PREFIX_LEN : _PREFIX_LEN + header_len]
    if hashlib.sha256(header_bytes).digest() != stored_digest:
        raise CheckpointError("header checksum mismatch (corrupt or tampered)")
    try:
        header = json.loads(header_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"header is not valid JSON: {e}") from e

    for key in ("format_version", "model_config", "step", "manifest", "data_len", "data_sha256"):
        if key not in header:
            raise CheckpointError(f"header missing required field {key!r}")
    if header["format_version"] != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {header['format_version']!r}"
        )
    payload = blob[_PREFIX_LEN + header_len :]
    if len(payload) != header["data_len"]:
        raise CheckpointError(
            f"payload is {len(payload)} bytes, header says {header['data_len']}"
        )
    if hashlib.sha256(payload).hexdigest() != header["data_sha256"]:
        raise CheckpointError("payload checksum mismatch (corrupt or tampered)")
    return header, payload


def load_checkpoint(path, seed=None):
    """Rebuild the model a checkpoint describes and load its weights."""
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    header, payload = _split(blob)

    try:
        config = ModelConfig.from_dict(header["model_config"])
    except Exception as e:
        raise CheckpointError(f"checkpoint model config invalid: {e}") from e
    model = build_model(config, seed=seed)

    by_name = {}
    for entry in header["manifest"]:
        if not isinstance(entry, dict) or not {"name", "shape", "offset"} <= set(entry):
            raise CheckpointError(f"malformed manifest entry: {entry!r}")
        by_name[entry["name"]] = entry

    params = dict(model.named_parameters())
    missing = set(params) - set(by_name)
    unexpected = set(by_name) - set(params)
    if missing:
        raise CheckpointError(f"checkpoint lacks parameters: {sorted(missing)}")
    if unexpected:
        raise CheckpointError(f"checkpoint has unknown parameters: {sorted(unexpected)}")

    with torch.no_grad():
        for name, p in params.items():
            entry = by_name[name]
            shape = tuple(entry["shape"])
            if shape != tuple(p.shape):
                raise CheckpointError(
                    f"parameter {name}: checkpoint shape {shape} != model shape {tuple(p.shape)}"
                )
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            start = entry["offset"]
            end = start + 4 * count
            if start < 0 or end > len(payload):
                raise CheckpointError(f"parameter {name}: payload range out of bounds")
            arr = np.frombuffer(payload, dtype="<f4", count=count, offset=start)
            p.copy_(torch.from_numpy(arr.reshape(shape).copy()).to(p.dtype))
    return model, header
