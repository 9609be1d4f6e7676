"""Training pipeline: data loading, pair sampling, optimization, logging.

A training pair is made by cropping a high-resolution patch, simulating a
coarser capture of it, and supervising the model at a random subset of the
patch's own pixel centers.  The magnification is drawn fresh per sample,
so one trained network serves all scales in the sampled range.
"""

import json
import math
import time
from dataclasses import dataclass, asdict, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from . import geometry
from .errors import ConfigError, DataError, NumericalError
from .metrics import psnr
from .model import ModelConfig, QueryBatch, build_model
from .checkpoint import save_checkpoint
from .resample import degrade

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}


def discover_images(root):
    """Sorted list of image paths under a directory (non-recursive dirs ok)."""
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"image directory not found: {root}")
    paths = sorted(
        p for p in root.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file()
    )
    if not paths:
        raise DataError(f"no images found under {root}")
    return paths


def load_image(path):
    """Image file -> float32 [H, W, 3] in [0, 1]."""
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    except (OSError, ValueError) as e:
        raise DataError(f"cannot load image {path}: {e}") from e
    return arr


def save_image(path, arr):
    """Float array in [0, 1] -> 8-bit image file."""
    a = np.clip(np.asarray(arr), 0.0, 1.0)
    Image.fromarray((a * 255.0 + 0.5).astype(np.uint8)).save(path)


@dataclass
class TrainConfig:
    steps: int = 2000
    batch_size: int = 4
    lr: float = 1e-4
    lr_patch: int = 48
    n_query: int = 2304
    scale_min: float = 1.0
    scale_max: float = 4.0
    seed: int = 0
    val_every: int = 500
    val_scales: tuple = (2.0,)
    checkpoint_every: int = 500
    out_dir: str = "runs/default"

    def __post_init__(self):
        self.val_scales = tuple(float(s) for s in self.val_scales)
        if self.steps < 1 or self.batch_size < 1 or self.n_query < 1:
            raise ConfigError("train.steps, train.batch_size, train.n_query must be >= 1")
        if self.lr <= 0:
            raise ConfigError(f"train.lr must be positive, got {self.lr}")
        if self.lr_patch < 8:
            raise ConfigError(f"train.lr_patch must be >= 8, got {self.lr_patch}")
        if not (1.0 <= self.scale_min <= self.scale_max):
            raise ConfigError(
                f"scale range [{self.scale_min}, {self.scale_max}] must satisfy 1 <= min <= max"
            )

    def to_dict(self):
        d = asdict(self)
        d["val_scales"] = list(self.val_scales)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class TrainSample:
    lr: np.ndarray      # [p, p, 3] float32
    coords: np.ndarray  # [n, 2] float64 query positions
    rgb: np.ndarray     # [n, 3] float32 ground truth
    cell: tuple         # query footprint of the HR patch grid
    scale: float


def sample_training_pair(img, rng, lr_patch=48, n_query=2304, scale_range=(1.0, 4.0)):
    """Draw one (degraded patch, query pixels) pair from a training image.

    The crop side is ceil(lr_patch * m) so the degraded version is exactly
    lr_patch wide; queries are cell centers of the crop's own grid, sampled
    without replacement (all of them if the crop has fewer than n_query).
    """
    m = float(rng.uniform(scale_range[0], scale_range[1]))
    crop = math.ceil(lr_patch * m)
    h, w = img.shape[:2]
    if h < crop or w < crop:
        raise DataError(
            f"image {h}x{w} too small for a {crop}x{crop} crop (scale {m:.2f})"
        )
    y0 = int(rng.integers(0, h - crop + 1))
    x0 = int(rng.integers(0, w - crop + 1))
    hr = np.asarray(img[y0 : y0 + crop, x0 : x0 + crop], dtype=np.float64)

    lr = degrade(hr, m, out_hw=(lr_patch, lr_patch)).astype(np.float32)

    grid = geometry.coord_grid(crop, crop).reshape(-1, 2)
    n = min(n_query, crop * crop)
    picks = rng.choice(crop * crop, size=n, replace=False)
    coords = grid[picks]
    flat_rgb = hr.reshape(-1, 3)[picks].astype(np.float32)
    return TrainSample(
        lr=lr,
        coords=coords,
        rgb=flat_rgb,
        cell=(2.0 / crop, 2.0 / crop),
        scale=m,
    )


def _batch_to_tensors(samples, lr_patch, device, dtype):
    lr = np.stack([s.lr for s in samples]).transpose(0, 3, 1, 2)
    x = torch.from_numpy(lr).to(device=device, dtype=dtype)
    query_sets = [
        geometry.query_set_for_coords(lr_patch, lr_patch, s.coords, s.cell)
        for s in samples
    ]
    qb = QueryBatch.from_query_sets(query_sets, device=device, dtype=dtype)
    target = torch.from_numpy(np.stack([s.rgb for s in samples])).to(device, dtype)
    return x, qb, target


@dataclass
class TrainResult:
    steps: int
    final_loss: float
    best_val_psnr: float
    checkpoint_path: str
    best_checkpoint_path: str
    log_path: str
    loss_history: list = field(default_factory=list)


def _first_bad_gradient(model):
    for name, p in model.named_parameters():
        if p.grad is not None and not torch.all(torch.isfinite(p.grad)):
            return name
    return None


def validate_psnr(model, images, scales):
    """Mean PSNR of full renders against originals, per scale."""
    model.eval()
    out = {}
    for s in scales:
        vals = []
        for img in images:
            h, w = img.shape[:2]
            lr_h, lr_w = math.floor(h / s), math.floor(w / s)
            if lr_h < 8 or lr_w < 8:
                continue
            lr = degrade(img, s, out_hw=(lr_h, lr_w)).astype(np.float32)
            pred = model.render(lr, s)
            gt = img[: pred.shape[0], : pred.shape[1]]
            vals.append(psnr(pred, gt))
        if vals:
            out[float(s)] = float(np.mean(vals))
    model.train()
    return out


def train(images, train_cfg: TrainConfig, model_cfg: ModelConfig, val_images=None, device="cpu"):
    """Optimize a model on a list of float [H, W, 3] images.

    Writes per-step loss records and periodic validation records to
    `<out_dir>/train_log.jsonl`, keeps `last.ckpt` fresh, and tracks the
    best validation PSNR in `best.ckpt`.  Aborts with NumericalError the
    moment the loss or any gradient stops being finite.
    """
    if not images:
        raise DataError("no training images given")
    out_dir = Path(train_cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "train_log.jsonl"
    last_path = out_dir / "last.ckpt"
    best_path = out_dir / "best.ckpt"

    rng = np.random.default_rng(train_cfg.seed)
    model = build_model(model_cfg, seed=train_cfg.seed).to(device)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=train_cfg.lr)

    usable = [
        img
        for img in images
        if min(img.shape[:2]) >= math.ceil(train_cfg.lr_patch * train_cfg.scale_max)
    ]
    if not usable:
        raise DataError(
            "every training image is smaller than the largest required crop "
            f"({math.ceil(train_cfg.lr_patch * train_cfg.scale_max)} px)"
        )

    best_val = -math.inf
    loss_history = []
    final_loss = math.nan
    t0 = time.time()
    with open(log_path, "w") as log:
        for step in range(1, train_cfg.steps + 1):
            samples = []
            for _ in range(train_cfg.batch_size):
                img = usable[int(rng.integers(0, len(usable)))]
                samples.append(
                    sample_training_pair(
                        img,
                        rng,
                        lr_patch=train_cfg.lr_patch,
                        n_query=train_cfg.n_query,
                        scale_range=(train_cfg.scale_min, train_cfg.scale_max),
                    )
                )
            x, qb, target = _batch_to_tensors(
                samples, train_cfg.lr_patch, device, torch.float32
            )
            opt.zero_grad(set_to_none=True)
            pred = model(x, qb)
            loss = torch.nn.functional.l1_loss(pred, target)
            loss_val = float(loss.detach())
            if not math.isfinite(loss_val):
                raise NumericalError(f"non-finite loss {loss_val} at step {step}")
            loss.backward()
            bad = _first_bad_gradient(model)
            if bad is not None:
                raise NumericalError(
                    f"non-finite gradient in {bad} at step {step}"
                )
            opt.step()

            final_loss = loss_val
            loss_history.append(loss_val)
            log.write(
                json.dumps(
                    {
                        "step": step,
                        "loss": loss_val,
                        "lr": train_cfg.lr,
                        "scale_mean": float(np.mean([s.scale for s in samples])),
                    }
                )
                + "\n"
            )

            if train_cfg.val_every and step % train_cfg.val_every == 0 and val_images:
                scores = validate_psnr(model, val_images, train_cfg.val_scales)
                log.write(
                    json.dumps({"step": step, "event": "val", "psnr": scores}) + "\n"
                )
                log.flush()
                mean_score = float(np.mean(list(scores.values()))) if scores else -math.inf
                if mean_score > best_val:
                    best_val = mean_score
                    save_checkpoint(
                        best_path,
                        model,
                        step=step,
                        extra={"train_config": train_cfg.to_dict(), "val_psnr": scores},
                    )

            if train_cfg.checkpoint_every and step % train_cfg.checkpoint_every == 0:
                save_checkpoint(
                    last_path, model, step=step, extra={"train_config": train_cfg.to_dict()}
                )

    save_checkpoint(
        last_path,
        model,
        step=train_cfg.steps,
        extra={
            "train_config": train_cfg.to_dict(),
            "wall_seconds": time.time() - t0,
        },
    )
    if not best_path.exists():
        save_checkpoint(best_path, model, step=train_cfg.steps, extra={"train_config": train_cfg.to_dict()})
    return TrainResult(
        steps=train_cfg.steps,
        final_loss=final_loss,
        best_val_psnr=best_val,
        checkpoint_path=str(last_path),
        best_checkpoint_path=str(best_path),
        log_path=str(log_path),
        loss_history=loss_history,
    )
