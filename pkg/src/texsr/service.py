"""HTTP tile service for interactive zooming.

Serves lossless PNG tiles rendered on the full image's output grid, so a
client can assemble adjacent tiles with no seams and no client-side
resampling.  Per-image encoder features are computed once and reused for
every tile; encoded tiles go through a small LRU keyed by the full request
plus the checkpoint digest, which makes repeat requests byte-identical by
construction.
"""

import hashlib
import io
import math
import threading
import time
from collections import OrderedDict
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from PIL import Image

from .checkpoint import load_checkpoint
from .resample import bicubic_resize
from .tiling import image_features, render_region

RENDERERS = ("iste", "bicubic")


class _LRU:
    def __init__(self, maxsize):
        self.maxsize = max(1, int(maxsize))
        self._data = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                self.hits += 1
                return self._data[key]
            self.misses += 1
            return None

    def put(self, key, value):
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)


def encode_png(arr):
    """Float [H, W, 3] in [0, 1] -> lossless PNG bytes."""
    a = np.clip(np.asarray(arr), 0.0, 1.0)
    q = (a * 255.0 + 0.5).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(q).save(buf, format="PNG")
    return buf.getvalue()


def create_app(
    model, images, max_scale=8.0, max_region=16384, cache_size=128, checkpoint_digest=""
):
    """Build the FastAPI app.

    `images` maps image id -> float32 [H, W, 3] array in [0, 1].  Features
    are encoded lazily per image and kept for the life of the process;
    memory grows with the number of distinct images served.  `max_region`
    caps w*h per request so one call cannot monopolize the renderer.
    """
    model.eval()
    app = FastAPI(title="texsr tiles")
    # the viewer is a static page that may be hosted from another origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET"],
        allow_headers=["*"],
        expose_headers=["X-Width", "X-Height", "X-Scale", "X-Render-Ms"],
    )
    feats = {}
    bicubic_full = _LRU(6)
    tiles = _LRU(cache_size)
    lock = threading.Lock()

    def features_for(image_id):
        with lock:
            f = feats.get(image_id)
        if f is None:
            f = image_features(model, images[image_id])
            with lock:
                feats.setdefault(image_id, f)
                f = feats[image_id]
        return f

    def bicubic_for(image_id, scale):
        key = (image_id, scale)
        up = bicubic_full.get(key)
        if up is None:
            img = images[image_id]
            h, w = img.shape[:2]
            up = bicubic_resize(img, math.floor(scale * h), math.floor(scale * w))
            bicubic_full.put(key, up)
        return up

    @app.get("/meta")
    def meta():
        return {
            "images": [
                {"id": k, "width": int(v.shape[1]), "height": int(v.shape[0])}
                for k, v in sorted(images.items())
            ],
            "renderers": list(RENDERERS),
            "max_scale": max_scale,
            "max_region": max_region,
            "checkpoint": checkpoint_digest,
        }

    @app.get("/tile")
    def tile(image_id: str, x: int, y: int, w: int, h: int, scale: float, renderer: str = "iste"):
        if image_id not in images:
            raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")
        if renderer not in RENDERERS:
            raise HTTPException(status_code=400, detail=f"renderer must be one of {RENDERERS}")
        if not (1.0 <= scale <= max_scale):
            raise HTTPException(
                status_code=400, detail=f"scale must be in [1, {max_scale}], got {scale}"
            )
        if w < 1 or h < 1:
            raise HTTPException(status_code=400, detail="w and h must be >= 1")
        if w * h > max_region:
            raise HTTPException(
                status_code=400, detail=f"region {w}x{h} exceeds max area {max_region}"
            )
        img = images[image_id]
        img_h, img_w = img.shape[:2]
        if x < 0 or y < 0 or x + w > img_w or y + h > img_h:
            raise HTTPException(
                status_code=400,
                detail=f"region ({x},{y})+{w}x{h} outside image {img_w}x{img_h}",
            )

        t_start = time.perf_counter()
        key = (image_id, x, y, w, h, scale, renderer, checkpoint_digest)
        png = tiles.get(key)
        if png is None:
            if renderer == "bicubic":
                up = bicubic_for(image_id, scale)
                r0, c0 = math.floor(scale * y), math.floor(scale * x)
                rh, cw = math.floor(scale * h), math.floor(scale * w)
                out = up[r0 : r0 + rh, c0 : c0 + cw]
            else:
                out = render_region(
                    model, img, x, y, w, h, scale, feats=features_for(image_id)
                )
            png = encode_png(out)
            tiles.put(key, png)
        elapsed_ms = (time.perf_counter() - t_start) * 1000.0
        headers = {
            "X-Width": str(math.floor(scale * w)),
            "X-Height": str(math.floor(scale * h)),
            "X-Scale": repr(scale),
            "X-Render-Ms": f"{max(elapsed_ms, 0.001):.3f}",
        }
        return Response(content=png, media_type="image/png", headers=headers)

    return app


def load_image_dir(images_dir):
    """Directory of image files -> {stem: float array}, ids must be unique.

    An existing but empty directory yields an empty catalog; the service can
    still start and answer /meta.
    """
    from .errors import DataError
    from .pipeline import IMAGE_SUFFIXES, load_image

    root = Path(images_dir)
    if not root.is_dir():
        raise DataError(f"image directory not found: {root}")
    paths = sorted(
        p for p in root.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file()
    )
    images = {}
    for p in paths:
        stem = p.stem
        if stem in images:
            raise DataError(f"duplicate image id {stem!r} in {images_dir}")
        images[stem] = load_image(p)
    return images


def app_from_paths(checkpoint_path, images_dir, max_scale=8.0, max_region=16384, cache_size=128):
    """Wire the app from filesystem paths (what the CLI uses)."""
    model, _ = load_checkpoint(checkpoint_path)
    with open(checkpoint_path, "rb") as f:
        digest = hashlib.sha256(f.read()).hexdigest()[:16]
    images = load_image_dir(images_dir)
    return create_app(
        model,
        images,
        max_scale=max_scale,
        max_region=max_region,
        cache_size=cache_size,
        checkpoint_digest=digest,
    )
