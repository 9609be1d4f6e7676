"""Benchmark a trained model against ground truth at chosen scales."""

import math

import numpy as np

from .errors import DataError
from .metrics import MetricReport, psnr, ssim
from .resample import bicubic_resize, degrade


def evaluate_model(model, images, scales, image_ids=None, include_bicubic=True, tile=None):
    """Degrade each image per scale, reconstruct, and score PSNR/SSIM.

    The low-resolution input is floor(size / s) per axis; the model output
    is floor(s * lr_size), and ground truth is the top-left crop of that
    size.  With include_bicubic a plain bicubic upscale of the same input
    is scored alongside for reference.  `tile` switches reconstruction to
    the tiled path (same signature as stitch_render).
    """
    if image_ids is None:
        image_ids = [f"img{i:03d}" for i in range(len(images))]
    report = MetricReport()
    model.eval()
    for img_id, img in zip(image_ids, images):
        h, w = np.asarray(img).shape[:2]
        for s in scales:
            s = float(s)
            lr_h, lr_w = math.floor(h / s), math.floor(w / s)
            if lr_h < 12 or lr_w < 12:
                raise DataError(
                    f"{img_id}: {h}x{w} too small to evaluate at scale {s}"
                )
            lr = degrade(img, s, out_hw=(lr_h, lr_w)).astype(np.float32)
            if tile is None:
                pred = model.render(lr, s)
            else:
                from .tiling import stitch_render

                pred = stitch_render(model, lr, s, tile=tile)
            gt = np.asarray(img, dtype=np.float64)[: pred.shape[0], : pred.shape[1]]
            report.add(img_id, s, psnr(pred, gt), ssim(pred, gt))
            if include_bicubic:
                up = np.clip(bicubic_resize(lr, pred.shape[0], pred.shape[1]), 0.0, 1.0)
                report.add(img_id, s, psnr(up, gt), ssim(up, gt), renderer="bicubic")
    return report
