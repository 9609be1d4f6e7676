"""
Error maps: model vs plain bicubic
==================================

Reconstruct one image at x2 with the trained model and with bicubic
resampling, score both against the ground truth, and render absolute-error
heat maps (black = exact, white = worst pixel).  The interesting part is
where the errors sit: bicubic concentrates its error on the gratings,
the model's residue is spread more evenly.

The 300-step checkpoint from 02_train_small.py is undertrained, so do not
be surprised if bicubic still wins on psnr here; the 2000-step budget used
by the acceptance suite clears bicubic by several dB.
"""

from pathlib import Path

import numpy as np

from texsr.checkpoint import load_checkpoint
from texsr.metrics import error_map, psnr, ssim
from texsr.pipeline import load_image, save_image
from texsr.resample import bicubic_resize, degrade

here = Path(__file__).parent
out = here / "out" / "errors"
out.mkdir(parents=True, exist_ok=True)

model, _ = load_checkpoint(here / "out" / "run" / "last.ckpt")
model.eval()

img = load_image(here / "out" / "corpus" / "tex01.png")
lr = degrade(img, 2.0, out_hw=(48, 48)).astype(np.float32)

sr = model.render(lr, 2.0)
bi = np.clip(bicubic_resize(lr, 96, 96), 0.0, 1.0)

for name, pred in [("model", sr), ("bicubic", bi)]:
    print(f"{name:>8}: psnr {psnr(pred, img):6.2f} dB  ssim {ssim(pred, img):.4f}")
    save_image(out / f"{name}_x2.png", pred)
    save_image(out / f"{name}_error.png", error_map(pred, img))

print(f"outputs in {out}")
