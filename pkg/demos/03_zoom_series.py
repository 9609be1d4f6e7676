"""
One checkpoint, many magnifications
===================================

The decoder is conditioned on continuous coordinates, so the same weights
render any scale.  This downsamples one corpus image to 48x48 and rebuilds
it at x2, x3.7, and x7.3 without touching the checkpoint in between.
Output sizes follow the floor rule: floor(48 * 3.7) = 177.
"""

from pathlib import Path

from texsr.checkpoint import load_checkpoint
from texsr.pipeline import load_image, save_image
from texsr.resample import degrade
from texsr.tiling import stitch_render

here = Path(__file__).parent
out = here / "out" / "zoom"
out.mkdir(parents=True, exist_ok=True)

model, header = load_checkpoint(here / "out" / "run" / "last.ckpt")
model.eval()

img = load_image(here / "out" / "corpus" / "tex00.png")
lr = degrade(img, 2.0, out_hw=(48, 48))
save_image(out / "input_48.png", lr)

for scale in (2.0, 3.7, 7.3):
    sr = stitch_render(model, lr, scale)
    name = f"x{scale:g}_{sr.shape[1]}x{sr.shape[0]}.png"
    save_image(out / name, sr)
    print(f"scale {scale:>4}: {sr.shape[1]}x{sr.shape[0]} -> {out / name}")
