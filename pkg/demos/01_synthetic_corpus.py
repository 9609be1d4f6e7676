"""
Generate a small synthetic texture corpus
=========================================

The training pipeline reads ordinary image files from a directory.  This
writes eight procedural texture images (color ramps, oriented sine
gratings, soft blobs) that are easy to overfit and cheap to regenerate.
"""

from pathlib import Path

from texsr.pipeline import save_image
from texsr.synth import make_corpus

out = Path(__file__).parent / "out" / "corpus"
out.mkdir(parents=True, exist_ok=True)

for i, img in enumerate(make_corpus(8, size=96, seed=0)):
    save_image(out / f"tex{i:02d}.png", img)
    print(f"wrote {out / f'tex{i:02d}.png'}")
