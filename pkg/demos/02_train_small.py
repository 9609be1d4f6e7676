"""
Train a small model on the synthetic corpus
===========================================

A few hundred steps with a slimmed-down model is enough to see the loss
fall and to produce a checkpoint the other demos can reuse.  Run
01_synthetic_corpus.py first.  Takes a couple of minutes on one CPU core.
"""

from pathlib import Path

from texsr.model import ModelConfig
from texsr.pipeline import TrainConfig, discover_images, load_image, train

here = Path(__file__).parent
corpus = here / "out" / "corpus"
run_dir = here / "out" / "run"

images = [load_image(p) for p in discover_images(corpus)]

model_cfg = ModelConfig(
    encoder_blocks=3,
    pixel_dim=32,
    tex_dim=64,
    pixel_decoder_hidden=(96, 96),
    texture_decoder_hidden=(64,),
    fusion_hidden=64,
)
train_cfg = TrainConfig(
    steps=300,
    batch_size=4,
    lr=5e-4,
    lr_patch=48,
    n_query=1152,
    scale_max=2.0,   # crops of ceil(48 * m) must fit inside the 96 px images
    val_every=100,
    val_scales=(2.0,),
    out_dir=str(run_dir),
)

result = train(images, train_cfg, model_cfg, val_images=images)
print(f"final loss {result.final_loss:.4f} after {result.steps} steps")
print(f"best x2 validation psnr: {result.best_val_psnr:.2f} dB")
print(f"checkpoint: {result.checkpoint_path}")
print(f"per-step log: {result.log_path}")
