"""Command line entry point.

Subcommands: train, eval, infer, ablate, serve.  Configuration comes from
an optional key=value file plus --set overrides; a few common knobs also
have dedicated flags that win over both.  Errors map to exit codes via
the exception hierarchy (config 2, data 3, numerical 4, other known
failures 1).
"""

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, TexSRError


def _add_config_args(p):
    p.add_argument("--config", help="key=value config file")
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        dest="sets",
        help="override one config key (repeatable)",
    )
    p.add_argument("--device", default="cpu", help="torch device hint (default cpu)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="texsr",
        description="arbitrary-scale super-resolution: train, evaluate, render, serve",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="optimize a model on an image directory")
    _add_config_args(p)
    p.add_argument("--seed", type=int, help="override train.seed")
    p.add_argument("--out", help="override train.out_dir")

    p = sub.add_parser("eval", help="score a checkpoint against ground truth")
    _add_config_args(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scales", help="comma-separated scale factors, e.g. 2,3,4")
    p.add_argument("--tile", type=int, help="render tiled with this tile size")
    p.add_argument("--out", help="write per-image rows as JSON lines")

    p = sub.add_parser("infer", help="upscale one image file")
    _add_config_args(p)
    p.add_argument("input", help="image file to upscale")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scale", type=float, required=True)
    p.add_argument("--tile", type=int, help="tile size (0 renders in one piece)")
    p.add_argument("--overlap", type=int, help="tile overlap in source cells")
    p.add_argument("--out", help="output path (default <input>_x<scale>.png)")

    p = sub.add_parser("ablate", help="train and score every ablation variant")
    _add_config_args(p)
    p.add_argument("--seed", type=int, help="override train.seed")
    p.add_argument("--out", help="write the table rows as JSON lines")

    p = sub.add_parser("serve", help="run the HTTP tile service")
    _add_config_args(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--port", type=int, help="override serve.port")
    return parser


def _load_train_images(cfg):
    from .pipeline import discover_images, load_image

    root = cfg.require("data.root", hint="directory of training images")
    paths = discover_images(root)
    images = [load_image(p) for p in paths]
    val_root = cfg.get("data.val_root")
    val_images = None
    if val_root:
        val_images = [load_image(p) for p in discover_images(val_root)]
    return images, val_images


def cmd_train(args):
    cfg = load_config(args.config, args.sets)
    if args.seed is not None:
        cfg.values["train.seed"] = args.seed
    if args.out is not None:
        cfg.values["train.out_dir"] = args.out
    from .pipeline import train

    images, val_images = _load_train_images(cfg)
    result = train(
        images, cfg.train_config(), cfg.model_config(), val_images=val_images, device=args.device
    )
    print(f"trained {result.steps} steps, final loss {result.final_loss:.5f}")
    if result.best_val_psnr is not None:
        print(f"best validation psnr {result.best_val_psnr:.3f} dB")
    print(f"checkpoint: {result.checkpoint_path}")
    return 0


def _eval_report(checkpoint, cfg, scales, tile, device="cpu"):
    from .checkpoint import load_checkpoint
    from .evaluate import evaluate_model
    from .pipeline import discover_images, load_image

    model, _ = load_checkpoint(checkpoint)
    model.to(device)
    root = cfg.require("data.root", hint="directory of evaluation images")
    paths = discover_images(root)
    images = [load_image(p) for p in paths]
    ids = [Path(p).stem for p in paths]
    return evaluate_model(model, images, scales, image_ids=ids, tile=tile)


def cmd_eval(args):
    cfg = load_config(args.config, args.sets)
    if args.scales:
        scales = tuple(float(s) for s in args.scales.split(","))
    else:
        scales = cfg.get("eval.scales")
    report = _eval_report(args.checkpoint, cfg, scales, args.tile, device=args.device)
    print(report.format_table())
    if args.out:
        with open(args.out, "w") as f:
            for row in report.to_records():
                f.write(json.dumps(row) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_infer(args):
    cfg = load_config(args.config, args.sets)
    from .checkpoint import load_checkpoint
    from .pipeline import load_image, save_image

    if args.scale < 1.0:
        raise ConfigError(f"--scale must be >= 1, got {args.scale}")
    tile = args.tile if args.tile is not None else cfg.get("infer.tile")
    overlap = args.overlap if args.overlap is not None else cfg.get("infer.overlap")
    if tile and tile < 48:
        raise ConfigError(f"tile must be >= 48 (or 0 for untiled), got {tile}")
    model, _ = load_checkpoint(args.checkpoint)
    model.to(args.device)
    img = load_image(args.input)
    h, w = img.shape[:2]
    if tile and max(h, w) > tile:
        from .tiling import stitch_render

        out = stitch_render(model, img, args.scale, tile=tile, overlap=overlap)
    else:
        out = model.render(img, args.scale)
    out_path = args.out
    if out_path is None:
        stem = Path(args.input).stem
        out_path = str(Path(args.input).with_name(f"{stem}_x{args.scale:g}.png"))
    save_image(out_path, out)
    print(f"wrote {out_path} ({out.shape[1]}x{out.shape[0]})")
    return 0


def cmd_ablate(args):
    cfg = load_config(args.config, args.sets)
    if args.seed is not None:
        cfg.values["train.seed"] = args.seed
    from .checkpoint import load_checkpoint
    from .evaluate import evaluate_model
    from .model import ablation_variants, build_model
    from .pipeline import TrainConfig, train

    images, val_images = _load_train_images(cfg)
    eval_images = val_images if val_images else images
    scales = cfg.get("eval.scales")
    train_cfg = cfg.train_config()
    base_out = Path(train_cfg.out_dir)
    rows = []
    for name, mc in ablation_variants(cfg.model_config()).items():
        tc_d = train_cfg.to_dict()
        tc_d["out_dir"] = str(base_out / name)
        result = train(
            images, TrainConfig.from_dict(tc_d), mc, val_images=val_images, device=args.device
        )
        model, _ = load_checkpoint(result.checkpoint_path)
        n_params = sum(build_model(mc).parameter_census().values())
        report = evaluate_model(model, eval_images, scales, include_bicubic=False)
        for (renderer, s), agg in sorted(report.aggregate().items()):
            rows.append(
                {
                    "variant": name,
                    "scale": s,
                    "params": n_params,
                    "psnr": agg["psnr"],
                    "ssim": agg["ssim"],
                }
            )
    header = f"{'variant':<22} {'scale':>6} {'params':>10} {'psnr':>8} {'ssim':>8}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(
            f"{r['variant']:<22} {r['scale']:>6.2f} {r['params']:>10d}"
            f" {r['psnr']:>8.3f} {r['ssim']:>8.4f}"
        )
    if args.out:
        with open(args.out, "w") as f:
            for r in rows:
                f.write(json.dumps(r) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_serve(args):
    cfg = load_config(args.config, args.sets)
    port = args.port if args.port is not None else cfg.get("serve.port")
    import uvicorn

    from .service import app_from_paths

    app = app_from_paths(
        args.checkpoint,
        cfg.require("serve.images", hint="directory of images to serve"),
        max_scale=cfg.get("serve.max_scale"),
        max_region=cfg.get("serve.max_region"),
        cache_size=cfg.get("serve.cache"),
    )
    uvicorn.run(app, host="127.0.0.1", port=port)
    return 0


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "infer": cmd_infer,
    "ablate": cmd_ablate,
    "serve": cmd_serve,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except TexSRError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
