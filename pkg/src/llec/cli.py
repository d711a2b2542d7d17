"""Command-line interface: ``llec {embed,quantize,lbg,synth,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import nullcontext
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import imaging, lle, segmentation, synthetic, vq
from .geometry import load_cloud_csv, save_cloud_csv

log = logging.getLogger("llec")

DEFAULT_MAX_POINTS = 20_000


class CLIError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Parameters shared by the subcommands, with the pipeline defaults."""

    k: int = 4
    d: int = 2
    lam: float = 1e-9
    reg_tol: float = 1e-3
    eps1: float = 0.4
    eps2: float = 0.4
    eps_ball: float | None = None
    m: int = 1
    strategy: str = "bth-neighbor"
    b: int = 50
    init: str = "llec-palette"
    n_centers: int = 25
    max_iters: int = 15
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.d < 1 or self.m < 1 or self.b < 1:
            raise ValueError("k, d, m and b must be positive")
        if self.lam < 0 or self.reg_tol <= 0:
            raise ValueError("lambda must be >= 0 and reg_tol > 0")
        if self.max_iters < 1 or self.n_centers < 1:
            raise ValueError("max_iters and n_centers must be positive")

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        names = cls.__dataclass_fields__
        return cls(**{name: getattr(args, name) for name in names if hasattr(args, name)})

    def llec(self) -> segmentation.LLECConfig:
        return segmentation.LLECConfig(
            k=self.k, d=self.d, lam=self.lam, reg_tol=self.reg_tol, eps1=self.eps1,
            eps2=self.eps2, eps_ball=self.eps_ball, m=self.m,
            strategy=segmentation.SeedStrategy(kind=self.strategy, b=self.b, seed=self.seed),
        )


def _read_points(path: Path):
    """CSV cloud, or image file turned into a cloud (then also return its layout)."""
    if not path.exists():
        raise CLIError(f"input file not found: {path}")
    if path.suffix.lower() in (".csv", ".txt"):
        return load_cloud_csv(path), None
    img = imaging.read_image(path)
    return imaging.image_to_cloud(img)


def _guard(p: int, cap: int) -> None:
    if p > cap:
        raise CLIError(
            f"{p} points exceed the limit of {cap}: LLE needs p x p-scale memory and time. "
            "Downsample the image first or raise --max-points."
        )


def _write_json(path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")


def cmd_embed(args) -> None:
    cfg = RunConfig.from_args(args)
    X, _ = _read_points(args.input)
    _guard(X.shape[1], args.max_points)
    emb = lle.run_lle(X, k=cfg.k, d=cfg.d, lam=cfg.lam, reg_tol=cfg.reg_tol,
                      closed_cycle=args.closed_cycle, seed=cfg.seed)
    lle.save_embedding(args.output, emb)


def cmd_quantize(args) -> None:
    cfg = RunConfig.from_args(args)
    img = imaging.read_image(_existing(args.input))
    X, layout = imaging.image_to_cloud(img)
    _guard(X.shape[1], args.max_points)
    config = replace(cfg.llec(), closed_cycle=args.closed_cycle, prototype=args.prototype)
    clustering, emb = segmentation.llec_cluster(X, config)
    recon = segmentation.reconstruct(X, clustering)
    if args.prototype == "color":
        quantized = imaging.cloud_to_image(recon, layout)
        imaging.write_image(args.output, quantized)
        imaging.write_palette(args.palette or _sibling(args.output, ".palette.txt"),
                              clustering.prototypes, clustering.counts)
        report = imaging.quality_report(img, quantized, clustering.S).as_dict()
    else:
        report = {"n_colors": clustering.S}
    imaging.write_assignment(args.assignment or _sibling(args.output, ".labels.csv"),
                             clustering.assignment)
    if args.embedding:
        lle.save_embedding(args.embedding, emb)
    _write_json(args.report, report)


def cmd_lbg(args) -> None:
    cfg = RunConfig.from_args(args)
    img = imaging.read_image(_existing(args.input))
    X, layout = imaging.image_to_cloud(img)
    palette = None
    if cfg.init == "llec-palette":
        if args.palette is None:
            raise CLIError("--init llec-palette needs --palette (e.g. from 'llec quantize')")
        palette, _ = imaging.read_palette(_existing(args.palette))
    hand = vq.load_hand_colors(args.hand_colors) if args.hand_colors else None
    init = vq.Initializer(kind=cfg.init, n=cfg.n_centers, seed=cfg.seed, palette=palette,
                          hand_colors=hand)
    codebook = vq.init_centers(X, init)
    result = vq.lbg(X, codebook, max_iters=cfg.max_iters, stop_tol=args.stop_tol,
                    empty=args.empty)
    quantized = imaging.cloud_to_image(result.codebook.centers[:, result.assignment], layout)
    imaging.write_image(args.output, quantized)
    counts = np.bincount(result.assignment, minlength=result.codebook.n)
    imaging.write_palette(args.codebook or _sibling(args.output, ".codebook.txt"),
                          result.codebook.centers, counts)
    vq.save_history(args.history or _sibling(args.output, ".history.csv"), result.history)
    report = imaging.quality_report(img, quantized, result.codebook.n).as_dict()
    report["lbg_distortion"] = result.distortion
    report["iterations"] = result.iterations
    _write_json(args.report, report)


def cmd_synth(args) -> None:
    out = Path(args.output)
    if args.kind == "torus":
        X = synthetic.torus_dataset(synthetic.TorusSpec(args.bg_size, args.block_size, args.seed))
        save_cloud_csv(out, X)
    elif args.kind == "lines":
        spec = synthetic.LineCloudSpec(num_lines=args.num_lines, points_per_line=args.points,
                                       noise_sigma=args.noise, seed=args.seed)
        colors, positions, labels = synthetic.line_cloud(spec)
        save_cloud_csv(out, positions)
        save_cloud_csv(_sibling(out, ".colors.csv"), colors)
        imaging.write_assignment(_sibling(out, ".labels.csv"), labels)
    else:
        img, labels = synthetic.flat_regions_image(args.size, noise=args.noise, seed=args.seed)
        imaging.write_image(out, img)
        imaging.write_assignment(_sibling(out, ".labels.csv"), labels.ravel())


def cmd_report(args) -> None:
    original = imaging.read_image(_existing(args.original))
    quantized = imaging.read_image(_existing(args.quantized))
    n = args.n_colors
    if n is None:
        n = int(np.unique(quantized.reshape(-1, 3), axis=0).shape[0])
    _write_json(args.output, imaging.quality_report(original, quantized, n).as_dict())


def _existing(path) -> Path:
    path = Path(path)
    if not path.exists():
        raise CLIError(f"input file not found: {path}")
    return path


def _sibling(path, suffix: str) -> Path:
    path = Path(path)
    return path.with_name(path.stem + suffix)


def _add_lle_args(p) -> None:
    p.add_argument("-k", "--k", type=int, default=4, help="nearest neighbors (default 4)")
    p.add_argument("-d", "--d", type=int, default=2, help="embedding dimension (default 2)")
    p.add_argument("--lambda", dest="lam", type=float, default=1e-9,
                   help="perturbation scale; 0 disables it (default 1e-9)")
    p.add_argument("--no-perturb", dest="lam", action="store_const", const=0.0)
    p.add_argument("--reg-tol", type=float, default=1e-3)
    p.add_argument("--closed-cycle", action="store_true",
                   help="perturb with the closed cycle Laplacian instead of the path")
    p.add_argument("--max-points", type=int, default=DEFAULT_MAX_POINTS)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llec", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="LLE embedding of a CSV cloud or an image")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    _add_lle_args(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("quantize", help="LLEC color quantization of an image")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="reconstruction image")
    p.add_argument("--palette", type=Path)
    p.add_argument("--assignment", type=Path)
    p.add_argument("--embedding", type=Path)
    p.add_argument("--report", type=Path, help="JSON report path (default: stdout)")
    p.add_argument("--eps1", type=float, default=0.4)
    p.add_argument("--eps2", type=float, default=0.4)
    p.add_argument("--eps-ball", type=float, default=None)
    p.add_argument("-m", "--m", type=int, default=1)
    p.add_argument("--strategy", choices=segmentation.STRATEGIES, default="bth-neighbor")
    p.add_argument("-b", "--b", type=int, default=50)
    p.add_argument("--prototype", choices=("color", "embedding"), default="color")
    _add_lle_args(p)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("lbg", help="LBG vector quantization of an image")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--init", choices=vq.INITIALIZERS, default="llec-palette")
    p.add_argument("--palette", type=Path, help="palette file for --init llec-palette")
    p.add_argument("--hand-colors", type=Path, help="JSON table overriding the hand colors")
    p.add_argument("--n-centers", type=int, default=25)
    p.add_argument("--max-iters", type=int, default=15)
    p.add_argument("--stop-tol", type=float, default=0.0)
    p.add_argument("--empty", choices=("keep", "farthest"), default="keep")
    p.add_argument("--codebook", type=Path)
    p.add_argument("--history", type=Path)
    p.add_argument("--report", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lbg)

    p = sub.add_parser("synth", help="generate synthetic data")
    p.add_argument("kind", choices=("torus", "lines", "regions"))
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bg-size", type=int, default=20)
    p.add_argument("--block-size", type=int, default=10)
    p.add_argument("--num-lines", type=int, default=3)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--size", type=int, default=64)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="quality report of a quantized image")
    p.add_argument("original", type=Path)
    p.add_argument("quantized", type=Path)
    p.add_argument("--n-colors", type=int)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_report)
    return parser


def _thread_limit():
    value = os.environ.get("LLEC_THREADS")
    if not value:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(value))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "noise", "unset") is None:
        args.noise = 0.01 if args.kind == "lines" else 0.02
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            args.func(args)
    except (CLIError, ValueError, lle.LLEError, imaging.FormatError, OSError) as exc:
        print(f"llec {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
