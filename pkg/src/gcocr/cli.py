"""Command-line front end: one subcommand per pipeline stage plus sweeps.

Every subcommand is a thin adapter over the library; results are identical
to calling the functions directly.  Exit status is 0 on success, 1 on a
domain error (unreadable image, empty glyph, shape mismatch, numeric
failure), 2 on a usage error.  Diagnostics go to stderr, data to files or
stdout.  Experiment parameters can come from a flat key=value config file,
with explicit command-line flags taking precedence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .image import (EmptyGlyphError, PgmError, binarize, bounding_box, crop,
                    invert, load_pgm, save_pgm, scale_to)
from .thinning import thin
from .features import extract_features
from .mlp import ShapeError, load_model, predict, save_model
from .cg import LineSearchError, NumericFailure, TrainConfig, train
from .harness import (DEFAULT_FACTORS, ExperimentConfig, PipelineSettings,
                      evaluate, load_corpus, pipeline_features, preprocess,
                      run_experiment, run_pipeline, synth_generate)
from .synth import default_specs

SCHEDULES = ("sequential", "simultaneous")
BETAS = ("polak-ribiere-plus", "fletcher-reeves")


# ---------------------------------------------------------------------------
# Config file and merge helpers
# ---------------------------------------------------------------------------

def read_config(path) -> dict:
    """Parse a flat key=value file; blank lines and # comments are skipped."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_ints(text: str) -> tuple:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _parse_floats(text: str) -> tuple:
    return tuple(float(t) for t in text.split(",") if t.strip())


_TRAIN_KEYS = {
    "max_iterations": int,
    "grad_tolerance": float,
    "loss_tolerance": float,
    "restart_interval": int,
    "beta_variant": str,
    "init_step": float,
    "max_expansions": int,
    "shrink": float,
    "armijo_c": float,
    "seed": int,
}


def _train_config(cfg: dict, args, *, use_seed: bool = True) -> TrainConfig:
    kw = {}
    for key, cast in _TRAIN_KEYS.items():
        if key in cfg:
            kw[key] = cast(cfg[key])
    if getattr(args, "iterations", None) is not None:
        kw["max_iterations"] = args.iterations
    if getattr(args, "beta", None) is not None:
        kw["beta_variant"] = args.beta
    if use_seed and args.seed is not None:
        kw["seed"] = args.seed
    if not use_seed:
        kw.pop("seed", None)
    return TrainConfig(**kw)


def _settings(args, *, segments=None, factor=None) -> PipelineSettings:
    kw = {}
    if segments is not None:
        kw["segments_per_side"] = segments
    if factor is not None:
        kw["factor"] = factor
    if getattr(args, "threshold", None) is not None:
        kw["threshold"] = args.threshold
    if getattr(args, "packed_rgb", False):
        kw["packed_rgb"] = True
    if getattr(args, "invert", False):
        kw["invert_ink"] = True
    if getattr(args, "schedule", None) is not None:
        kw["schedule"] = args.schedule
    return PipelineSettings(**kw)


def _experiment_config(cfg: dict, args) -> ExperimentConfig:
    factor_map = {side: factors for side, factors in DEFAULT_FACTORS}
    for key, val in cfg.items():
        if key.startswith("factors."):
            factor_map[int(key.split(".", 1)[1])] = _parse_floats(val)
    kw = {"factors": tuple(sorted((s, tuple(f)) for s, f in factor_map.items()))}
    if "sides" in cfg:
        kw["sides"] = _parse_ints(cfg["sides"])
    if args.sides is not None:
        kw["sides"] = _parse_ints(args.sides)
    if "hidden_width" in cfg:
        kw["hidden_width"] = int(cfg["hidden_width"])
    if args.hidden is not None:
        kw["hidden_width"] = args.hidden
    if "threshold" in cfg:
        kw["threshold"] = int(cfg["threshold"])
    if args.threshold is not None:
        kw["threshold"] = args.threshold
    if "packed_rgb" in cfg:
        kw["packed_rgb"] = _parse_bool(cfg["packed_rgb"])
    if args.packed_rgb:
        kw["packed_rgb"] = True
    if "invert" in cfg:
        kw["invert_ink"] = _parse_bool(cfg["invert"])
    if args.invert:
        kw["invert_ink"] = True
    if "schedule" in cfg:
        kw["schedule"] = cfg["schedule"]
    if args.schedule is not None:
        kw["schedule"] = args.schedule
    if "master_seed" in cfg:
        kw["master_seed"] = int(cfg["master_seed"])
    if args.seed is not None:
        kw["master_seed"] = args.seed
    kw["train"] = _train_config(cfg, args, use_seed=False)
    return ExperimentConfig(**kw)


def _warn_excluded(excluded) -> None:
    for path, split, reason in excluded:
        print(f"gcocr: excluded {split} sample {path}: {reason}", file=sys.stderr)


def _infer_segments(args, n_in: int) -> int:
    if args.segments is not None:
        return args.segments
    side = math.isqrt(n_in)
    if side * side != n_in:
        raise ValueError(f"cannot infer grid side from {n_in} model inputs; "
                         f"pass --segments")
    return side


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _load_binary(args):
    img = load_pgm(args.in_path)
    b = binarize(img, args.threshold, packed_rgb=args.packed_rgb)
    return invert(b) if args.invert else b


def cmd_binarize(args) -> int:
    save_pgm(_load_binary(args), args.out_path)
    return 0


def cmd_crop(args) -> int:
    b = _load_binary(args)
    save_pgm(crop(b, bounding_box(b)), args.out_path)
    return 0


def cmd_scale(args) -> int:
    b = _load_binary(args)
    save_pgm(scale_to(b, args.width, args.height), args.out_path)
    return 0


def cmd_thin(args) -> int:
    b = _load_binary(args)
    save_pgm(thin(b, schedule=args.schedule or "sequential"), args.out_path)
    return 0


def cmd_extract(args) -> int:
    settings = _settings(args, segments=args.segments, factor=args.factor)
    img = load_pgm(args.in_path)
    if args.raw:
        vec = extract_features(preprocess(img, settings),
                               settings.segments_per_side)
    else:
        vec = run_pipeline(img, settings)
    text = vec.to_csv(Path(args.in_path).stem)
    if args.out_path:
        Path(args.out_path).write_text(text, encoding="ascii")
    else:
        print(text, end="")
    return 0


def cmd_synth(args) -> int:
    specs = default_specs(args.jitter)
    data = synth_generate(specs, (args.train_count, args.test_count),
                          seed=args.seed if args.seed is not None else 0)
    root = Path(args.out_dir)
    counters: dict = {}
    for sample in data.samples:
        name = data.class_names[sample.label]
        index = counters.get((sample.split, sample.label), 0)
        counters[(sample.split, sample.label)] = index + 1
        target = root / sample.split / name / f"{index:03d}.pgm"
        target.parent.mkdir(parents=True, exist_ok=True)
        save_pgm(sample.image, target)
    print(f"gcocr: wrote {len(data.samples)} images under {root}",
          file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    cfg_map = read_config(args.config) if args.config else {}
    train_cfg = _train_config(cfg_map, args)
    settings = _settings(args, segments=args.segments, factor=args.factor)
    data = load_corpus(args.data)
    labeled, excluded = pipeline_features(data.split("train"), settings)
    _warn_excluded(excluded)
    if not labeled:
        raise ValueError("no usable training samples")
    n_in = settings.segments_per_side ** 2
    hidden = args.hidden if args.hidden is not None else \
        int(cfg_map.get("hidden_width", n_in))
    model, trace = train(labeled, (n_in, hidden, data.n_classes), train_cfg)
    save_model(model, args.model)
    if args.trace:
        Path(args.trace).write_text(trace.to_csv(), encoding="ascii")
    result = evaluate(model, labeled, data.n_classes)
    final_loss = trace.records[-1].loss if trace.records else trace.initial_loss
    if args.json:
        print(json.dumps({
            "layout": [n_in, hidden, data.n_classes],
            "iterations": len(trace.records),
            "initial_loss": trace.initial_loss,
            "final_loss": final_loss,
            "stop_reason": trace.stop_reason,
            "train_accuracy": result.accuracy,
            "excluded": len(excluded),
            "model": str(args.model),
        }, indent=2))
    else:
        print(f"trained {n_in}x{hidden}x{data.n_classes} network: "
              f"{len(trace.records)} iterations, stop={trace.stop_reason}, "
              f"loss {trace.initial_loss:.4f} -> {final_loss:.4f}, "
              f"train accuracy {result.accuracy:.2f}%")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    side = _infer_segments(args, model.n_in)
    settings = _settings(args, segments=side, factor=args.factor)
    vec = run_pipeline(load_pgm(args.in_path), settings)
    index = predict(model, vec.values)
    if args.classes:
        names = [n.strip() for n in args.classes.split(",")]
        if index >= len(names):
            raise ValueError(f"model predicts class {index} but only "
                             f"{len(names)} names were given")
        print(names[index])
    else:
        print(index)
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    side = _infer_segments(args, model.n_in)
    settings = _settings(args, segments=side, factor=args.factor)
    data = load_corpus(args.data)
    labeled, excluded = pipeline_features(data.split(args.split), settings)
    _warn_excluded(excluded)
    if not labeled:
        raise ValueError(f"no usable samples in split {args.split!r}")
    result = evaluate(model, labeled, data.n_classes)
    correct = int(result.confusion.trace())
    if args.json:
        print(json.dumps({
            "split": args.split,
            "accuracy": result.accuracy,
            "correct": correct,
            "total": result.total,
            "class_names": list(data.class_names),
            "confusion": result.confusion.tolist(),
            "excluded": len(excluded),
        }, indent=2))
    else:
        print(f"accuracy: {result.accuracy:.2f}% ({correct}/{result.total})")
        width = max(len(n) for n in data.class_names) + 1
        print("confusion (rows = true, columns = predicted):")
        header = " " * (width + 2) + " ".join(f"{n:>{width}}"
                                              for n in data.class_names)
        print(header)
        for i, name in enumerate(data.class_names):
            row = " ".join(f"{v:>{width}}" for v in result.confusion[i])
            print(f"  {name:>{width}}{row}")
    return 0


def cmd_experiment(args) -> int:
    cfg_map = read_config(args.config) if args.config else {}
    exp_cfg = _experiment_config(cfg_map, args)
    if args.data:
        data = load_corpus(args.data)
    else:
        per_class = _parse_ints(args.per_class if args.per_class is not None
                                else cfg_map.get("per_class", "25,5"))
        jitter = args.jitter if args.jitter is not None else \
            float(cfg_map.get("jitter", 1.0))
        data = synth_generate(default_specs(jitter), per_class,
                              seed=exp_cfg.master_seed)
    report = run_experiment(exp_cfg, data, jobs=args.jobs)
    _warn_excluded(report.excluded)
    csv_text = report.to_csv()
    if args.report:
        Path(args.report).write_text(csv_text, encoding="ascii")
    else:
        print(csv_text, end="")
    if args.table:
        print(report.to_table(), end="")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--version", action="version",
                        version=f"gcocr {__version__}")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for stochastic stages (initialization, "
                             "glyph synthesis); preprocessing ignores it")

    binflags = argparse.ArgumentParser(add_help=False)
    binflags.add_argument("--threshold", type=int, default=None,
                          help="binarization threshold; default is the "
                               "midpoint of the intensity range")
    binflags.add_argument("--packed-rgb", action="store_true",
                          help="treat intensities as packed 24-bit RGB words")
    binflags.add_argument("--invert", action="store_true",
                          help="flip ink polarity (dark-on-light sources)")

    featflags = argparse.ArgumentParser(add_help=False)
    featflags.add_argument("--segments", type=int, default=None,
                           help="grid side k; the feature vector has k*k entries")
    featflags.add_argument("--schedule", choices=SCHEDULES, default=None,
                           help="thinning pass order (default sequential)")

    parser = argparse.ArgumentParser(
        prog="gcocr",
        description="Character recognition via thinning, zoning gradient "
                    "features, and a conjugate-gradient-trained network.")
    parser.add_argument("--version", action="version",
                        version=f"gcocr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="subcommand")

    p = sub.add_parser("binarize", parents=[common, binflags],
                       help="threshold a grayscale image to two levels")
    p.add_argument("--in", dest="in_path", required=True, metavar="PGM")
    p.add_argument("--out", dest="out_path", required=True, metavar="PGM")
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("crop", parents=[common, binflags],
                       help="crop to the ink bounding box")
    p.add_argument("--in", dest="in_path", required=True, metavar="PGM")
    p.add_argument("--out", dest="out_path", required=True, metavar="PGM")
    p.set_defaults(func=cmd_crop)

    p = sub.add_parser("scale", parents=[common, binflags],
                       help="rescale a binarized image")
    p.add_argument("--in", dest="in_path", required=True, metavar="PGM")
    p.add_argument("--out", dest="out_path", required=True, metavar="PGM")
    p.add_argument("--width", type=int, default=100)
    p.add_argument("--height", type=int, default=100)
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("thin", parents=[common, binflags],
                       help="reduce strokes to one-pixel skeletons")
    p.add_argument("--in", dest="in_path", required=True, metavar="PGM")
    p.add_argument("--out", dest="out_path", required=True, metavar="PGM")
    p.add_argument("--schedule", choices=SCHEDULES, default=None)
    p.set_defaults(func=cmd_thin)

    p = sub.add_parser("extract", parents=[common, binflags, featflags],
                       help="run the pipeline and print the feature vector")
    p.add_argument("--in", dest="in_path", required=True, metavar="PGM")
    p.add_argument("--out", dest="out_path", default=None, metavar="CSV",
                   help="write the vector here instead of stdout")
    p.add_argument("--factor", type=float, default=None,
                   help="normalization half-range A; maps values by "
                        "(x + A) / 2A")
    p.add_argument("--raw", action="store_true",
                   help="print raw integer features without normalization")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", parents=[common, binflags, featflags],
                       help="train a network on a corpus train split")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--factor", type=float, default=None)
    p.add_argument("--hidden", type=int, default=None,
                   help="hidden width (default: same as input width)")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--beta", choices=BETAS, default=None)
    p.add_argument("--config", default=None, metavar="FILE",
                   help="key=value training configuration file")
    p.add_argument("--trace", default=None, metavar="CSV",
                   help="write the per-iteration training trace here")
    p.add_argument("--json", action="store_true",
                   help="print a machine-readable summary")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common, binflags, featflags],
                       help="classify one image with a trained model")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--in", dest="in_path", required=True, metavar="PGM")
    p.add_argument("--factor", type=float, required=True,
                   help="normalization half-range used at training time")
    p.add_argument("--classes", default=None,
                   help="comma-separated class names; default prints the index")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common, binflags, featflags],
                       help="score a model on a corpus split")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--factor", type=float, required=True,
                   help="normalization half-range used at training time")
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--json", action="store_true",
                   help="print a machine-readable summary")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", parents=[common, binflags],
                       help="sweep grid sides and normalization factors")
    p.add_argument("--config", default=None, metavar="FILE",
                   help="key=value experiment configuration file")
    p.add_argument("--data", default=None, metavar="DIR",
                   help="corpus directory; default generates synthetic glyphs")
    p.add_argument("--report", default=None, metavar="CSV",
                   help="write the report here instead of stdout")
    p.add_argument("--table", action="store_true",
                   help="also print an aligned text table")
    p.add_argument("--sides", default=None,
                   help="comma-separated grid sides to sweep, e.g. 3,4,5")
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--beta", choices=BETAS, default=None)
    p.add_argument("--schedule", choices=SCHEDULES, default=None)
    p.add_argument("--per-class", dest="per_class", default=None,
                   help="synthetic counts as train,test (default 25,5)")
    p.add_argument("--jitter", type=float, default=None,
                   help="synthetic jitter scale in [0, 1] (default 1)")
    p.add_argument("--jobs", type=int, default=1,
                   help="cells to run in parallel (default 1)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth", parents=[common],
                       help="write a synthetic glyph corpus to disk")
    p.add_argument("--out", dest="out_dir", required=True, metavar="DIR")
    p.add_argument("--train", dest="train_count", type=int, default=25)
    p.add_argument("--test", dest="test_count", type=int, default=5)
    p.add_argument("--jitter", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    try:
        return args.func(args)
    except (PgmError, EmptyGlyphError, ShapeError, NumericFailure,
            LineSearchError, ValueError, RuntimeError, OSError) as exc:
        print(f"gcocr: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
