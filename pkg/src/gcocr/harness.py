"""Dataset handling, pipeline assembly, evaluation, and the accuracy sweep.

A Dataset couples raster samples with class labels and a train/test split
tag, whether loaded from a `root/{train,test}/<class>/*.pgm` tree or built
by the synthetic glyph generator.  run_pipeline turns one grayscale image
into a normalized feature vector by running, in order: binarize, bounding
box, crop, scale to 100x100, thin, zoning features, normalization.
run_experiment sweeps segment grids of side 3, 4, 5 against the
per-side normalization factors, training one network per cell and
reporting train/test accuracy with timings.
"""

from __future__ import annotations

import dataclasses
import time
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .image import (BinaryImage, EmptyGlyphError, GrayImage, binarize,
                    bounding_box, crop, invert, load_pgm, scale_to)
from .thinning import thin
from .features import FeatureVector, extract_features, normalize
from .mlp import LabeledSample, MlpModel, predict
from .cg import NumericFailure, TrainConfig, train
from .synth import GlyphSpec, render_instance

SPLITS = ("train", "test")

# Normalization half-ranges swept per grid side; +(A/2A) in the feature map.
DEFAULT_FACTORS = ((3, (35.0, 40.0)), (4, (30.0, 40.0)), (5, (25.0, 30.0)))


@dataclass(frozen=True, eq=False)
class Sample:
    """One raster with its class label and split assignment."""

    image: GrayImage
    label: int
    split: str
    path: Optional[str] = None

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")
        if self.label < 0:
            raise ValueError(f"label must be non-negative, got {self.label}")


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: tuple
    class_names: tuple

    def __post_init__(self):
        if not self.class_names:
            raise ValueError("dataset has no classes")
        n = len(self.class_names)
        for s in self.samples:
            if s.label >= n:
                raise ValueError(f"label {s.label} outside {n} classes")
        seen = {}
        for s in self.samples:
            if s.path is None:
                continue
            if seen.setdefault(s.path, s.split) != s.split:
                raise ValueError(f"{s.path}: listed in both splits")

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def split(self, tag: str) -> list:
        if tag not in SPLITS:
            raise ValueError(f"unknown split {tag!r}")
        return [s for s in self.samples if s.split == tag]


def load_corpus(root) -> Dataset:
    """Read a `root/{train,test}/<class>/*.pgm` tree into a Dataset.

    Labels follow the sorted class-directory names; files are taken in
    lexicographic order.  Empty class directories and missing split
    directories produce warnings, not errors; a tree with no samples at
    all is an error.
    """
    root = Path(root)
    by_class: dict = {}
    for split in SPLITS:
        split_dir = root / split
        if not split_dir.is_dir():
            warnings.warn(f"{split_dir}: split directory missing", RuntimeWarning)
            continue
        for class_dir in sorted(p for p in split_dir.iterdir() if p.is_dir()):
            files = sorted(class_dir.glob("*.pgm"))
            if not files:
                warnings.warn(f"{class_dir}: empty class directory, skipped",
                              RuntimeWarning)
                continue
            by_class.setdefault(class_dir.name, {})[split] = files
    if not by_class:
        raise ValueError(f"{root}: no class directories with samples")
    class_names = tuple(sorted(by_class))
    samples = []
    for label, name in enumerate(class_names):
        for split in SPLITS:
            for path in by_class[name].get(split, ()):
                samples.append(Sample(image=load_pgm(path), label=label,
                                      split=split, path=str(path)))
    return Dataset(tuple(samples), class_names)


def synth_generate(specs: Sequence[GlyphSpec], per_class: tuple = (25, 5),
                   seed: int = 0) -> Dataset:
    """Render a deterministic synthetic Dataset from glyph templates."""
    specs = list(specs)
    if len(specs) < 2:
        raise ValueError(f"need at least 2 classes, got {len(specs)}")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("duplicate class names in specs")
    n_train, n_test = per_class
    if n_train < 1 or n_test < 0:
        raise ValueError(f"per_class counts out of range: {per_class}")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    samples = []
    for ci, spec in enumerate(specs):
        for flag, (split, count) in enumerate(zip(SPLITS, (n_train, n_test))):
            for j in range(count):
                img = render_instance(spec, [seed, ci, flag, j])
                samples.append(Sample(image=img, label=ci, split=split,
                                      path=f"synth:{spec.name}/{split}/{j}"))
    return Dataset(tuple(samples), tuple(names))


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineSettings:
    """Everything one sample needs to become a normalized feature vector."""

    segments_per_side: int = 4
    factor: float = 30.0
    threshold: Optional[int] = None   # None = midpoint of the intensity range
    packed_rgb: bool = False
    invert_ink: bool = False          # flip polarity for dark-on-light sources
    target_width: int = 100
    target_height: int = 100
    schedule: str = "sequential"

    def __post_init__(self):
        if self.segments_per_side < 1:
            raise ValueError(f"segments_per_side must be >= 1, "
                             f"got {self.segments_per_side}")
        if not self.factor > 0:
            raise ValueError(f"factor must be positive, got {self.factor}")
        if self.target_width < 1 or self.target_height < 1:
            raise ValueError("target size must be positive")


def preprocess(img: GrayImage, s: PipelineSettings) -> BinaryImage:
    """Binarize, crop to the ink bounding box, rescale, and thin."""
    b = binarize(img, s.threshold, packed_rgb=s.packed_rgb)
    if s.invert_ink:
        b = invert(b)
    box = bounding_box(b)
    scaled = scale_to(crop(b, box), s.target_width, s.target_height)
    return thin(scaled, schedule=s.schedule)


def run_pipeline(img: GrayImage, s: PipelineSettings) -> FeatureVector:
    """Full per-image pipeline ending in a normalized feature vector."""
    skeleton = preprocess(img, s)
    return normalize(extract_features(skeleton, s.segments_per_side), s.factor)


def pipeline_features(samples: Sequence[Sample],
                      s: PipelineSettings) -> tuple[list, list]:
    """Map samples to LabeledSamples; returns (labeled, excluded).

    Samples with no ink after binarization are excluded from the labeled
    list and reported as (path, split, reason) entries.
    """
    labeled, excluded = [], []
    for sample in samples:
        try:
            vec = run_pipeline(sample.image, s)
        except EmptyGlyphError as exc:
            excluded.append((sample.path, sample.split, str(exc)))
            continue
        labeled.append(LabeledSample(vec.values, sample.label))
    return labeled, excluded


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EvalResult:
    accuracy: float        # percent correct
    confusion: np.ndarray  # rows = true class, columns = predicted class
    total: int


def evaluate(m: MlpModel, labeled: Sequence[LabeledSample],
             n_classes: int) -> EvalResult:
    """Percent accuracy plus the full confusion matrix over one split."""
    if not labeled:
        raise ValueError("cannot evaluate an empty split")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    for s in labeled:
        confusion[s.label, predict(m, s.features)] += 1
    correct = int(np.trace(confusion))
    return EvalResult(100.0 * correct / len(labeled), confusion, len(labeled))


# ---------------------------------------------------------------------------
# Experiment sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    sides: tuple = (3, 4, 5)
    factors: tuple = DEFAULT_FACTORS  # pairs (side, (factor, ...))
    hidden_width: Optional[int] = None  # None = same as the input width
    train: TrainConfig = TrainConfig()
    threshold: Optional[int] = None
    packed_rgb: bool = False
    invert_ink: bool = False
    schedule: str = "sequential"
    master_seed: int = 0

    def __post_init__(self):
        if not self.sides:
            raise ValueError("no segment sides to sweep")
        fmap = self.factor_map
        for side in self.sides:
            if side < 1:
                raise ValueError(f"segment side must be >= 1, got {side}")
            if not fmap.get(side):
                raise ValueError(f"side {side} has no normalization factors")
        if self.hidden_width is not None and self.hidden_width < 1:
            raise ValueError("hidden_width must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    @property
    def factor_map(self) -> dict:
        return {side: tuple(float(a) for a in factors)
                for side, factors in self.factors}

    def settings_for(self, side: int, factor: float) -> PipelineSettings:
        return PipelineSettings(segments_per_side=side, factor=factor,
                                threshold=self.threshold,
                                packed_rgb=self.packed_rgb,
                                invert_ink=self.invert_ink,
                                schedule=self.schedule)


@dataclass(frozen=True)
class CellResult:
    side: int
    feature_size: int
    factor: float
    train_accuracy: float  # nan when the cell failed
    test_accuracy: float
    seconds: float
    iterations: int
    stop_reason: str
    error: Optional[str] = None


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    cells: tuple
    excluded: tuple  # (path, split, reason) for samples dropped upstream
    class_names: tuple

    def to_csv(self) -> str:
        lines = ["feature_size,factor,train_acc,test_acc,seconds"]
        for c in self.cells:
            lines.append(f"{c.feature_size},{c.factor:g},{c.train_accuracy:.2f},"
                         f"{c.test_accuracy:.2f},{c.seconds:.3f}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        header = (f"{'feature size':>12}  {'factor':>6}  {'train acc %':>11}  "
                  f"{'test acc %':>10}  {'seconds':>8}")
        lines = [header, "-" * len(header)]
        for c in self.cells:
            lines.append(f"{c.feature_size:>12}  {c.factor:>6g}  "
                         f"{c.train_accuracy:>11.2f}  {c.test_accuracy:>10.2f}  "
                         f"{c.seconds:>8.3f}")
            if c.error:
                lines.append(f"  cell ({c.feature_size}, {c.factor:g}) "
                             f"failed: {c.error}")
        for path, split, reason in self.excluded:
            lines.append(f"  excluded {split} sample {path}: {reason}")
        return "\n".join(lines) + "\n"


def _cell_seed(master_seed: int, side: int, factor: float) -> int:
    ss = np.random.SeedSequence([master_seed, side, int(round(factor * 100))])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def run_experiment(cfg: ExperimentConfig, data: Dataset,
                   jobs: int = 1) -> ExperimentReport:
    """Train and score one network per (side, factor) cell.

    Skeletons are computed once per sample and shared across cells, since
    thinning does not depend on the grid side or the normalization factor.
    Cells are independent; jobs > 1 runs them on a thread pool without
    changing results (per-cell seeds are fixed up front), though per-cell
    wall times then overlap.  A numeric failure inside one cell is
    recorded on that cell's row and does not abort the sweep.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    train_samples = data.split("train")
    test_samples = data.split("test")
    if not train_samples or not test_samples:
        raise ValueError("experiment needs non-empty train and test splits")

    prep = cfg.settings_for(cfg.sides[0], 1.0)
    skeletons: dict = {"train": [], "test": []}
    excluded = []
    for split, samples in (("train", train_samples), ("test", test_samples)):
        for sample in samples:
            try:
                skeletons[split].append((preprocess(sample.image, prep),
                                         sample.label))
            except EmptyGlyphError as exc:
                excluded.append((sample.path, split, str(exc)))

    def run_cell(side: int, factor: float) -> CellResult:
        started = time.perf_counter()
        batches = {}
        for split in SPLITS:
            batches[split] = [
                LabeledSample(
                    normalize(extract_features(skel, side), factor).values,
                    label)
                for skel, label in skeletons[split]]
        n_in = side * side
        layout = (n_in, cfg.hidden_width or n_in, data.n_classes)
        cell_cfg = dataclasses.replace(
            cfg.train, seed=_cell_seed(cfg.master_seed, side, factor))
        try:
            model, trace = train(batches["train"], layout, cell_cfg)
            train_acc = evaluate(model, batches["train"], data.n_classes).accuracy
            test_acc = evaluate(model, batches["test"], data.n_classes).accuracy
            return CellResult(
                side=side, feature_size=n_in, factor=factor,
                train_accuracy=train_acc, test_accuracy=test_acc,
                seconds=time.perf_counter() - started,
                iterations=len(trace.records), stop_reason=trace.stop_reason)
        except NumericFailure as exc:
            return CellResult(
                side=side, feature_size=n_in, factor=factor,
                train_accuracy=float("nan"), test_accuracy=float("nan"),
                seconds=time.perf_counter() - started,
                iterations=exc.iteration, stop_reason="numeric_failure",
                error=str(exc))

    grid = [(side, factor) for side in cfg.sides
            for factor in cfg.factor_map[side]]
    if jobs == 1:
        cells = [run_cell(side, factor) for side, factor in grid]
    else:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(lambda sf: run_cell(*sf), grid))
    return ExperimentReport(tuple(cells), tuple(excluded), data.class_names)
