"""Zoning features: per-segment signed gradient change of a skeleton.

The 100x100 skeleton is cut into a k x k grid (9, 16 or 25 segments).  In
each segment, walk the rows top to bottom and track the leftmost ink column;
every pair of consecutive inked rows contributes the signed column shift
between them.  Vertical strokes therefore sum to zero, strokes drifting
right are positive and strokes drifting left negative.  Rows without ink
break the pairing chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import BinaryImage


def _partition(n: int, k: int) -> list[tuple[int, int]]:
    """Split range(n) into k contiguous spans, larger spans first."""
    base, extra = divmod(n, k)
    spans = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        spans.append((start, start + size))
        start += size
    return spans


@dataclass(frozen=True)
class SegmentGrid:
    """k x k partition of an image into contiguous, near-equal cells."""

    k: int
    row_spans: tuple[tuple[int, int], ...]
    col_spans: tuple[tuple[int, int], ...]

    def segments(self) -> list[tuple[int, int, int, int]]:
        """All (row_start, row_stop, col_start, col_stop) in row-major order."""
        return [(r0, r1, c0, c1)
                for r0, r1 in self.row_spans
                for c0, c1 in self.col_spans]


def segment_grid(width: int, height: int, k: int) -> SegmentGrid:
    """Build the k x k grid for a width x height image.

    When a side is not divisible by k the remainder goes to the leading
    spans, so span sizes differ by at most one.
    """
    if k < 1:
        raise ValueError(f"grid side must be >= 1, got {k}")
    if k > min(width, height):
        raise ValueError(f"grid side {k} exceeds image extent {width}x{height}")
    return SegmentGrid(k=k,
                       row_spans=tuple(_partition(height, k)),
                       col_spans=tuple(_partition(width, k)))


def gc_of_segment(img: BinaryImage, row_span: tuple[int, int],
                  col_span: tuple[int, int]) -> int:
    """Signed gradient change of one segment.

    For each pair of consecutive rows that both contain ink inside the
    segment's column range, accumulate the shift of the leftmost ink column.
    An empty segment contributes 0.
    """
    r0, r1 = row_span
    c0, c1 = col_span
    if not (0 <= r0 <= r1 <= img.height and 0 <= c0 <= c1 <= img.width):
        raise ValueError(f"segment rows {row_span} cols {col_span} outside image")
    window = img.pixels[r0:r1, c0:c1]
    total = 0
    prev = -1  # leftmost ink col of the previous row, -1 when the row had none
    for row in window:
        hits = np.flatnonzero(row)
        if hits.size == 0:
            prev = -1
            continue
        first = int(hits[0])
        if prev >= 0:
            total += first - prev
        prev = first
    return total


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """k*k gradient-change values in row-major segment order."""

    k: int
    values: np.ndarray
    normalized: bool = False
    factor: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.k * self.k,):
            raise ValueError(f"expected {self.k * self.k} values, got shape {vals.shape}")
        if self.normalized and ((vals < 0).any() or (vals > 1).any()):
            raise ValueError("normalized values must lie in [0, 1]")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    def to_csv(self, label: str = "glyph") -> str:
        """One header row plus one value row: label, gc_1 .. gc_{k*k}."""
        header = ",".join(["label"] + [f"gc_{i + 1}" for i in range(len(self))])
        row = ",".join([label] + [f"{v:.6f}" for v in self.values])
        return f"{header}\n{row}\n"


def extract_features(img: BinaryImage, k: int) -> FeatureVector:
    """Gradient change of every grid segment, flattened row-major."""
    grid = segment_grid(img.width, img.height, k)
    values = [gc_of_segment(img, (r0, r1), (c0, c1))
              for r0, r1, c0, c1 in grid.segments()]
    return FeatureVector(k=k, values=np.array(values, dtype=np.float64))


def normalize(v: FeatureVector, factor: float) -> FeatureVector:
    """Map raw values into [0, 1] via x -> (x + A) / 2A, clamping outliers.

    A is the half-range: the factor notation +(30/60) means A = 30.  Zero
    maps to 0.5, the endpoints -A and +A map to 0 and 1.
    """
    if v.normalized:
        raise ValueError("feature vector is already normalized")
    if factor <= 0:
        raise ValueError(f"normalization half-range must be positive, got {factor}")
    scaled = np.clip((v.values + factor) / (2.0 * factor), 0.0, 1.0)
    return FeatureVector(k=v.k, values=scaled, normalized=True, factor=factor)
