"""Synthetic glyph rendering for ten block capitals: C E F H L O T U V Z.

Each class has an ideal stroke template (polylines, with curves pre-sampled
into short chords) drawn in the unit square with y growing downward.  An
instance is the template pushed through a random similarity transform
(translation, scale, rotation), per-point Gaussian wobble, and a random
stroke width, then rasterized with one antialiased edge pixel onto a small
grayscale canvas: bright ink on a dark background, matching the binarizer's
ink-is-high convention.  All randomness flows from seed sequences, so a
fixed seed reproduces every pixel.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .image import GrayImage

GLYPH_CLASSES = ("C", "E", "F", "H", "L", "O", "T", "U", "V", "Z")

# Caps keeping any jittered template inside the canvas margin.
MAX_TRANSLATION = 0.2
MAX_SCALE_JITTER = 0.4
MAX_ROTATION = math.pi / 4
MAX_POINT_NOISE = 0.05


@dataclass(frozen=True)
class GlyphSpec:
    """One class's template plus the jitter ranges used per instance."""

    name: str
    strokes: tuple  # polylines; each polyline is a tuple of (x, y) in [0, 1]^2
    translation: float = 0.05   # uniform offset bound, unit coords
    scale: float = 0.10         # relative size jitter, factor in 1 +- scale
    rotation: float = 0.12      # radians, uniform in +- rotation
    point_noise: float = 0.012  # sigma of per-point Gaussian wobble
    stroke_width: tuple = (2.6, 4.4)  # pixel width range on the canvas
    seed: int = 0

    def __post_init__(self):
        if not self.strokes:
            raise ValueError(f"{self.name}: template has no strokes")
        strokes = tuple(tuple((float(x), float(y)) for x, y in line)
                        for line in self.strokes)
        for line in strokes:
            if len(line) < 2:
                raise ValueError(f"{self.name}: polyline needs >= 2 points")
            for x, y in line:
                if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                    raise ValueError(f"{self.name}: point ({x}, {y}) outside unit square")
        if not 0 <= self.translation <= MAX_TRANSLATION:
            raise ValueError(f"translation jitter must be in [0, {MAX_TRANSLATION}]")
        if not 0 <= self.scale <= MAX_SCALE_JITTER:
            raise ValueError(f"scale jitter must be in [0, {MAX_SCALE_JITTER}]")
        if not 0 <= self.rotation <= MAX_ROTATION:
            raise ValueError(f"rotation jitter must be in [0, {MAX_ROTATION}]")
        if not 0 <= self.point_noise <= MAX_POINT_NOISE:
            raise ValueError(f"point noise must be in [0, {MAX_POINT_NOISE}]")
        lo, hi = self.stroke_width
        if not 0 < lo <= hi:
            raise ValueError(f"stroke width range must satisfy 0 < lo <= hi, got {lo}, {hi}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        object.__setattr__(self, "strokes", strokes)
        object.__setattr__(self, "stroke_width", (float(lo), float(hi)))


def damp_jitter(spec: GlyphSpec, factor: float) -> GlyphSpec:
    """Copy of spec with all jitter ranges scaled by factor in [0, 1]."""
    lo, hi = spec.stroke_width
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * factor
    return dataclasses.replace(spec,
                               translation=spec.translation * factor,
                               scale=spec.scale * factor,
                               rotation=spec.rotation * factor,
                               point_noise=spec.point_noise * factor,
                               stroke_width=(mid - half, mid + half))


def _arc(cx: float, cy: float, r: float, deg_from: float, deg_to: float,
         n: int = 24) -> list:
    """Chord-sampled circular arc; angles in degrees, 90 points up (y down)."""
    angles = np.radians(np.linspace(deg_from, deg_to, n))
    return [(cx + r * math.cos(a), cy - r * math.sin(a)) for a in angles]


def _bow(a: tuple, b: tuple, depth: float, n: int = 12) -> list:
    """Parabolic stroke from a to b bulging sideways by depth at midpoint.

    Positive depth bulges to the right of the direction of travel, so a
    spine drawn top to bottom bows toward +x.
    """
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    length = math.hypot(dx, dy)
    nx, ny = dy / length, -dx / length
    ts = np.linspace(0.0, 1.0, n)
    return [(ax + dx * t + nx * depth * 4 * t * (1 - t),
             ay + dy * t + ny * depth * 4 * t * (1 - t)) for t in ts]


def _templates() -> dict:
    """Freehand-style ideals: bowed spines and tilted bars, not ruler work.

    The per-segment feature downstream measures sideways drift of the
    leftmost ink between rows, which is identically zero on perfectly
    axis-aligned strokes; each letter therefore carries its own curvature
    signature, the way handwritten capitals do.
    """
    top, mid, bot = 0.12, 0.5, 0.88
    return {
        "C": (_arc(0.5, 0.5, 0.36, 55, 305, 28),),
        "E": (_bow((0.24, top), (0.2, bot), -0.06),          # spine bows left
              _bow((0.24, top), (0.8, 0.15), 0.02, 8),       # bars tilt down
              _bow((0.22, mid), (0.7, 0.53), 0.015, 8),
              _bow((0.21, bot), (0.8, 0.85), -0.02, 8)),
        "F": (_bow((0.22, top), (0.26, bot), 0.07),          # spine bows right
              _bow((0.22, 0.15), (0.8, top), 0.02, 8),       # bars tilt up
              _bow((0.24, 0.53), (0.7, mid), 0.015, 8)),
        "H": (((0.26, top), (0.16, bot)),                    # splayed uprights
              ((0.74, top), (0.84, bot)),
              ((0.21, 0.52), (0.79, 0.48))),
        "L": (_bow((0.24, top), (0.3, 0.8), 0.05)            # spine into a
              + _bow((0.3, 0.8), (0.82, 0.87), -0.04, 8)[1:],),  # sagging foot
        "O": (_arc(0.5, 0.5, 0.37, 0, 360, 40),),
        "T": (_bow((0.15, 0.13), (0.85, 0.13), 0.025, 10),   # arched cap
              _bow((0.5, 0.13), (0.54, bot), 0.08)),         # stem flicks right
        "U": ([(0.22, top), (0.22, 0.55)]
              + _arc(0.5, 0.55, 0.28, 180, 360, 20)
              + [(0.78, 0.55), (0.78, top)],),
        "V": (((0.15, top), (0.5, bot), (0.85, top)),),
        "Z": (((0.15, 0.14), (0.85, top), (0.15, bot), (0.85, 0.86)),),
    }


def default_specs(jitter_scale: float = 1.0) -> list:
    """The ten built-in glyph classes; jitter_scale=0 gives rigid ideals."""
    if not 0 <= jitter_scale <= 1:
        raise ValueError(f"jitter_scale must lie in [0, 1], got {jitter_scale}")
    templates = _templates()
    return [damp_jitter(GlyphSpec(name=name, strokes=tuple(map(tuple, strokes))),
                        jitter_scale)
            for name, strokes in sorted(templates.items())]


def _draw_segment(canvas: np.ndarray, x0, y0, x1, y1, half_width: float) -> None:
    """Max-blend one capsule (segment with round caps) into a float canvas."""
    h, w = canvas.shape
    pad = half_width + 1.5
    lo_c = max(0, int(math.floor(min(x0, x1) - pad)))
    hi_c = min(w - 1, int(math.ceil(max(x0, x1) + pad)))
    lo_r = max(0, int(math.floor(min(y0, y1) - pad)))
    hi_r = min(h - 1, int(math.ceil(max(y0, y1) + pad)))
    if lo_c > hi_c or lo_r > hi_r:
        return
    ys, xs = np.mgrid[lo_r:hi_r + 1, lo_c:hi_c + 1]
    dx, dy = x1 - x0, y1 - y0
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        t = np.zeros_like(xs, dtype=np.float64)
    else:
        t = np.clip(((xs - x0) * dx + (ys - y0) * dy) / len2, 0.0, 1.0)
    dist = np.hypot(xs - (x0 + t * dx), ys - (y0 + t * dy))
    alpha = np.clip(half_width + 0.5 - dist, 0.0, 1.0)
    region = canvas[lo_r:hi_r + 1, lo_c:hi_c + 1]
    np.maximum(region, alpha * 255.0, out=region)


def render_glyph(spec: GlyphSpec, rng: np.random.Generator, *,
                 canvas_size: int = 64, margin: int = 6) -> GrayImage:
    """Rasterize one jittered instance of spec onto a square canvas."""
    if canvas_size < 8 or margin < 0 or 2 * margin >= canvas_size - 1:
        raise ValueError(f"bad canvas geometry ({canvas_size}, {margin})")
    dx, dy = rng.uniform(-spec.translation, spec.translation, 2)
    s = rng.uniform(1.0 - spec.scale, 1.0 + spec.scale)
    ang = rng.uniform(-spec.rotation, spec.rotation)
    width = rng.uniform(*spec.stroke_width)
    cos_a, sin_a = math.cos(ang), math.sin(ang)
    span = canvas_size - 1 - 2 * margin

    canvas = np.zeros((canvas_size, canvas_size), dtype=np.float64)
    for line in spec.strokes:
        pts = np.asarray(line, dtype=np.float64) - 0.5
        rotated = np.column_stack([pts[:, 0] * cos_a - pts[:, 1] * sin_a,
                                   pts[:, 0] * sin_a + pts[:, 1] * cos_a])
        placed = rotated * s + 0.5 + np.array([dx, dy])
        if spec.point_noise > 0:
            placed = placed + rng.normal(0.0, spec.point_noise, placed.shape)
        pix = margin + placed * span
        for (ax, ay), (bx, by) in zip(pix[:-1], pix[1:]):
            _draw_segment(canvas, ax, ay, bx, by, width / 2.0)
    return GrayImage(np.rint(np.clip(canvas, 0.0, 255.0)).astype(np.uint8), 255)


def render_instance(spec: GlyphSpec, entropy: list, *, canvas_size: int = 64,
                    margin: int = 6, max_attempts: int = 10) -> GrayImage:
    """Render with retries: damp the jitter and redraw if no ink lands.

    entropy is a list of non-negative ints naming this instance; together
    with spec.seed it pins down the random stream.
    """
    for attempt in range(max_attempts):
        rng = np.random.default_rng(
            np.random.SeedSequence([spec.seed, *entropy, attempt]))
        img = render_glyph(damp_jitter(spec, 0.5 ** attempt), rng,
                           canvas_size=canvas_size, margin=margin)
        if img.pixels.max() >= 128:
            return img
    raise RuntimeError(f"glyph {spec.name!r} rendered off-canvas "
                       f"{max_attempts} times")
