"""Shared fixtures and oracles used by several test modules."""

from __future__ import annotations

import numpy as np
import pytest

from gcocr.image import BinaryImage


def _img(arr) -> BinaryImage:
    return BinaryImage(np.asarray(arr, dtype=np.uint8))


def _canvas(h: int, w: int):
    return np.zeros((h, w), dtype=np.uint8)


def build_thinning_corpus(seed: int = 0) -> list:
    """At least 50 binary glyphs: bars, diagonals, blocks, frames, rings,
    crosses, and seeded random sprinkles."""
    glyphs = []

    for t in (1, 2, 3, 5):
        a = _canvas(12, 30)
        a[5:5 + t, 2:28] = 1
        glyphs.append(_img(a))
        b = _canvas(30, 12)
        b[2:28, 5:5 + t] = 1
        glyphs.append(_img(b))

    for n in (10, 16, 23):
        glyphs.append(_img(np.eye(n, dtype=np.uint8)))
        a = np.eye(n, dtype=np.uint8)
        a |= np.eye(n, k=1, dtype=np.uint8)
        a |= np.eye(n, k=-1, dtype=np.uint8)
        glyphs.append(_img(a))

    for h, w in ((2, 2), (3, 7), (8, 8), (12, 5), (20, 20), (1, 9)):
        a = _canvas(h + 4, w + 4)
        a[2:2 + h, 2:2 + w] = 1
        glyphs.append(_img(a))

    # hollow square frames; the hole must survive thinning
    for size, hole in ((8, 2), (12, 6), (20, 10)):
        a = _canvas(size + 4, size + 4)
        a[2:2 + size, 2:2 + size] = 1
        lo = 2 + (size - hole) // 2
        a[lo:lo + hole, lo:lo + hole] = 0
        glyphs.append(_img(a))

    yy, xx = np.mgrid[0:24, 0:24]
    rr = (yy - 11.5) ** 2 + (xx - 11.5) ** 2
    for r in (5, 9):
        ring = (rr <= (r + 1.2) ** 2) & (rr >= (r - 1.2) ** 2)
        glyphs.append(_img(ring.astype(np.uint8)))
        glyphs.append(_img((rr <= r * r).astype(np.uint8)))

    for arm in (3, 6):
        n = 2 * arm + 3
        a = _canvas(n, n)
        a[arm:arm + 3, :] = 1
        a[:, arm:arm + 3] = 1
        glyphs.append(_img(a))

    rng = np.random.default_rng(seed)
    for _ in range(24):
        h = int(rng.integers(8, 33))
        w = int(rng.integers(8, 33))
        density = float(rng.uniform(0.25, 0.7))
        glyphs.append(_img((rng.random((h, w)) < density).astype(np.uint8)))

    assert len(glyphs) >= 50
    return glyphs


def count_components(img: BinaryImage) -> int:
    """8-connected ink component count by flood fill."""
    pixels = img.pixels
    h, w = pixels.shape
    seen = np.zeros((h, w), dtype=bool)
    found = 0
    for r in range(h):
        for c in range(w):
            if not pixels[r, c] or seen[r, c]:
                continue
            found += 1
            stack = [(r, c)]
            seen[r, c] = True
            while stack:
                cr, cc = stack.pop()
                for nr in (cr - 1, cr, cr + 1):
                    for nc in (cc - 1, cc, cc + 1):
                        if 0 <= nr < h and 0 <= nc < w and pixels[nr, nc] \
                                and not seen[nr, nc]:
                            seen[nr, nc] = True
                            stack.append((nr, nc))
    return found


def gc_oracle(pixels, row_lo, row_hi, col_lo, col_hi) -> float:
    """Plain-loop restatement of the per-segment gradient-change sum.

    Walks consecutive row pairs, finds each row's leftmost ink column inside
    the segment, and accumulates the signed column displacement whenever both
    rows of a pair contain ink.
    """
    total = 0
    prev = None
    for r in range(row_lo, row_hi):
        first = None
        for c in range(col_lo, col_hi):
            if pixels[r, c]:
                first = c
                break
        if first is not None and prev is not None:
            total += first - prev
        prev = first
    return float(total)


def fd_gradient(model, data, eps: float = 1e-5):
    """Central finite differences of the dataset loss, one parameter at a time."""
    from gcocr.mlp import flatten_params, loss, unflatten_params

    base = flatten_params(model)
    grad = np.zeros_like(base)
    for i in range(base.size):
        up = base.copy()
        dn = base.copy()
        up[i] += eps
        dn[i] -= eps
        f_up = loss(unflatten_params(up, model.n_in, model.n_hidden,
                                     model.n_out), data)
        f_dn = loss(unflatten_params(dn, model.n_in, model.n_hidden,
                                     model.n_out), data)
        grad[i] = (f_up - f_dn) / (2.0 * eps)
    return grad


def random_case(rng, n_in: int, n_hidden: int, n_out: int, n_samples: int):
    """A random small network plus a random labeled batch."""
    from gcocr.mlp import LabeledSample, MlpModel

    model = MlpModel(w1=rng.normal(scale=0.7, size=(n_hidden, n_in)),
                     b1=rng.normal(scale=0.7, size=n_hidden),
                     w2=rng.normal(scale=0.7, size=(n_out, n_hidden)),
                     b2=rng.normal(scale=0.7, size=n_out))
    data = [LabeledSample(features=rng.random(n_in),
                          label=int(rng.integers(0, n_out)))
            for _ in range(n_samples)]
    return model, data


@pytest.fixture(scope="session")
def thinning_corpus():
    return build_thinning_corpus()
