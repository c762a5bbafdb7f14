"""Iterative skeletonization by border-pixel deletion.

A candidate ink pixel P1 is examined against its 8-neighborhood, laid out

    P3 P2 P9
    P4 P1 P8
    P5 P6 P7

and deleted when all four conditions hold:

    1.  2 <= Nzcount(P1) <= 6
    2.  ZO(P1) = 1
    3.  P2*P4*P8 = 0  or  ZO(P2) != 1
    4.  P2*P4*P6 = 0  or  ZO(P4) != 1

Nzcount is the number of nonzero neighbors; ZO is the number of 0-to-1
transitions around the ordered cycle P2, P3, P4, P5, P6, P7, P8, P9, P2.
ZO(P2) and ZO(P4) are evaluated on the neighborhoods of the north and west
neighbors in the current image state.  Deletion passes repeat until the
image stops changing.  Pixels outside the image count as 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import BinaryImage

# (drow, dcol) of P2..P9 in cycle order: N, NW, W, SW, S, SE, E, NE
_RING = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))


@dataclass(frozen=True)
class Neighborhood:
    """The 3x3 patch around a pixel, fields named by position."""

    p1: int = 0
    p2: int = 0
    p3: int = 0
    p4: int = 0
    p5: int = 0
    p6: int = 0
    p7: int = 0
    p8: int = 0
    p9: int = 0

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if v not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1, got {v}")

    def ring(self) -> tuple[int, ...]:
        """Neighbors in the transition-count cycle order P2..P9."""
        return (self.p2, self.p3, self.p4, self.p5, self.p6, self.p7, self.p8, self.p9)


def neighborhood_at(img: BinaryImage, row: int, col: int) -> Neighborhood:
    """Extract the neighborhood centered at (row, col); outside pixels are 0."""
    px = img.pixels
    h, w = px.shape

    def at(r, c):
        return int(px[r, c]) if 0 <= r < h and 0 <= c < w else 0

    ring = [at(row + dr, col + dc) for dr, dc in _RING]
    return Neighborhood(at(row, col), *ring)


def nz_count(n: Neighborhood) -> int:
    """Number of nonzero neighbors of the center pixel."""
    return sum(n.ring())


def zo_count(n: Neighborhood) -> int:
    """Number of 0-to-1 transitions around the cycle P2..P9, P2."""
    ring = n.ring()
    return sum(a < b for a, b in zip(ring, ring[1:] + ring[:1]))


def deletable(img: BinaryImage, row: int, col: int) -> bool:
    """Apply the four deletion conditions to the ink pixel at (row, col).

    Conditions 3 and 4 look at ZO of the north and west neighbors, which
    needs pixels beyond the center's own 3x3 patch, so this takes the image
    rather than a bare Neighborhood.
    """
    n = neighborhood_at(img, row, col)
    if n.p1 != 1:
        raise ValueError(f"pixel ({row}, {col}) is not ink")
    count = nz_count(n)
    if count < 2 or count > 6:
        return False
    if zo_count(n) != 1:
        return False
    if n.p2 and n.p4 and n.p8 and zo_count(neighborhood_at(img, row - 1, col)) == 1:
        return False
    if n.p2 and n.p4 and n.p6 and zo_count(neighborhood_at(img, row, col - 1)) == 1:
        return False
    return True


# ---------------------------------------------------------------------------
# Full-image thinning
# ---------------------------------------------------------------------------
#
# The hot loop runs over a zero-padded flat bytearray so neighbor reads are
# plain integer indexing; bytearray.find() skips background at C speed.
# tests/test_thinning.py cross-checks this path against the rule functions
# above on every fixture.

def _deletable_flat(buf: bytearray, i: int, stride: int) -> bool:
    up = i - stride
    dn = i + stride
    p2 = buf[up]
    p3 = buf[up - 1]
    p4 = buf[i - 1]
    p5 = buf[dn - 1]
    p6 = buf[dn]
    p7 = buf[dn + 1]
    p8 = buf[i + 1]
    p9 = buf[up + 1]
    count = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9
    if count < 2 or count > 6:
        return False
    if ((p2 < p3) + (p3 < p4) + (p4 < p5) + (p5 < p6)
            + (p6 < p7) + (p7 < p8) + (p8 < p9) + (p9 < p2)) != 1:
        return False
    if p2 and p4 and (p8 or p6):
        if p8 and _zo_flat(buf, up, stride) == 1:
            return False
        if p6 and _zo_flat(buf, i - 1, stride) == 1:
            return False
    return True


def _zo_flat(buf: bytearray, i: int, stride: int) -> int:
    up = i - stride
    dn = i + stride
    p2 = buf[up]
    p3 = buf[up - 1]
    p4 = buf[i - 1]
    p5 = buf[dn - 1]
    p6 = buf[dn]
    p7 = buf[dn + 1]
    p8 = buf[i + 1]
    p9 = buf[up + 1]
    return ((p2 < p3) + (p3 < p4) + (p4 < p5) + (p5 < p6)
            + (p6 < p7) + (p7 < p8) + (p8 < p9) + (p9 < p2))


def thin(img: BinaryImage, schedule: str = "sequential") -> BinaryImage:
    """Delete border pixels until no pixel satisfies the deletion rules.

    ``schedule="sequential"`` (the default) removes each pixel the moment it
    qualifies, in raster order, so deletions affect later tests in the same
    pass.  ``schedule="simultaneous"`` marks a whole pass against the frozen
    image and then sweeps; it can thin symmetric strokes differently and may
    erase small solid blocks outright.
    """
    if schedule not in ("sequential", "simultaneous"):
        raise ValueError(f"unknown schedule {schedule!r}")
    h, w = img.height, img.width
    stride = w + 2
    padded = np.zeros((h + 2, stride), dtype=np.uint8)
    padded[1:h + 1, 1:w + 1] = img.pixels
    buf = bytearray(padded.tobytes())

    changed = True
    while changed:
        changed = False
        if schedule == "sequential":
            i = buf.find(1)
            while i >= 0:
                if _deletable_flat(buf, i, stride):
                    buf[i] = 0
                    changed = True
                i = buf.find(1, i + 1)
        else:
            frozen = bytes(buf)
            marks = []
            i = frozen.find(1)
            while i >= 0:
                if _deletable_flat(frozen, i, stride):
                    marks.append(i)
                i = frozen.find(1, i + 1)
            for i in marks:
                buf[i] = 0
            changed = bool(marks)

    out = np.frombuffer(bytes(buf), dtype=np.uint8).reshape(h + 2, stride)
    return BinaryImage(out[1:h + 1, 1:w + 1].copy())
