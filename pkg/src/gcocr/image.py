"""Raster types, PGM file I/O, binarization, cropping and scaling.

Images are row-major 2-D numpy arrays wrapped in small immutable value
types.  Coordinate convention throughout the package: row = y (downward),
col = x (rightward), both 0-based.  Ink polarity is 1 = black.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PgmError(ValueError):
    """Malformed PGM stream.  ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class EmptyGlyphError(ValueError):
    """Raised when an operation needs at least one ink pixel and found none."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Grayscale raster with intensities in [0, maxval]."""

    pixels: np.ndarray
    maxval: int = 255

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"pixels must be a non-empty 2-D array, got shape {px.shape}")
        if self.maxval < 1:
            raise ValueError(f"maxval must be >= 1, got {self.maxval}")
        if px.min() < 0 or px.max() > self.maxval:
            raise ValueError("pixel intensities outside [0, maxval]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """Two-level raster; 1 = ink (black), 0 = background."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"pixels must be a non-empty 2-D array, got shape {px.shape}")
        px = px.astype(np.uint8, copy=False)
        if not np.isin(px, (0, 1)).all():
            raise ValueError("binary image pixels must be 0 or 1")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def ink_count(self) -> int:
        return int(self.pixels.sum())


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive row/col extent of a glyph's ink."""

    top: int
    bottom: int
    left: int
    right: int

    def __post_init__(self):
        if self.top > self.bottom or self.left > self.right:
            raise ValueError(f"degenerate box {self}")

    @property
    def height(self) -> int:
        return self.bottom - self.top + 1

    @property
    def width(self) -> int:
        return self.right - self.left + 1


@dataclass(frozen=True)
class AffineTransform:
    """2-D homogeneous mapping (x, y, 1) -> (x', y', 1).

    Coefficients are laid out as the top two rows of the 3x3 matrix:

        | m00 m01 m02 |
        | m10 m11 m12 |
        |  0   0   1  |
    """

    m00: float
    m01: float
    m02: float
    m10: float
    m11: float
    m12: float

    @classmethod
    def scaling(cls, sx: float, sy: float) -> "AffineTransform":
        return cls(sx, 0.0, 0.0, 0.0, sy, 0.0)

    @property
    def determinant(self) -> float:
        return self.m00 * self.m11 - self.m01 * self.m10

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (self.m00 * x + self.m01 * y + self.m02,
                self.m10 * x + self.m11 * y + self.m12)


# ---------------------------------------------------------------------------
# PGM I/O (P2 ASCII and P5 binary)
# ---------------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\x0b\x0c"


class _Scanner:
    """Header tokenizer that tracks the byte offset for error reporting."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space(self) -> None:
        # '#' starts a comment running to end of line
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos]
            if b in _WHITESPACE:
                self.pos += 1
            elif b == 0x23:  # '#'
                nl = data.find(b"\n", self.pos)
                self.pos = n if nl < 0 else nl + 1
            else:
                return

    def token(self) -> bytes:
        self.skip_space()
        if self.pos >= len(self.data):
            raise PgmError("unexpected end of file in header", self.pos)
        start = self.pos
        data, n = self.data, len(self.data)
        while self.pos < n and data[self.pos] not in _WHITESPACE and data[self.pos] != 0x23:
            self.pos += 1
        return data[start:self.pos]

    def integer(self, what: str) -> int:
        start_guess = self.pos
        tok = self.token()
        if not tok.isdigit():
            raise PgmError(f"expected integer for {what}, got {tok!r}", start_guess)
        return int(tok)


def load_pgm(path) -> GrayImage:
    """Read a PGM file (P2 ASCII or P5 binary) into a GrayImage.

    The file's maxval is recorded on the image.  Raises PgmError naming
    the byte offset for malformed headers, truncated payloads or maxval 0.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if not data:
        raise PgmError("empty file", 0)

    sc = _Scanner(data)
    magic = sc.token()
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"not a PGM file (magic {magic!r})", 0)
    width = sc.integer("width")
    height = sc.integer("height")
    maxval_at = sc.pos
    maxval = sc.integer("maxval")
    if maxval == 0:
        raise PgmError("maxval must be positive", maxval_at)
    if maxval > 65535:
        raise PgmError(f"maxval {maxval} exceeds the 16-bit format limit", maxval_at)
    if width < 1 or height < 1:
        raise PgmError(f"bad dimensions {width}x{height}", 0)

    if magic == b"P5":
        if sc.pos >= len(data) or data[sc.pos] not in _WHITESPACE:
            raise PgmError("expected single whitespace after maxval", sc.pos)
        payload = data[sc.pos + 1:]
        bpp = 1 if maxval < 256 else 2
        needed = width * height * bpp
        if len(payload) < needed:
            raise PgmError(
                f"truncated payload: need {needed} bytes, have {len(payload)}",
                sc.pos + 1 + len(payload))
        dtype = np.uint8 if bpp == 1 else np.dtype(">u2")
        px = np.frombuffer(payload[:needed], dtype=dtype).astype(np.int64)
    else:
        px = np.empty(width * height, dtype=np.int64)
        for i in range(width * height):
            at = sc.pos
            try:
                px[i] = sc.integer("sample")
            except PgmError:
                raise PgmError(f"truncated payload: expected {width * height} samples, "
                               f"got {i}", at) from None

    if px.max(initial=0) > maxval:
        raise PgmError(f"sample value {int(px.max())} exceeds maxval {maxval}", sc.pos)
    return GrayImage(px.reshape(height, width), maxval=maxval)


def save_pgm(img, path) -> None:
    """Write an image as binary PGM (P5) with maxval 255.

    BinaryImage ink is written as 255 and background as 0.  GrayImage
    samples are written verbatim, so load/save round-trips preserve pixel
    data bit-exactly; images deeper than 8 bits are rejected.
    """
    if isinstance(img, BinaryImage):
        px = img.pixels.astype(np.uint8) * 255
    elif isinstance(img, GrayImage):
        if img.pixels.max() > 255:
            raise ValueError("cannot write samples above 255 as a maxval-255 PGM")
        px = img.pixels.astype(np.uint8)
    else:
        raise TypeError(f"expected GrayImage or BinaryImage, got {type(img).__name__}")
    header = f"P5\n{px.shape[1]} {px.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + px.tobytes())


# ---------------------------------------------------------------------------
# Binarization and glyph extraction
# ---------------------------------------------------------------------------

def packed_rgb_value(intensity: int, maxval: int) -> int:
    """Gray intensity as a packed 24-bit 0xRRGGBB value with R = G = B."""
    v8 = int(round(intensity * 255 / maxval))
    return v8 * 0x010101


def binarize(img: GrayImage, threshold: int | None = None, *,
             packed_rgb: bool = False) -> BinaryImage:
    """Threshold a grayscale image: 1 where intensity >= threshold, else 0.

    ``threshold=None`` uses (maxval + 1) // 2.  With ``packed_rgb`` each
    intensity is first promoted to a packed 24-bit gray value, which is the
    reading that makes thresholds in the millions meaningful.
    """
    if threshold is None:
        threshold = (img.maxval + 1) // 2
    if packed_rgb:
        values = np.round(img.pixels * (255 / img.maxval)).astype(np.int64) * 0x010101
    else:
        values = img.pixels
    return BinaryImage((values >= threshold).astype(np.uint8))


def invert(img: BinaryImage) -> BinaryImage:
    """Swap ink and background, for dark-on-light capture conventions."""
    return BinaryImage(1 - img.pixels)


def bounding_box(img: BinaryImage) -> BoundingBox:
    """Minimal axis-aligned rectangle containing all ink pixels."""
    rows = np.flatnonzero(img.pixels.any(axis=1))
    if rows.size == 0:
        raise EmptyGlyphError("image contains no ink pixels")
    cols = np.flatnonzero(img.pixels.any(axis=0))
    return BoundingBox(top=int(rows[0]), bottom=int(rows[-1]),
                       left=int(cols[0]), right=int(cols[-1]))


def crop(img: BinaryImage, box: BoundingBox) -> BinaryImage:
    """Extract the sub-image covered by ``box`` (inclusive bounds)."""
    if box.top < 0 or box.left < 0 or box.bottom >= img.height or box.right >= img.width:
        raise ValueError(f"box {box} outside {img.width}x{img.height} image")
    return BinaryImage(img.pixels[box.top:box.bottom + 1, box.left:box.right + 1].copy())


def scale_to(img: BinaryImage, target_w: int, target_h: int) -> BinaryImage:
    """Resample to target_w x target_h by inverse affine mapping.

    The transform {m00 = src_w/target_w, m11 = src_h/target_h} maps target
    pixel centers back into the source, which is sampled nearest-neighbor,
    so the output stays strictly binary.
    """
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target size must be positive, got {target_w}x{target_h}")
    inverse = AffineTransform.scaling(img.width / target_w, img.height / target_h)
    if inverse.determinant == 0:
        raise ValueError("scaling transform is singular")
    sx = np.floor((np.arange(target_w) + 0.5) * inverse.m00 + inverse.m02).astype(int)
    sy = np.floor((np.arange(target_h) + 0.5) * inverse.m11 + inverse.m12).astype(int)
    sx = sx.clip(0, img.width - 1)
    sy = sy.clip(0, img.height - 1)
    return BinaryImage(img.pixels[np.ix_(sy, sx)])
