"""Raster types, PGM I/O, binarization, bounding box, crop, and scaling."""

from __future__ import annotations

import numpy as np
import pytest

from gcocr.image import (AffineTransform, BinaryImage, BoundingBox,
                         EmptyGlyphError, GrayImage, PgmError, binarize,
                         bounding_box, crop, invert, load_pgm,
                         packed_rgb_value, save_pgm, scale_to)


def gray(rows, maxval=255) -> GrayImage:
    return GrayImage(np.asarray(rows), maxval=maxval)


def binary(rows) -> BinaryImage:
    return BinaryImage(np.asarray(rows, dtype=np.uint8))


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

def test_gray_image_shape_and_range_checks():
    img = gray([[0, 255], [7, 31]])
    assert img.width == 2 and img.height == 2
    with pytest.raises(ValueError):
        GrayImage(np.zeros(4, dtype=np.uint8))
    with pytest.raises(ValueError):
        GrayImage(np.zeros((0, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        gray([[0, 16]], maxval=15)
    with pytest.raises(ValueError):
        gray([[-1, 0]])
    with pytest.raises(ValueError):
        GrayImage(np.zeros((2, 2), dtype=np.uint8), maxval=0)


def test_binary_image_accepts_only_two_levels():
    img = binary([[0, 1], [1, 0]])
    assert img.ink_count() == 2
    with pytest.raises(ValueError):
        BinaryImage(np.array([[0, 2]], dtype=np.uint8))
    with pytest.raises(ValueError):
        BinaryImage(np.ones((3,), dtype=np.uint8))


def test_bounding_box_extent_and_validation():
    box = BoundingBox(top=1, bottom=4, left=2, right=2)
    assert box.height == 4 and box.width == 1
    with pytest.raises(ValueError):
        BoundingBox(top=3, bottom=2, left=0, right=0)
    with pytest.raises(ValueError):
        BoundingBox(top=0, bottom=0, left=5, right=4)


def test_affine_scaling_transform():
    t = AffineTransform.scaling(2.0, 0.5)
    assert t.determinant == 1.0
    assert t.apply(3.0, 8.0) == (6.0, 4.0)
    shear = AffineTransform(1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    assert shear.determinant == 0.0


# ---------------------------------------------------------------------------
# PGM parsing
# ---------------------------------------------------------------------------

def test_load_ascii_pgm(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P2\n2 2\n255\n0 255\n255 0\n")
    img = load_pgm(p)
    assert img.maxval == 255
    assert img.pixels.tolist() == [[0, 255], [255, 0]]


def test_load_binary_pgm_low_maxval(tmp_path):
    p = tmp_path / "b.pgm"
    p.write_bytes(b"P5\n2 2\n15\n" + bytes([1, 14, 0, 15]))
    img = load_pgm(p)
    assert img.maxval == 15
    assert img.pixels.tolist() == [[1, 14], [0, 15]]


def test_load_pgm_header_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P2 # comment\n# another\n2 1\n# more\n9\n3 9\n")
    img = load_pgm(p)
    assert img.pixels.tolist() == [[3, 9]]
    assert img.maxval == 9


def test_load_pgm_sixteen_bit_big_endian(tmp_path):
    p = tmp_path / "d.pgm"
    p.write_bytes(b"P5\n2 1\n300\n" + bytes([0x01, 0x2C, 0x00, 0x07]))
    img = load_pgm(p)
    assert img.maxval == 300
    assert img.pixels.tolist() == [[300, 7]]


def test_load_pgm_empty_file(tmp_path):
    p = tmp_path / "e.pgm"
    p.write_bytes(b"")
    with pytest.raises(PgmError, match="empty file") as exc:
        load_pgm(p)
    assert exc.value.offset == 0


def test_load_pgm_bad_magic(tmp_path):
    p = tmp_path / "f.pgm"
    p.write_bytes(b"P6\n1 1\n255\n\x00")
    with pytest.raises(PgmError, match="not a PGM file"):
        load_pgm(p)


def test_load_pgm_zero_maxval(tmp_path):
    p = tmp_path / "g.pgm"
    p.write_bytes(b"P2\n1 1\n0\n0\n")
    with pytest.raises(PgmError, match="maxval must be positive") as exc:
        load_pgm(p)
    # offset points at the scan position after the height token
    assert exc.value.offset == len(b"P2\n1 1")


def test_load_pgm_maxval_too_deep(tmp_path):
    p = tmp_path / "h.pgm"
    p.write_bytes(b"P2\n1 1\n70000\n0\n")
    with pytest.raises(PgmError, match="16-bit format limit"):
        load_pgm(p)


def test_load_pgm_truncated_binary_payload(tmp_path):
    p = tmp_path / "i.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([1, 2, 3]))
    with pytest.raises(PgmError, match="need 4 bytes, have 3") as exc:
        load_pgm(p)
    assert exc.value.offset == len(b"P5\n2 2\n255\n") + 3


def test_load_pgm_truncated_ascii_payload(tmp_path):
    p = tmp_path / "j.pgm"
    p.write_bytes(b"P2\n2 2\n255\n1 2 3\n")
    with pytest.raises(PgmError, match="expected 4 samples, got 3"):
        load_pgm(p)


def test_load_pgm_missing_separator_after_maxval(tmp_path):
    p = tmp_path / "k.pgm"
    p.write_bytes(b"P5\n1 1\n255")
    with pytest.raises(PgmError, match="whitespace after maxval"):
        load_pgm(p)


def test_load_pgm_sample_above_maxval(tmp_path):
    p = tmp_path / "l.pgm"
    p.write_bytes(b"P2\n1 2\n15\n3 16\n")
    with pytest.raises(PgmError, match="sample value 16 exceeds maxval 15"):
        load_pgm(p)


def test_load_pgm_bad_dimensions(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_bytes(b"P2\n0 3\n255\n")
    with pytest.raises(PgmError, match="bad dimensions 0x3"):
        load_pgm(p)


def test_save_load_round_trip_gray(tmp_path):
    rng = np.random.default_rng(7)
    img = gray(rng.integers(0, 256, size=(13, 9)))
    out = tmp_path / "r.pgm"
    save_pgm(img, out)
    back = load_pgm(out)
    assert back.maxval == 255
    assert np.array_equal(back.pixels, img.pixels)


def test_save_load_round_trip_preserves_low_maxval_samples(tmp_path):
    p = tmp_path / "low.pgm"
    p.write_bytes(b"P2\n3 1\n15\n0 7 15\n")
    img = load_pgm(p)
    out = tmp_path / "low_out.pgm"
    save_pgm(img, out)
    assert np.array_equal(load_pgm(out).pixels, img.pixels)


def test_save_binary_image_as_full_contrast(tmp_path):
    out = tmp_path / "bin.pgm"
    save_pgm(binary([[1, 0], [0, 1]]), out)
    back = load_pgm(out)
    assert back.pixels.tolist() == [[255, 0], [0, 255]]
    assert back.maxval == 255


def test_save_pgm_rejects_deep_and_foreign_inputs(tmp_path):
    with pytest.raises(ValueError, match="above 255"):
        save_pgm(GrayImage(np.array([[300]]), maxval=400), tmp_path / "x.pgm")
    with pytest.raises(TypeError):
        save_pgm(np.zeros((2, 2)), tmp_path / "y.pgm")


# ---------------------------------------------------------------------------
# Binarization
# ---------------------------------------------------------------------------

def test_binarize_threshold_is_inclusive():
    img = gray([[5, 7, 9]])
    assert binarize(img, 7).pixels.tolist() == [[0, 1, 1]]


def test_binarize_extreme_thresholds():
    img = gray([[5, 7, 9]])
    assert binarize(img, 0).pixels.tolist() == [[1, 1, 1]]
    assert binarize(img, 10).pixels.tolist() == [[0, 0, 0]]


def test_binarize_default_threshold_is_range_midpoint():
    img = gray([[127, 128, 255]])
    assert binarize(img).pixels.tolist() == [[0, 1, 1]]
    low = gray([[7, 8, 15]], maxval=15)
    assert binarize(low).pixels.tolist() == [[0, 1, 1]]


def test_binarize_idempotent_on_two_level_input():
    img = binary([[1, 0], [0, 1]])
    again = binarize(GrayImage(img.pixels, maxval=1), 1)
    assert np.array_equal(again.pixels, img.pixels)


def test_packed_rgb_values_and_thresholding():
    assert packed_rgb_value(15, 15) == 255 * 0x010101
    assert packed_rgb_value(0, 15) == 0
    assert packed_rgb_value(7, 15) == 119 * 0x010101
    img = gray([[6, 7]], maxval=15)
    out = binarize(img, 7_000_000, packed_rgb=True)
    assert out.pixels.tolist() == [[0, 1]]


def test_invert_swaps_polarity():
    img = binary([[1, 0, 1]])
    flipped = invert(img)
    assert flipped.pixels.tolist() == [[0, 1, 0]]
    assert np.array_equal(invert(flipped).pixels, img.pixels)


# ---------------------------------------------------------------------------
# Bounding box and crop
# ---------------------------------------------------------------------------

def test_bounding_box_single_pixel():
    a = np.zeros((6, 8), dtype=np.uint8)
    a[3, 5] = 1
    assert bounding_box(BinaryImage(a)) == BoundingBox(3, 3, 5, 5)


def test_bounding_box_opposite_corners():
    a = np.zeros((10, 10), dtype=np.uint8)
    a[0, 0] = a[9, 9] = 1
    assert bounding_box(BinaryImage(a)) == BoundingBox(0, 9, 0, 9)


def test_bounding_box_matches_exhaustive_scan():
    rng = np.random.default_rng(11)
    for _ in range(25):
        a = (rng.random((20, 20)) < 0.08).astype(np.uint8)
        if not a.any():
            a[int(rng.integers(20)), int(rng.integers(20))] = 1
        rows = [r for r in range(20) if a[r].any()]
        cols = [c for c in range(20) if a[:, c].any()]
        box = bounding_box(BinaryImage(a))
        assert (box.top, box.bottom) == (rows[0], rows[-1])
        assert (box.left, box.right) == (cols[0], cols[-1])


def test_bounding_box_empty_image():
    with pytest.raises(EmptyGlyphError):
        bounding_box(binary(np.zeros((4, 4), dtype=np.uint8)))


def test_crop_identity_and_single_cell():
    img = binary([[0, 1], [1, 1]])
    assert np.array_equal(crop(img, BoundingBox(0, 1, 0, 1)).pixels, img.pixels)
    assert crop(img, BoundingBox(1, 1, 0, 0)).pixels.tolist() == [[1]]


def test_crop_rejects_out_of_bounds_box():
    img = binary([[1, 1], [1, 1]])
    with pytest.raises(ValueError, match="outside"):
        crop(img, BoundingBox(0, 2, 0, 1))
    with pytest.raises(ValueError, match="outside"):
        crop(img, BoundingBox(-1, 1, 0, 1))


def test_crop_to_bounding_box_touches_all_edges():
    rng = np.random.default_rng(3)
    for _ in range(25):
        a = (rng.random((15, 17)) < 0.1).astype(np.uint8)
        if not a.any():
            a[7, 8] = 1
        tight = crop(BinaryImage(a), bounding_box(BinaryImage(a)))
        assert tight.pixels[0].any() and tight.pixels[-1].any()
        assert tight.pixels[:, 0].any() and tight.pixels[:, -1].any()
        # and re-boxing the tight crop is maximal
        assert bounding_box(tight) == BoundingBox(0, tight.height - 1,
                                                  0, tight.width - 1)


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------

def test_scale_to_identity():
    rng = np.random.default_rng(5)
    a = (rng.random((100, 100)) < 0.3).astype(np.uint8)
    out = scale_to(BinaryImage(a), 100, 100)
    assert np.array_equal(out.pixels, a)


def test_scale_to_doubling_makes_blocks():
    img = binary([[1, 0], [0, 1]])
    out = scale_to(img, 4, 4)
    assert out.pixels.tolist() == [[1, 1, 0, 0],
                                   [1, 1, 0, 0],
                                   [0, 0, 1, 1],
                                   [0, 0, 1, 1]]


def test_scale_to_shape_and_binary_range():
    rng = np.random.default_rng(17)
    for _ in range(20):
        h = int(rng.integers(1, 60))
        w = int(rng.integers(1, 60))
        tw = int(rng.integers(1, 130))
        th = int(rng.integers(1, 130))
        a = (rng.random((h, w)) < 0.4).astype(np.uint8)
        out = scale_to(BinaryImage(a), tw, th)
        assert out.pixels.shape == (th, tw)
        assert np.isin(out.pixels, (0, 1)).all()


def test_scale_to_matches_pixel_center_oracle():
    rng = np.random.default_rng(23)
    for _ in range(15):
        h = int(rng.integers(2, 40))
        w = int(rng.integers(2, 40))
        tw = int(rng.integers(1, 50))
        th = int(rng.integers(1, 50))
        a = (rng.random((h, w)) < 0.5).astype(np.uint8)
        out = scale_to(BinaryImage(a), tw, th)
        for r in range(th):
            for c in range(tw):
                sr = min(int((r + 0.5) * h / th), h - 1)
                sc = min(int((c + 0.5) * w / tw), w - 1)
                assert out.pixels[r, c] == a[sr, sc]


def test_scale_to_wide_glyph_keeps_ink():
    a = np.zeros((50, 200), dtype=np.uint8)
    a[10:40, 20:180] = 1
    out = scale_to(BinaryImage(a), 100, 100)
    assert out.pixels.shape == (100, 100)
    assert out.ink_count() > 0


def test_scale_to_rejects_empty_target():
    img = binary([[1]])
    with pytest.raises(ValueError):
        scale_to(img, 0, 10)
    with pytest.raises(ValueError):
        scale_to(img, 10, 0)
