"""Regenerate the frozen pipeline fixtures in this directory.

Run from the repository root only when the pipeline contract changes on
purpose.  Every fixture is re-derived and checked against the independent
oracles in tests/conftest.py before anything is written, so a regression
in the pipeline aborts the regeneration instead of freezing bad data.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))  # for conftest oracles

from conftest import count_components, gc_oracle  # noqa: E402

from gcocr.features import extract_features, segment_grid  # noqa: E402
from gcocr.harness import PipelineSettings, preprocess, run_pipeline  # noqa: E402
from gcocr.image import binarize, load_pgm, save_pgm  # noqa: E402
from gcocr.synth import default_specs, render_instance  # noqa: E402
from gcocr.thinning import thin  # noqa: E402

GOLD_CLASSES = ("C", "H", "O", "T", "Z")
SETTINGS = PipelineSettings(segments_per_side=4, factor=30.0)


def freeze_glyphs() -> None:
    specs = {s.name: s for s in default_specs()}
    for i, name in enumerate(GOLD_CLASSES):
        img = render_instance(specs[name], [9, i])
        pgm = HERE / f"glyph_{name}.pgm"
        save_pgm(img, pgm)

        loaded = load_pgm(pgm)
        assert np.array_equal(loaded.pixels, img.pixels), name

        pre = preprocess(loaded, SETTINGS)
        raw = extract_features(pre, 4)
        grid = segment_grid(pre.width, pre.height, 4)
        for value, (r0, r1, c0, c1) in zip(raw.values, grid.segments()):
            want = gc_oracle(pre.pixels, r0, r1, c0, c1)
            assert value == want, (name, (r0, r1, c0, c1), value, want)

        vec = run_pipeline(loaded, SETTINGS)
        assert np.array_equal(vec.values,
                              np.clip((raw.values + 30.0) / 60.0, 0.0, 1.0))
        (HERE / f"features_{name}.csv").write_text(
            vec.to_csv(f"glyph_{name}"), encoding="ascii")
        print(f"froze glyph_{name}.pgm + features_{name}.csv")


def freeze_skeleton_pair() -> None:
    img = load_pgm(HERE / "glyph_C.pgm")
    binary = binarize(img)
    skeleton = thin(binary)
    assert np.all(binary.pixels >= skeleton.pixels), "skeleton grew ink"
    assert np.array_equal(thin(skeleton).pixels, skeleton.pixels), \
        "skeleton is not a fixed point"
    assert count_components(binary) == count_components(skeleton)
    save_pgm(binary, HERE / "thin_input.pgm")
    save_pgm(skeleton, HERE / "thin_skeleton.pgm")
    print("froze thin_input.pgm + thin_skeleton.pgm")


if __name__ == "__main__":
    freeze_glyphs()
    freeze_skeleton_pair()
