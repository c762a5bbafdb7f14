"""Handwritten character recognition from thinned glyph skeletons.

The pipeline binarizes a grayscale raster, crops it to the ink bounding
box, rescales to 100x100, thins strokes to one-pixel skeletons, measures
the horizontal drift of the leftmost ink per grid segment, normalizes
into [0, 1], and classifies with a one-hidden-layer network trained by
nonlinear conjugate gradient.
"""

from .image import (AffineTransform, BinaryImage, BoundingBox, EmptyGlyphError,
                    GrayImage, PgmError, binarize, bounding_box, crop, invert,
                    load_pgm, packed_rgb_value, save_pgm, scale_to)
from .thinning import Neighborhood, deletable, neighborhood_at, nz_count, \
    thin, zo_count
from .features import (FeatureVector, SegmentGrid, extract_features,
                       gc_of_segment, normalize, segment_grid)
from .mlp import (LabeledSample, MlpModel, ShapeError, flatten_params, forward,
                  gradient, init_model, load_model, loss, predict, save_model,
                  unflatten_params)
from .cg import (LineSearchError, NumericFailure, TraceRecord, TrainConfig,
                 TrainTrace, cg_minimize, line_search, minimize, train)
from .synth import GLYPH_CLASSES, GlyphSpec, default_specs, render_glyph
from .harness import (CellResult, Dataset, EvalResult, ExperimentConfig,
                      ExperimentReport, PipelineSettings, Sample, evaluate,
                      load_corpus, pipeline_features, preprocess,
                      run_experiment, run_pipeline, synth_generate)

__version__ = "0.1.0"
