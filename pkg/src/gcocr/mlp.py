"""One-hidden-layer perceptron: forward pass, loss, exact gradient.

Both layers use the logistic sigmoid.  Class targets are encoded one-hot
with 0.9 for the true class and 0.1 elsewhere, keeping targets inside the
sigmoid's open range, and the loss is half the sum of squared errors.  The
trainer sees parameters as one flat vector ordered w1 row-major, b1, w2
row-major, b2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

TARGET_ON = 0.9
TARGET_OFF = 0.1


class ShapeError(ValueError):
    """Input dimensions do not match the model layout."""


@dataclass(frozen=True, eq=False)
class MlpModel:
    """Weights and biases of an n_in x n_hidden x n_out network."""

    w1: np.ndarray  # (n_hidden, n_in)
    b1: np.ndarray  # (n_hidden,)
    w2: np.ndarray  # (n_out, n_hidden)
    b2: np.ndarray  # (n_out,)

    def __post_init__(self):
        w1 = np.asarray(self.w1, dtype=np.float64)
        b1 = np.asarray(self.b1, dtype=np.float64)
        w2 = np.asarray(self.w2, dtype=np.float64)
        b2 = np.asarray(self.b2, dtype=np.float64)
        if w1.ndim != 2 or w2.ndim != 2 or b1.ndim != 1 or b2.ndim != 1:
            raise ShapeError("w1/w2 must be matrices and b1/b2 vectors")
        if w1.shape[0] != b1.size or w2.shape[0] != b2.size or w2.shape[1] != w1.shape[0]:
            raise ShapeError(f"inconsistent layer shapes {w1.shape} {b1.shape} "
                             f"{w2.shape} {b2.shape}")
        for name, a in (("w1", w1), ("b1", b1), ("w2", w2), ("b2", b2)):
            if not np.isfinite(a).all():
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b2", b2)

    @property
    def n_in(self) -> int:
        return self.w1.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def n_out(self) -> int:
        return self.w2.shape[0]

    @property
    def n_params(self) -> int:
        return self.w1.size + self.b1.size + self.w2.size + self.b2.size


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """A normalized feature vector paired with its class index."""

    features: np.ndarray
    label: int

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64).ravel()
        if self.label < 0:
            raise ValueError(f"label must be non-negative, got {self.label}")
        object.__setattr__(self, "features", feats)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_model(n_in: int, n_hidden: int, n_out: int, seed: int = 0) -> MlpModel:
    """Fresh model with weights and biases uniform in [-0.5, 0.5]."""
    if min(n_in, n_hidden, n_out) < 1:
        raise ValueError(f"layer widths must be >= 1, got ({n_in}, {n_hidden}, {n_out})")
    rng = np.random.default_rng(seed)
    return MlpModel(w1=rng.uniform(-0.5, 0.5, (n_hidden, n_in)),
                    b1=rng.uniform(-0.5, 0.5, n_hidden),
                    w2=rng.uniform(-0.5, 0.5, (n_out, n_hidden)),
                    b2=rng.uniform(-0.5, 0.5, n_out))


def forward(m: MlpModel, x: np.ndarray) -> np.ndarray:
    """Network output for one input vector; every component in (0, 1)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != m.n_in:
        raise ShapeError(f"expected input of length {m.n_in}, got {x.size}")
    h = sigmoid(m.w1 @ x + m.b1)
    return sigmoid(m.w2 @ h + m.b2)


def predict(m: MlpModel, x: np.ndarray) -> int:
    """Index of the largest output; ties go to the lowest index."""
    return int(np.argmax(forward(m, x)))


def encode_targets(labels: np.ndarray, n_out: int) -> np.ndarray:
    """One-hot target matrix using the 0.9/0.1 encoding."""
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= n_out):
        raise ValueError(f"labels must lie in [0, {n_out}), got range "
                         f"[{labels.min()}, {labels.max()}]")
    t = np.full((labels.size, n_out), TARGET_OFF)
    t[np.arange(labels.size), labels] = TARGET_ON
    return t


def stack_samples(data: Sequence[LabeledSample], n_in: int,
                  n_out: int) -> tuple[np.ndarray, np.ndarray]:
    """Pack samples into an input matrix and a target matrix."""
    if len(data) == 0:
        raise ValueError("dataset is empty")
    for s in data:
        if s.features.size != n_in:
            raise ShapeError(f"sample has {s.features.size} features, expected {n_in}")
        if s.label >= n_out:
            raise ValueError(f"label {s.label} out of range for {n_out} outputs")
    x = np.stack([s.features for s in data])
    t = encode_targets(np.array([s.label for s in data]), n_out)
    return x, t


def batch_loss(m: MlpModel, x: np.ndarray, t: np.ndarray) -> float:
    """Half the summed squared error over a stacked batch."""
    h = sigmoid(x @ m.w1.T + m.b1)
    y = sigmoid(h @ m.w2.T + m.b2)
    d = y - t
    return 0.5 * float(np.sum(d * d))


def batch_gradient(m: MlpModel, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Exact flat gradient of batch_loss at m (backpropagation)."""
    h = sigmoid(x @ m.w1.T + m.b1)
    y = sigmoid(h @ m.w2.T + m.b2)
    d2 = (y - t) * y * (1.0 - y)
    d1 = (d2 @ m.w2) * h * (1.0 - h)
    return np.concatenate([(d1.T @ x).ravel(), d1.sum(axis=0),
                           (d2.T @ h).ravel(), d2.sum(axis=0)])


def loss(m: MlpModel, data: Sequence[LabeledSample]) -> float:
    """Half the sum of squared output errors over the whole dataset."""
    x, t = stack_samples(data, m.n_in, m.n_out)
    return batch_loss(m, x, t)


def gradient(m: MlpModel, data: Sequence[LabeledSample]) -> np.ndarray:
    """Gradient of loss with respect to the flattened parameters."""
    x, t = stack_samples(data, m.n_in, m.n_out)
    return batch_gradient(m, x, t)


# ---------------------------------------------------------------------------
# Flat parameter vector
# ---------------------------------------------------------------------------

def flatten_params(m: MlpModel) -> np.ndarray:
    """Parameters as one vector: w1 row-major, b1, w2 row-major, b2."""
    return np.concatenate([m.w1.ravel(), m.b1, m.w2.ravel(), m.b2])


def unflatten_params(vec: np.ndarray, n_in: int, n_hidden: int, n_out: int) -> MlpModel:
    """Inverse of flatten_params for the given layout."""
    vec = np.asarray(vec, dtype=np.float64)
    expected = n_hidden * n_in + n_hidden + n_out * n_hidden + n_out
    if vec.size != expected:
        raise ShapeError(f"expected {expected} parameters, got {vec.size}")
    a = n_hidden * n_in
    b = a + n_hidden
    c = b + n_out * n_hidden
    return MlpModel(w1=vec[:a].reshape(n_hidden, n_in).copy(),
                    b1=vec[a:b].copy(),
                    w2=vec[b:c].reshape(n_out, n_hidden).copy(),
                    b2=vec[c:].copy())


# ---------------------------------------------------------------------------
# Model file format
# ---------------------------------------------------------------------------

_MODEL_MAGIC = "gcocr-mlp"
_MODEL_VERSION = 1


def save_model(m: MlpModel, path) -> None:
    """Write the model as versioned text; parameters keep full precision."""
    lines = [f"{_MODEL_MAGIC} {_MODEL_VERSION}",
             f"{m.n_in} {m.n_hidden} {m.n_out}"]
    params = flatten_params(m)
    for start in range(0, params.size, 8):
        lines.append(" ".join(f"{v:.17g}" for v in params[start:start + 8]))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> MlpModel:
    """Read a model written by save_model; round-trips bit-exactly."""
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    tokens = text.split()
    if len(tokens) < 5 or tokens[0] != _MODEL_MAGIC:
        raise ValueError(f"{path}: not a model file")
    if int(tokens[1]) != _MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {tokens[1]}")
    n_in, n_hidden, n_out = (int(t) for t in tokens[2:5])
    params = np.array([float(t) for t in tokens[5:]])
    return unflatten_params(params, n_in, n_hidden, n_out)
