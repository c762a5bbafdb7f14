"""Full-batch nonlinear conjugate-gradient minimization.

The first search direction is the negative gradient; each later direction
mixes the new negative gradient with the previous direction through a beta
coefficient (Polak-Ribiere with a non-negativity clamp by default,
Fletcher-Reeves selectable).  Step lengths come from a bracket-and-backtrack
line search with the Armijo sufficient-decrease test, so there is no
user-set learning rate.  The direction resets to steepest descent every
restart_interval iterations, when the line search fails, or when the
current direction stops being a descent direction; a restart_interval of 1
turns the whole method into steepest descent, which is handy as a baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .mlp import MlpModel, LabeledSample, batch_gradient, batch_loss, \
    flatten_params, init_model, stack_samples, unflatten_params

BETA_VARIANTS = ("polak-ribiere-plus", "fletcher-reeves")


class LineSearchError(RuntimeError):
    """No step along the current direction decreases the objective."""


class NumericFailure(RuntimeError):
    """Loss or gradient became non-finite at some iteration."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite loss or gradient at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class TrainConfig:
    max_iterations: int = 300
    grad_tolerance: float = 1e-6     # on the infinity norm of the gradient
    loss_tolerance: float = 0.0      # stop when one step improves less than this
    restart_interval: Optional[int] = None  # None = parameter dimension
    beta_variant: str = "polak-ribiere-plus"
    init_step: float = 1.0
    max_expansions: int = 20
    shrink: float = 0.5
    armijo_c: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.grad_tolerance < 0 or self.loss_tolerance < 0:
            raise ValueError("tolerances must be non-negative")
        if self.restart_interval is not None and self.restart_interval < 1:
            raise ValueError(f"restart_interval must be >= 1, got {self.restart_interval}")
        if self.beta_variant not in BETA_VARIANTS:
            raise ValueError(f"beta_variant must be one of {BETA_VARIANTS}, "
                             f"got {self.beta_variant!r}")
        if not self.init_step > 0:
            raise ValueError(f"init_step must be positive, got {self.init_step}")
        if self.max_expansions < 0:
            raise ValueError(f"max_expansions must be >= 0, got {self.max_expansions}")
        if not 0 < self.shrink < 1:
            raise ValueError(f"shrink must lie in (0, 1), got {self.shrink}")
        if not 0 < self.armijo_c < 1:
            raise ValueError(f"armijo_c must lie in (0, 1), got {self.armijo_c}")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    loss: float        # objective after the accepted step
    grad_norm: float   # infinity norm of the new gradient
    step: float
    beta: float        # coefficient used to build this iteration's direction
    restart: bool      # direction was reset to steepest descent


@dataclass(frozen=True)
class TrainTrace:
    initial_loss: float
    records: tuple = ()
    stop_reason: str = "max_iterations"

    def losses(self) -> list:
        return [r.loss for r in self.records]

    def to_csv(self) -> str:
        lines = ["iteration,loss,grad_norm,step,beta,restart"]
        for r in self.records:
            lines.append(f"{r.iteration},{r.loss:.17g},{r.grad_norm:.17g},"
                         f"{r.step:.17g},{r.beta:.17g},{int(r.restart)}")
        return "\n".join(lines) + "\n"


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v)))


def line_search(phi: Callable[[float], float], g0_dot_p: float, *,
                f0: Optional[float] = None, init_step: float = 1.0,
                armijo_c: float = 1e-4, shrink: float = 0.5,
                max_expansions: int = 20,
                min_step: float = 1e-16) -> tuple[float, float]:
    """Pick a step length along a descent direction; return (step, value).

    phi(a) is the objective restricted to the ray, so phi(0) is the current
    value and g0_dot_p its slope there.  The first probe sits at init_step;
    while the Armijo test phi(a) <= phi(0) + c*a*g0_dot_p keeps holding and
    the value keeps dropping, the step doubles (up to max_expansions), and
    the best probe wins.  If the first probe already fails the test, the
    step shrinks geometrically until the test passes or the probe falls
    below min_step, in which case any probe that decreased the value at all
    is returned.  With no decrease anywhere, raises LineSearchError.
    """
    if not g0_dot_p < 0:
        raise ValueError(f"directional derivative must be negative, got {g0_dot_p}")
    if f0 is None:
        f0 = phi(0.0)

    def armijo(a: float, fa: float) -> bool:
        # the strict fa < f0 guard rejects steps so small that the Armijo
        # bound rounds to f0 itself, which would accept a null step on a
        # constant function
        return fa < f0 and fa <= f0 + armijo_c * a * g0_dot_p

    a = init_step
    fa = phi(a)
    if armijo(a, fa):
        best_a, best_f = a, fa
        for _ in range(max_expansions):
            a = a * 2.0
            fa = phi(a)
            if not armijo(a, fa) or fa >= best_f:
                break
            best_a, best_f = a, fa
        return best_a, best_f

    # Backtrack; remember the best plain decrease in case Armijo never passes.
    fallback = None
    if fa < f0:
        fallback = (a, fa)
    while a > min_step:
        a = a * shrink
        fa = phi(a)
        if armijo(a, fa):
            return a, fa
        if fa < f0 and (fallback is None or fa < fallback[1]):
            fallback = (a, fa)
    if fallback is not None:
        return fallback
    raise LineSearchError("no step produced a decrease")


def _beta_value(variant: str, g_new: np.ndarray, g_old: np.ndarray) -> float:
    denom = float(g_old @ g_old)
    if denom == 0.0:
        return 0.0
    if variant == "fletcher-reeves":
        return float(g_new @ g_new) / denom
    return max(0.0, float(g_new @ (g_new - g_old)) / denom)


def minimize(fun: Callable[[np.ndarray], float],
             grad: Callable[[np.ndarray], np.ndarray],
             x0: np.ndarray, cfg: TrainConfig,
             step_oracle: Optional[Callable] = None) -> tuple[np.ndarray, TrainTrace]:
    """Generic CG driver; step_oracle(x, p) replaces the line search if given.

    Returns the final point and a TrainTrace with one record per accepted
    step.  A zero-gradient start (infinity norm below grad_tolerance)
    returns immediately with an empty trace.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    f = float(fun(x))
    g = np.asarray(grad(x), dtype=np.float64)
    if not np.isfinite(f) or not np.isfinite(g).all():
        raise NumericFailure(0)
    initial_loss = f
    if _inf_norm(g) < cfg.grad_tolerance:
        return x, TrainTrace(initial_loss, (), "grad_tolerance")

    interval = cfg.restart_interval if cfg.restart_interval is not None else x.size
    records = []
    stop = "max_iterations"
    p = -g
    g_prev = g
    since_restart = 0
    # First probe scaled by the gradient size so one step cannot fling the
    # parameters into sigmoid saturation; later probes warm-start from the
    # previous accepted step with a slope-ratio correction.
    probe = cfg.init_step / max(1.0, _inf_norm(g))
    prev_slope = None

    for k in range(cfg.max_iterations):
        if k == 0:
            beta, p, restarted = 0.0, -g, False
        elif since_restart >= interval:
            beta, p, restarted, since_restart = 0.0, -g, True, 0
        else:
            beta = _beta_value(cfg.beta_variant, g, g_prev)
            p = -g + beta * p
            restarted = False
        slope = float(g @ p)
        if slope >= 0.0 and not restarted:
            beta, p, restarted, since_restart = 0.0, -g, True, 0
            slope = float(g @ p)
        if slope >= 0.0:
            stop = "line_search_failure"
            break

        if prev_slope is not None:
            ratio = min(max(prev_slope / slope, 1e-2), 1e2)
            probe = probe * ratio

        def _search(direction, s):
            return line_search(lambda t: float(fun(x + t * direction)), s,
                               f0=f, init_step=probe, armijo_c=cfg.armijo_c,
                               shrink=cfg.shrink,
                               max_expansions=cfg.max_expansions)

        if step_oracle is not None:
            a = float(step_oracle(x, p))
            f_new = float(fun(x + a * p))
        else:
            try:
                a, f_new = _search(p, slope)
            except LineSearchError:
                if restarted or k == 0:
                    stop = "line_search_failure"
                    break
                beta, p, restarted, since_restart = 0.0, -g, True, 0
                slope = float(g @ p)
                if slope >= 0.0:
                    stop = "line_search_failure"
                    break
                try:
                    a, f_new = _search(p, slope)
                except LineSearchError:
                    stop = "line_search_failure"
                    break

        x = x + a * p
        g_new = np.asarray(grad(x), dtype=np.float64)
        if not np.isfinite(f_new) or not np.isfinite(g_new).all():
            raise NumericFailure(k)
        records.append(TraceRecord(k, f_new, _inf_norm(g_new), float(a),
                                   beta, restarted))
        since_restart += 1
        improvement = f - f_new
        probe, prev_slope = float(a), slope
        g_prev, g, f = g, g_new, f_new
        if _inf_norm(g) < cfg.grad_tolerance:
            stop = "grad_tolerance"
            break
        if improvement < cfg.loss_tolerance:
            stop = "loss_tolerance"
            break

    return x, TrainTrace(initial_loss, tuple(records), stop)


def cg_minimize(m: MlpModel, data: Sequence[LabeledSample],
                cfg: TrainConfig) -> tuple[MlpModel, TrainTrace]:
    """Train an existing model on the full batch; returns (model, trace)."""
    x_mat, t_mat = stack_samples(data, m.n_in, m.n_out)
    n_in, n_hidden, n_out = m.n_in, m.n_hidden, m.n_out

    def fun(vec):
        return batch_loss(unflatten_params(vec, n_in, n_hidden, n_out), x_mat, t_mat)

    def grad(vec):
        return batch_gradient(unflatten_params(vec, n_in, n_hidden, n_out),
                              x_mat, t_mat)

    x_final, trace = minimize(fun, grad, flatten_params(m), cfg)
    return unflatten_params(x_final, n_in, n_hidden, n_out), trace


def train(data: Sequence[LabeledSample], layout: tuple[int, int, int],
          cfg: TrainConfig) -> tuple[MlpModel, TrainTrace]:
    """Initialize from cfg.seed and train; deterministic for fixed inputs."""
    n_in, n_hidden, n_out = layout
    m = init_model(n_in, n_hidden, n_out, seed=cfg.seed)
    return cg_minimize(m, data, cfg)
