"""Full-batch gradient descent with momentum and adaptive per-coordinate gains.

The update rule is the classical neighbor-embedding recipe: a momentum
term that switches from a low to a high coefficient partway through,
per-coordinate gain factors driven by sign agreement between the
gradient and the velocity, optional early exaggeration of the input
affinity, and step halving when a step would make the loss infinite.

Any object with ``loss(Z) -> float`` and ``grad(Z) -> array`` methods can
be minimized; early exaggeration additionally needs
``with_input_scaled(factor)``.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DivergenceError, ParameterError
from .linalg import as_float_matrix


@dataclass(frozen=True)
class OptimizerConfig:
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch: int = 250
    gain_min: float = 0.01
    gain_increase: float = 0.2
    gain_decay: float = 0.8
    # None lets the caller's policy decide; the optimizer reads it as off.
    early_exaggeration: Optional[bool] = None
    exaggeration_factor: float = 12.0
    exaggeration_iters: int = 250
    grad_tol: float = 1e-7
    max_halvings: int = 30

    def validate(self) -> "OptimizerConfig":
        if self.iterations < 0:
            raise ParameterError("iterations must be nonnegative")
        if not self.learning_rate > 0.0:
            raise ParameterError("learning_rate must be positive")
        for name in ("momentum_early", "momentum_late"):
            m = getattr(self, name)
            if not (0.0 <= m < 1.0):
                raise ParameterError(f"{name} must lie in [0, 1), got {m}")
        if not self.exaggeration_factor > 0.0:
            raise ParameterError("exaggeration_factor must be positive")
        return self


class MinimizeResult(NamedTuple):
    Z: np.ndarray          # lowest-loss iterate observed, under the plain objective
    history: np.ndarray    # loss per iteration, under the objective active then


TraceSink = Callable[[int, float, float], None]


def _acceptable(problem, candidate: np.ndarray) -> bool:
    """A step is acceptable when the iterate and its loss are finite."""
    if not np.isfinite(candidate).all():
        return False
    return bool(np.isfinite(problem.loss(candidate)))


def minimize(problem, Z0, config: OptimizerConfig = None,
             trace: Optional[TraceSink] = None) -> MinimizeResult:
    """Minimize a coupling-style problem starting from Z0.

    ``history[t]`` records the loss of the iterate entering iteration t
    under the objective active at that iteration, so switching off early
    exaggeration shows up as a discontinuity.  The returned Z is the
    best iterate measured by the unexaggerated objective, which makes it
    monotone in hindsight regardless of transient loss increases.

    Raises
    ------
    ParameterError
        If the loss at Z0 is not finite.
    DivergenceError
        If an iterate turns non-finite, or step halving cannot restore a
        finite loss within ``config.max_halvings`` halvings.
    """
    cfg = (config or OptimizerConfig()).validate()
    Z = as_float_matrix(Z0, "Z0").copy()
    base_loss = problem.loss(Z)
    if not np.isfinite(base_loss):
        raise ParameterError("initialization has non-finite loss")
    exaggerate = bool(cfg.early_exaggeration) and cfg.exaggeration_iters > 0
    boosted = problem.with_input_scaled(cfg.exaggeration_factor) if exaggerate else None

    best_Z = Z.copy()
    best_loss = base_loss
    velocity = np.zeros_like(Z)
    gains = np.ones_like(Z)
    history = []

    for t in range(cfg.iterations):
        active = boosted if (exaggerate and t < cfg.exaggeration_iters) else problem
        loss_t = active.loss(Z)
        if np.isnan(loss_t):
            raise DivergenceError(f"loss is NaN at iteration {t}")
        history.append(loss_t)
        true_t = problem.loss(Z) if active is not problem else loss_t
        if true_t < best_loss:
            best_loss = true_t
            best_Z = Z.copy()

        g = active.grad(Z)
        if not np.isfinite(g).all():
            raise DivergenceError(f"gradient is non-finite at iteration {t}")
        grad_norm = float(np.abs(g).max()) if g.size else 0.0
        if trace is not None:
            trace(t, loss_t, grad_norm)
        if grad_norm < cfg.grad_tol:
            break

        aligned = (g > 0.0) == (velocity > 0.0)
        gains = np.where(aligned, gains * cfg.gain_decay, gains + cfg.gain_increase)
        np.clip(gains, cfg.gain_min, None, out=gains)
        momentum = cfg.momentum_early if t < cfg.momentum_switch else cfg.momentum_late
        velocity = momentum * velocity - cfg.learning_rate * gains * g

        candidate = Z + velocity
        halvings = 0
        while not _acceptable(active, candidate):
            halvings += 1
            if halvings > cfg.max_halvings:
                raise DivergenceError(
                    f"step halving failed to restore a finite loss at iteration {t}")
            velocity = velocity / 2.0
            candidate = Z + velocity
        Z = candidate

    final_loss = problem.loss(Z)
    if not np.isnan(final_loss) and final_loss < best_loss:
        best_loss = final_loss
        best_Z = Z.copy()
    return MinimizeResult(best_Z, np.asarray(history, dtype=np.float64))
