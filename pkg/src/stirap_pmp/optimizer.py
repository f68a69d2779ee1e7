"""Trust-region minimisation with a BFGS model Hessian and dogleg steps."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .dynamics import DivergenceError, TimeGrid
from .pmp import CostWeights, parameter_gradient
from .pulses import GaussianParams, project_to_bounds

__all__ = [
    "NotPositiveDefiniteError",
    "DegenerateModelError",
    "TrustRegionConfig",
    "TrustRegionState",
    "IterationRecord",
    "quadratic_model",
    "bfgs_update",
    "dogleg_step",
    "dogleg_tau",
    "dogleg_path",
    "rho_ratio",
    "radius_update",
    "minimize",
    "PulseScaling",
    "optimize_pulses",
]

log = logging.getLogger(__name__)


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


class DegenerateModelError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TrustRegionConfig:
    initial_radius: float = 0.1
    max_radius: float = 1.0
    eta: float = 0.1
    gtol: float = 1e-6
    max_iter: int = 100
    min_radius: float = 1e-12
    curvature_tol: float = 1e-10
    b0: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0 < self.initial_radius <= self.max_radius:
            raise ValueError("need 0 < initial_radius <= max_radius")
        if not 0 < self.eta < 1:
            raise ValueError("acceptance threshold must lie in (0, 1)")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")


@dataclass
class TrustRegionState:
    x: np.ndarray
    f: float
    g: np.ndarray
    B: np.ndarray
    radius: float
    iteration: int = 0


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    f: float
    grad_norm: float
    radius: float
    rho: float
    accepted: bool
    x: tuple

    def as_row(self) -> dict:
        row = {"iter": self.iteration, "f": self.f, "grad_norm": self.grad_norm,
               "radius": self.radius, "rho": self.rho, "accepted": int(self.accepted)}
        row.update({f"x{i}": v for i, v in enumerate(self.x)})
        return row


def quadratic_model(state: TrustRegionState, p) -> float:
    p = np.asarray(p, dtype=float)
    return float(state.f + state.g @ p + 0.5 * p @ state.B @ p)


def bfgs_update(B, s, y, curvature_tol: float = 1e-10):
    """Return (B_next, updated).  The update is skipped unless y.s is safely positive."""
    B = np.asarray(B, dtype=float)
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    ys = float(y @ s)
    if ys <= curvature_tol * np.linalg.norm(y) * np.linalg.norm(s):
        return B, False
    Bs = B @ s
    sBs = float(s @ Bs)
    if sBs <= 0:
        return B, False
    B_next = B - np.outer(Bs, Bs) / sBs + np.outer(y, y) / ys
    return 0.5 * (B_next + B_next.T), True


def _newton_step(g, B):
    try:
        factor = scipy.linalg.cho_factor(B)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("model Hessian is not positive definite") from None
    return -scipy.linalg.cho_solve(factor, g)


def dogleg_step(g, B, radius: float) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    B = np.asarray(B, dtype=float)
    gnorm = np.linalg.norm(g)
    if gnorm == 0:
        return np.zeros_like(g)
    p_newton = _newton_step(g, B)
    if np.linalg.norm(p_newton) <= radius:
        return p_newton
    p_cauchy = -(g @ g) / (g @ B @ g) * g
    pc_norm = np.linalg.norm(p_cauchy)
    if pc_norm >= radius:
        return -radius * g / gnorm
    tau = dogleg_tau(p_cauchy, p_newton, radius)
    return p_cauchy + tau * (p_newton - p_cauchy)


def dogleg_tau(p_cauchy, p_newton, radius: float) -> float:
    """Positive root of ||p_U + tau (p_N - p_U)|| = radius, for ||p_U|| < radius < ||p_N||."""
    d = np.asarray(p_newton, dtype=float) - p_cauchy
    a = d @ d
    b = 2 * (np.asarray(p_cauchy) @ d)
    c = np.asarray(p_cauchy) @ p_cauchy - radius**2
    return float((-b + np.sqrt(b * b - 4 * a * c)) / (2 * a))


def dogleg_path(g, B, tau: float) -> np.ndarray:
    """Point on the two-segment path, tau in [0, 2]."""
    g = np.asarray(g, dtype=float)
    p_cauchy = -(g @ g) / (g @ B @ g) * g
    if tau <= 1:
        return tau * p_cauchy
    return p_cauchy + (tau - 1) * (_newton_step(g, B) - p_cauchy)


def rho_ratio(f_old: float, f_new: float, model_decrease: float) -> float:
    if not model_decrease > 1e-16:
        raise DegenerateModelError(f"model decrease {model_decrease:g} is not positive")
    return (f_old - f_new) / model_decrease


def radius_update(rho: float, radius: float, step_norm: float, max_radius: float) -> float:
    if rho < 0.25:
        return 0.25 * radius
    if rho > 0.75 and abs(step_norm - radius) <= 1e-12 * radius:
        return min(2 * radius, max_radius)
    return radius


def minimize(fun: Callable, x0, config: TrustRegionConfig | None = None,
             project: Callable | None = None, callback: Callable | None = None):
    """Minimise ``fun(x) -> (f, grad)`` from ``x0``.

    ``project`` maps a trial point onto the feasible set before it is
    evaluated; the projected displacement is the step used for the ratio test
    and the BFGS pair.  Returns ``(x, history)``.
    """
    config = config or TrustRegionConfig()
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    g = np.asarray(g, dtype=float)
    B = np.eye(len(x)) if config.b0 is None else np.array(config.b0, dtype=float)
    state = TrustRegionState(x, float(f), g, B, config.initial_radius)
    history = [IterationRecord(0, state.f, float(np.linalg.norm(g)), state.radius,
                               float("nan"), True, tuple(x))]

    for k in range(1, config.max_iter + 1):
        if np.linalg.norm(state.g) < config.gtol or state.radius < config.min_radius:
            break
        state.iteration = k
        p = dogleg_step(state.g, state.B, state.radius)
        trial = state.x + p
        if project is not None:
            trial = np.asarray(project(trial), dtype=float)
        step = trial - state.x
        pred = state.f - quadratic_model(state, step)
        f_new = g_new = None
        try:
            if not pred > 1e-16:
                raise DegenerateModelError(f"model decrease {pred:g} is not positive")
            f_new, g_new = fun(trial)
            f_new = float(f_new)
            rho = rho_ratio(state.f, f_new, pred) if np.isfinite(f_new) else -np.inf
        except (DegenerateModelError, DivergenceError, FloatingPointError) as exc:
            log.debug("iteration %d: trial rejected (%s)", k, exc)
            rho = -np.inf
        accepted = rho > config.eta
        new_radius = radius_update(rho, state.radius, float(np.linalg.norm(p)), config.max_radius)
        if accepted:
            g_new = np.asarray(g_new, dtype=float)
            state.B, _ = bfgs_update(state.B, step, g_new - state.g, config.curvature_tol)
            if log.isEnabledFor(logging.DEBUG):
                log.debug("iteration %d: min eig(B) = %.3e", k, np.linalg.eigvalsh(state.B)[0])
            state.x, state.f, state.g = trial, f_new, g_new
        state.radius = new_radius
        rec = IterationRecord(k, state.f, float(np.linalg.norm(state.g)), state.radius,
                              float(rho), bool(accepted), tuple(state.x))
        history.append(rec)
        log.debug("tr iter %d f=%.12g |g|=%.3g radius=%.3g rho=%.3g %s", k, state.f,
                  rec.grad_norm, state.radius, rho, "accept" if accepted else "reject")
        if callback is not None:
            callback(state, rec)
    return state.x, history


@dataclass(frozen=True)
class PulseScaling:
    """Affine map between pulse parameters and optimiser coordinates.

    Amplitudes stay in rad/ns; centres and widths are measured in units of
    the protocol duration.
    """

    duration: float

    @property
    def factors(self) -> np.ndarray:
        T = self.duration
        return np.array([1.0, 1.0, T, T, T, T])

    def to_x(self, params: GaussianParams) -> np.ndarray:
        return params.as_array() / self.factors

    def to_params(self, x) -> GaussianParams:
        return GaussianParams.from_array(np.asarray(x) * self.factors)


def optimize_pulses(system, params0: GaussianParams, weights: CostWeights, grid: TimeGrid,
                    config: TrustRegionConfig | None = None, psi0=None, callback=None):
    """Trust-region BFGS over the six Gaussian parameters.

    Returns ``(params, history)``; history x entries are in scaled coordinates.
    """
    scaling = PulseScaling(grid.duration)

    def fun(x):
        rep = parameter_gradient(system, scaling.to_params(x), weights, grid, psi0)
        return rep.objective.total, rep.gradient * scaling.factors

    def project(x):
        return scaling.to_x(project_to_bounds(np.asarray(x) * scaling.factors, grid.duration))

    x0 = project(scaling.to_x(params0))
    x, history = minimize(fun, x0, config, project=project, callback=callback)
    if np.array_equal(x, x0):
        # no step taken: avoid round-off from the coordinate map
        return project_to_bounds(params0, grid.duration), history
    return scaling.to_params(x), history
