"""Bolza objective, costate propagation and pulse-parameter gradients.

Conventions (hbar = 1).  The costate is stored as the row vector <lambda|
with terminal value equal to the Wirtinger derivative of the terminal cost,

    <lambda(T)| = d phi / d|psi(T)> = -w_f <psi(T)|m><m|,

and it obeys d<lambda|/dt = i <lambda| H_nh - <psi| W, with W the diagonal
running-cost weight matrix.  With these, the first variation of J under a
real envelope change is

    dJ/dOmega_ch(t) = 2 Im <lambda(t)| dH/dOmega_ch |psi(t)>,

which the finite-difference tests pin down.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .chain import ChainSystem, basis, channel_operator
from .dynamics import DivergenceError, TimeGrid, Trajectory, propagate, rk4_step_matrices, stage_hamiltonians
from .pulses import PARAM_NAMES, GaussianParams, envelope_param_derivatives, project_to_bounds

__all__ = [
    "StepSizeError",
    "CostWeights",
    "ObjectiveReport",
    "CostateTrajectory",
    "GradientReport",
    "DescentLog",
    "objective",
    "evaluate",
    "terminal_costate",
    "backward_costate",
    "functional_gradient",
    "parameter_gradient",
    "pontryagin_hamiltonian",
    "gradient_descent",
]

log = logging.getLogger(__name__)


class StepSizeError(RuntimeError):
    pass


@dataclass(frozen=True)
class CostWeights:
    w_f: float = 1.0
    w_1: float = 0.01
    w_leak: float = 0.05
    target: int = 2
    penalized: tuple = (1,)
    leakage: tuple | None = None  # default: every level above ``target``

    def __post_init__(self):
        if min(self.w_f, self.w_1, self.w_leak) < 0:
            raise ValueError("cost weights must be non-negative")
        object.__setattr__(self, "penalized", tuple(int(i) for i in self.penalized))
        if self.leakage is not None:
            object.__setattr__(self, "leakage", tuple(int(i) for i in self.leakage))

    def leakage_levels(self, n: int) -> tuple:
        return tuple(range(self.target + 1, n)) if self.leakage is None else self.leakage

    def running_weights(self, n: int) -> np.ndarray:
        """Diagonal of W, so that L = <psi|W|psi>."""
        w = np.zeros(n)
        for i in self.penalized:
            w[i] += self.w_1
        for i in self.leakage_levels(n):
            w[i] += self.w_leak
        return w

    def scaled(self, factor: float) -> "CostWeights":
        return CostWeights(self.w_f * factor, self.w_1 * factor, self.w_leak * factor,
                           self.target, self.penalized, self.leakage)


@dataclass(frozen=True, eq=False)
class ObjectiveReport:
    total: float
    terminal: float
    running: float
    fidelity: float
    max_leakage: float
    running_density: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class CostateTrajectory:
    grid: TimeGrid
    costates: np.ndarray  # (M+1, N), row vectors <lambda(t_k)|


@dataclass(frozen=True, eq=False)
class GradientReport:
    gradient: np.ndarray
    functional: dict = field(repr=False)
    objective: ObjectiveReport | None = None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.gradient))

    def as_dict(self) -> dict:
        return dict(zip(PARAM_NAMES, self.gradient.tolist()))


def _initial(system, psi0):
    return basis(system.dimension, 0) if psi0 is None else np.asarray(psi0, dtype=complex)


def _report(traj: Trajectory, weights: CostWeights) -> ObjectiveReport:
    n = traj.states.shape[1]
    pops = np.abs(traj.states) ** 2
    density = pops @ weights.running_weights(n)
    running = float(traj.grid.trapezoid(density))
    fidelity = float(pops[-1, weights.target])
    terminal = weights.w_f * (1.0 - fidelity)
    leak = list(weights.leakage_levels(n))
    max_leak = float(pops[:, leak].sum(axis=1).max()) if leak else 0.0
    return ObjectiveReport(terminal + running, terminal, running, fidelity, max_leak, density)


def evaluate(system: ChainSystem, params: GaussianParams, weights: CostWeights,
             grid: TimeGrid, psi0=None, hamiltonians=None) -> tuple[ObjectiveReport, Trajectory]:
    traj = propagate(system, params, grid, _initial(system, psi0), hamiltonians)
    return _report(traj, weights), traj


def objective(system: ChainSystem, params: GaussianParams, weights: CostWeights,
              grid: TimeGrid, psi0=None) -> ObjectiveReport:
    """J = w_f (1 - |<m|psi(T)>|^2) + int_0^T <psi|W|psi> dt (trapezoidal)."""
    return evaluate(system, params, weights, grid, psi0)[0]


def terminal_costate(final_state, weights: CostWeights, target: int | None = None) -> np.ndarray:
    m = weights.target if target is None else target
    psi = np.asarray(final_state, dtype=complex)
    lam = np.zeros_like(psi)
    lam[m] = -weights.w_f * np.conj(psi[m])
    return lam


def backward_costate(system: ChainSystem, params: GaussianParams, weights: CostWeights,
                     grid: TimeGrid, trajectory: Trajectory, hamiltonians=None) -> CostateTrajectory:
    """Integrate the costate from T back to 0 with RK4.

    The running-cost source needs psi at step midpoints; it is taken from the
    cubic Hermite interpolant of the stored nodes (node slopes -i H psi).
    """
    h_nodes, h_mid = hamiltonians if hamiltonians is not None else stage_hamiltonians(system, params, grid)
    psi = trajectory.states
    h = grid.step
    w = weights.running_weights(system.dimension)

    # column form c = <lambda|^T:  dc/dt = i H^T c - W conj(psi)
    gen_nodes = 1j * np.swapaxes(h_nodes, -1, -2)
    gen_mid = 1j * np.swapaxes(h_mid, -1, -2)
    back = rk4_step_matrices(gen_nodes[1:], gen_mid, gen_nodes[:-1], -h)

    slope = -1j * np.einsum("kij,kj->ki", h_nodes, psi)
    psi_mid = 0.5 * (psi[:-1] + psi[1:]) + (h / 8.0) * (slope[:-1] - slope[1:])
    src_nodes = -w * np.conj(psi)
    src_mid = -w * np.conj(psi_mid)
    # RK4 increment of the source alone (zero initial value), stepping by -h
    b1, b2, b3 = src_nodes[1:], src_mid, src_nodes[:-1]
    hb = -h
    k1 = b1
    k2 = np.einsum("kij,kj->ki", gen_mid, 0.5 * hb * k1) + b2
    k3 = np.einsum("kij,kj->ki", gen_mid, 0.5 * hb * k2) + b2
    k4 = np.einsum("kij,kj->ki", gen_nodes[:-1], hb * k3) + b3
    forcing = (hb / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    m = grid.steps
    lam = np.empty_like(psi)
    c = terminal_costate(psi[-1], weights)
    lam[m] = c
    for k in range(m - 1, -1, -1):
        c = back[k] @ c + forcing[k]
        lam[k] = c
    if not np.all(np.isfinite(lam)):
        bad = ~np.isfinite(lam).all(axis=1)
        raise DivergenceError(int(np.nonzero(bad)[0].max()), "costate diverged")
    return CostateTrajectory(grid, lam)


def functional_gradient(system: ChainSystem, trajectory: Trajectory,
                        costate: CostateTrajectory, channels: Iterable[str] = ("p", "s")) -> dict:
    """dJ/dOmega_ch sampled on the grid nodes, per channel."""
    out = {}
    for ch in channels:
        op = channel_operator(system, ch)
        val = np.einsum("ki,ij,kj->k", costate.costates, op, trajectory.states)
        out[ch] = 2.0 * val.imag
    return out


def parameter_gradient(system: ChainSystem, params: GaussianParams, weights: CostWeights,
                       grid: TimeGrid, psi0=None) -> GradientReport:
    """dJ/du for u = (A_p, A_s, t0_p, t0_s, sigma_p, sigma_s)."""
    hams = stage_hamiltonians(system, params, grid)
    report, traj = evaluate(system, params, weights, grid, psi0, hams)
    lam = backward_costate(system, params, weights, grid, traj, hams)
    fg = functional_gradient(system, traj, lam)
    t = grid.times
    grad = np.zeros(6)
    for i, ch in enumerate(("p", "s")):
        d_amp, d_t0, d_sigma = envelope_param_derivatives(params, ch, t)
        grad[i] = grid.trapezoid(fg[ch] * d_amp)
        grad[2 + i] = grid.trapezoid(fg[ch] * d_t0)
        grad[4 + i] = grid.trapezoid(fg[ch] * d_sigma)
    return GradientReport(grad, fg, report)


def pontryagin_hamiltonian(state, costate, hamiltonian, running_cost: float = 0.0) -> float:
    """Im <lambda|H|psi> - L."""
    val = np.asarray(costate) @ np.asarray(hamiltonian) @ np.asarray(state)
    return float(np.imag(val) - running_cost)


@dataclass
class DescentLog:
    objective: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    step_norm: list = field(default_factory=list)
    eta: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.objective)

    def rows(self):
        for k in range(self.iterations):
            yield {"iter": k, "f": self.objective[k], "grad_norm": self.grad_norm[k],
                   "step_norm": self.step_norm[k], "eta": self.eta[k]}


def _step_size(eta, k):
    if callable(eta):
        return float(eta(k))
    if np.ndim(eta) == 0:
        return float(eta)
    seq = list(eta)
    return float(seq[min(k, len(seq) - 1)])


def gradient_descent(system: ChainSystem, params0: GaussianParams, weights: CostWeights,
                     grid: TimeGrid, eta: float | Sequence[float] | Callable = 1e-3,
                     tol: float = 1e-8, max_iter: int = 100, psi0=None,
                     scale=None, patience: int = 10) -> tuple[GaussianParams, DescentLog]:
    """Projected first-order update u <- u - eta_k grad J(u).

    ``scale`` (length 6) rescales coordinates, updating x = u / scale; the
    default works directly in rad/ns and ns.
    """
    scale = np.ones(6) if scale is None else np.asarray(scale, dtype=float)
    params = params0
    logbook = DescentLog()
    increases = 0
    prev = np.inf
    for k in range(max_iter):
        rep = parameter_gradient(system, params, weights, grid, psi0)
        f = rep.objective.total
        if f > prev:
            increases += 1
            if increases >= patience:
                raise StepSizeError(f"objective rose for {patience} consecutive iterations")
        else:
            increases = 0
        prev = f
        g = rep.gradient * scale
        ek = _step_size(eta, k)
        if not ek > 0:
            raise ValueError("step sizes must be positive")
        x_new = params.as_array() / scale - ek * g
        new = project_to_bounds(x_new * scale, grid.duration)
        step = float(np.linalg.norm((new.as_array() - params.as_array()) / scale))
        logbook.objective.append(f)
        logbook.grad_norm.append(float(np.linalg.norm(g)))
        logbook.step_norm.append(step)
        logbook.eta.append(ek)
        log.debug("gd iter %d J=%.10g |g|=%.3g step=%.3g", k, f, np.linalg.norm(g), step)
        params = new
        if step < tol:
            break
    return params, logbook
