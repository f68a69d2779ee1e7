"""Time grids, state propagation and population diagnostics.

The state obeys d psi/dt = -i H_nh(t) psi.  ``propagate`` uses classical RK4
on a uniform grid; because the equation is linear, every step is a fixed
N x N matrix, so the step matrices are built in one vectorised pass and then
applied sequentially.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .chain import ChainSystem, SubspacePartition, non_hermitian_hamiltonian, partition
from .pulses import GaussianParams, sample_envelopes

__all__ = [
    "DivergenceError",
    "TimeGrid",
    "Trajectory",
    "PopulationRecord",
    "auto_grid",
    "hamiltonian_series",
    "rk4_step_matrices",
    "stage_hamiltonians",
    "propagate",
    "propagate_oracle",
    "populations",
]


class DivergenceError(FloatingPointError):
    def __init__(self, node: int, msg: str = ""):
        super().__init__(msg or f"non-finite state at node {node}")
        self.node = node


@dataclass(frozen=True)
class TimeGrid:
    duration: float
    steps: int

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("grid duration must be positive")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError("grid needs at least two steps")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "duration", float(self.duration))

    @property
    def step(self) -> float:
        return self.duration / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.duration, self.steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.steps) + 0.5) * self.step

    def scaled(self, factor: float) -> "TimeGrid":
        return TimeGrid(self.duration * factor, self.steps)

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.duration, self.steps * factor)

    def trapezoid(self, values, axis=0):
        return np.trapezoid(values, dx=self.step, axis=axis)


def hamiltonian_series(system: ChainSystem, params: GaussianParams, times) -> np.ndarray:
    env = sample_envelopes(params, times)
    return non_hermitian_hamiltonian(system, env.values)


def auto_grid(system: ChainSystem, params: GaussianParams, duration: float,
              width_fraction: float = 50.0, phase_step: float = 0.05,
              min_steps: int = 200) -> TimeGrid:
    """Uniform grid with h <= min(sigma)/width_fraction and h*||H|| <= phase_step."""
    probe = np.linspace(0.0, duration, 401)
    norm = np.max(np.linalg.norm(hamiltonian_series(system, params, probe), ord=2, axis=(-2, -1)))
    h = min(params.sigma_p, params.sigma_s) / width_fraction
    if norm > 0:
        h = min(h, phase_step / norm)
    return TimeGrid(duration, max(min_steps, int(np.ceil(duration / h))))


def rk4_step_matrices(gen_start, gen_mid, gen_end, h):
    """Batched RK4 step matrix for dy/dt = G(t) y.

    ``gen_*`` have shape (..., N, N) and hold G at the step start, midpoint and
    end.  ``h`` may be negative for backward stepping.
    """
    eye = np.eye(gen_start.shape[-1])
    k1 = gen_start
    k2 = gen_mid @ (eye + 0.5 * h * k1)
    k3 = gen_mid @ (eye + 0.5 * h * k2)
    k4 = gen_end @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: TimeGrid
    states: np.ndarray  # (M+1, N)

    @property
    def times(self):
        return self.grid.times

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


def _chain_apply(steps, psi0):
    """psi_{k+1} = steps[k] @ psi_k for all k."""
    m = len(steps)
    out = np.empty((m + 1,) + np.shape(psi0), dtype=complex)
    out[0] = psi0
    psi = out[0]
    for k in range(m):
        psi = steps[k] @ psi
        out[k + 1] = psi
    bad = ~np.isfinite(out).reshape(m + 1, -1).all(axis=1)
    if bad.any():
        raise DivergenceError(int(np.argmax(bad)))
    return out


def _check_initial(psi0, n):
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape[0] != n:
        raise ValueError(f"initial state has dimension {psi0.shape[0]}, system has {n}")
    return psi0


def propagate(system: ChainSystem, params: GaussianParams, grid: TimeGrid, psi0,
              hamiltonians=None) -> Trajectory:
    """RK4 solution of the no-jump Schrodinger equation on ``grid``.

    ``psi0`` may also be an (N, K) block of initial states; the trajectory then
    stores shape (M+1, N, K).  ``hamiltonians`` optionally supplies the
    precomputed (nodes, midpoints) pair from :func:`stage_hamiltonians`.
    """
    psi0 = _check_initial(psi0, system.dimension)
    h_nodes, h_mid = hamiltonians if hamiltonians is not None else stage_hamiltonians(system, params, grid)
    with np.errstate(over="ignore", invalid="ignore"):
        steps = rk4_step_matrices(-1j * h_nodes[:-1], -1j * h_mid, -1j * h_nodes[1:], grid.step)
        states = _chain_apply(steps, psi0)
    return Trajectory(grid, states)


def stage_hamiltonians(system: ChainSystem, params: GaussianParams, grid: TimeGrid):
    """H_nh at the grid nodes and at the step midpoints."""
    return (hamiltonian_series(system, params, grid.times),
            hamiltonian_series(system, params, grid.midpoints))


def propagate_oracle(system: ChainSystem, params: GaussianParams, grid: TimeGrid, psi0,
                     substeps: int = 1) -> Trajectory:
    """Piecewise-constant exponential propagation, frozen at sub-step midpoints.

    Each grid step is split into ``substeps`` equal pieces; node states are
    returned on ``grid``.  Used as an independent check on :func:`propagate`.
    """
    psi0 = _check_initial(psi0, system.dimension)
    fine = TimeGrid(grid.duration, grid.steps * substeps)
    h_mid = hamiltonian_series(system, params, fine.midpoints)
    props = scipy.linalg.expm(-1j * fine.step * h_mid)
    if substeps > 1:
        props = props.reshape((grid.steps, substeps) + props.shape[1:])
        step = props[:, 0]
        for i in range(1, substeps):
            step = props[:, i] @ step
        props = step
    with np.errstate(over="ignore", invalid="ignore"):
        states = _chain_apply(props, psi0)
    return Trajectory(grid, states)


@dataclass(frozen=True, eq=False)
class PopulationRecord:
    times: np.ndarray
    populations: np.ndarray  # (M+1, N), unnormalised weights
    leakage: np.ndarray
    max_leakage: float
    fidelity: float
    target: int
    leakage_levels: tuple = field(default=())

    def total(self) -> np.ndarray:
        return self.populations.sum(axis=1)


def populations(trajectory: Trajectory, part: SubspacePartition | None = None,
                target: int = 2) -> PopulationRecord:
    states = trajectory.states
    pops = np.abs(states) ** 2
    if part is None:
        part = partition(states.shape[1], target)
    leak_levels = tuple(part.leakage_levels)
    leak = pops[:, list(leak_levels)].sum(axis=1) if leak_levels else np.zeros(len(pops))
    return PopulationRecord(
        times=trajectory.times,
        populations=pops,
        leakage=leak,
        max_leakage=float(leak.max()),
        fidelity=float(pops[-1, target]),
        target=target,
        leakage_levels=leak_levels,
    )
