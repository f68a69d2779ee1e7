"""Reference five-level transmon configuration used by the demos and acceptance tests.

E_J/E_C = 50 with E_C chosen so that omega_10 / 2 pi = 5 GHz, a resonant
two-tone drive, T1-style decay with gamma_n = n / (30 us), and a
counterintuitive Gaussian pair on an 80 ns window.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.optimize

from .dynamics import TimeGrid, auto_grid
from .pmp import CostWeights
from .pulses import GaussianParams
from .robustness import TransmonSetup
from .transmon import TransmonSpec, level_spectrum

EJ_OVER_EC = 50.0
OMEGA_10 = 2 * np.pi * 5.0  # rad/ns
DURATION = 80.0  # ns
T1_GROUND = 30_000.0  # ns, lifetime of |1>

INITIAL_PARAMS = GaussianParams(amp_p=0.9, amp_s=0.9, t0_p=52.0, t0_s=28.0, sigma_p=10.0, sigma_s=10.0)
WEIGHTS = CostWeights(w_f=1.0, w_1=0.01, w_leak=0.05)


@lru_cache(maxsize=None)
def charging_energy(ratio: float = EJ_OVER_EC, omega_10: float = OMEGA_10) -> float:
    """E_C (rad/ns) giving the requested 0-1 frequency at fixed E_J/E_C."""
    def mismatch(ec):
        return level_spectrum(TransmonSpec(ec, ratio * ec)).transitions[0] - omega_10
    return float(scipy.optimize.brentq(mismatch, 1e-3 * omega_10, omega_10))


def reference_spec() -> TransmonSpec:
    ec = charging_energy()
    return TransmonSpec(ec, EJ_OVER_EC * ec, 5)


def decay_rates(n_levels: int = 5) -> tuple:
    return tuple(n / T1_GROUND for n in range(n_levels))


def reference_setup(grid: TimeGrid | None = None) -> TransmonSetup:
    spec = reference_spec()
    if grid is None:
        base = TransmonSetup(spec, TimeGrid(DURATION, 1000), decay_rates())
        grid = auto_grid(base.system(), INITIAL_PARAMS, DURATION)
    return TransmonSetup(spec, grid, decay_rates())
