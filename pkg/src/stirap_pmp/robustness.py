"""Perturbation knobs, improvement factor and 1D/2D robustness scans.

A :class:`TransmonSetup` fixes the nominal device and drive.  Knobs perturb
it the way an experiment would drift: the drive tones stay where they were
calibrated unless a knob moves them explicitly.

Knobs
-----
eta_omega       pulse amplitude scale
eta_t           pulse centre/width scale (the window T scales too)
eta_alpha       scales the quadratic and cubic spectrum coefficients with
                omega_10 held fixed
delta           Raman bias: omega_s -> omega_s - delta, so Delta_2 -> Delta_2 + delta
delta_omega_d   both drive tones shifted by the same amount
delta_omega     every adjacent transition frequency shifted by the same amount
delta_omega_32  shift of omega_32 alone
delta_omega_43  shift of omega_43 alone
"""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .chain import ChainSystem, basis
from .dynamics import DivergenceError, TimeGrid, populations, propagate
from .pulses import GaussianParams, apply_amplitude_scaling, apply_time_scaling
from .transmon import (
    TransmonSpec,
    build_frame,
    chain_from_transmon,
    level_spectrum,
    spectrum_coefficients,
    spectrum_from_transitions,
)

__all__ = [
    "KNOBS",
    "NOMINAL",
    "TransmonSetup",
    "Perturbation",
    "ScanResult",
    "apply_perturbation",
    "improvement_factor",
    "fidelity",
    "scan_1d",
    "scan_2d",
    "protocol_duration",
]

log = logging.getLogger(__name__)

NOMINAL = {
    "eta_omega": 1.0,
    "eta_alpha": 1.0,
    "eta_t": 1.0,
    "delta": 0.0,
    "delta_omega_d": 0.0,
    "delta_omega": 0.0,
    "delta_omega_32": 0.0,
    "delta_omega_43": 0.0,
}
KNOBS = tuple(NOMINAL)
IMPROVEMENT_FLOOR = 1e-12


@dataclass(frozen=True)
class TransmonSetup:
    """Nominal device, drive and time window.

    ``omega_p``/``omega_s`` default to the 0-1 and 1-2 transitions of the
    unperturbed spectrum (two-photon resonance, Delta_1 = Delta_2 = 0).
    """

    spec: TransmonSpec
    grid: TimeGrid
    decay_rates: tuple | None = None
    omega_p: float | None = None
    omega_s: float | None = None
    phi_p: float = 0.0
    phi_s: float = 0.0
    target: int = 2

    def __post_init__(self):
        w = level_spectrum(self.spec).transitions
        if self.omega_p is None:
            object.__setattr__(self, "omega_p", float(w[0]))
        if self.omega_s is None:
            object.__setattr__(self, "omega_s", float(w[1]))
        if self.decay_rates is not None:
            object.__setattr__(self, "decay_rates", tuple(float(g) for g in self.decay_rates))

    def system(self) -> ChainSystem:
        return apply_perturbation(self, None, Perturbation())[0]

    def describe(self) -> dict:
        d = asdict(self)
        d["grid"] = {"duration": self.grid.duration, "steps": self.grid.steps}
        return d

    def fingerprint(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True, default=float)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Perturbation:
    values: Mapping = field(default_factory=dict)

    def __post_init__(self):
        vals = dict(self.values)
        for k, v in vals.items():
            if k not in NOMINAL:
                raise KeyError(f"unknown perturbation knob {k!r}")
            if not np.isfinite(v):
                raise ValueError(f"knob {k} must be finite")
        if vals.get("eta_omega", 1.0) < 0:
            raise ValueError("eta_omega must be non-negative")
        if vals.get("eta_t", 1.0) <= 0:
            raise ValueError("eta_t must be positive")
        object.__setattr__(self, "values", {k: float(v) for k, v in vals.items()})

    @classmethod
    def of(cls, knob: str, value: float, knob2: str | None = None, value2: float | None = None):
        vals = {knob: value}
        if knob2 is not None:
            vals[knob2] = value2
        return cls(vals)

    def get(self, knob: str) -> float:
        return self.values.get(knob, NOMINAL[knob])

    def full(self) -> dict:
        return {k: self.get(k) for k in KNOBS}


def _perturbed_transitions(spec: TransmonSpec, pert: Perturbation) -> np.ndarray:
    a, b, c = spectrum_coefficients(spec)
    eta_alpha = pert.get("eta_alpha")
    n = np.arange(spec.level_count, dtype=float)
    omega10 = a + b + c
    a_new = omega10 - eta_alpha * (b + c)
    energies = a_new * n + eta_alpha * (b * n**2 + c * n**3)
    w = np.diff(energies) + pert.get("delta_omega")
    if len(w) > 2:
        w[2] += pert.get("delta_omega_32")
    if len(w) > 3:
        w[3] += pert.get("delta_omega_43")
    return w


def apply_perturbation(setup: TransmonSetup, params: GaussianParams | None,
                       pert: Perturbation) -> tuple[ChainSystem, GaussianParams | None, TimeGrid]:
    """Perturbed (system, params, grid) for one knob setting."""
    spectral = ("eta_alpha", "delta_omega", "delta_omega_32", "delta_omega_43")
    if all(pert.get(k) == NOMINAL[k] for k in spectral):
        spectrum = level_spectrum(setup.spec)  # bit-identical to the unperturbed build
    else:
        spectrum = spectrum_from_transitions(_perturbed_transitions(setup.spec, pert))
    shift = pert.get("delta_omega_d")
    omega_p = setup.omega_p + shift
    omega_s = setup.omega_s + shift - pert.get("delta")
    frame = build_frame(spectrum, omega_p, omega_s, setup.phi_p, setup.phi_s)
    rates = None if setup.decay_rates is None else np.asarray(setup.decay_rates)
    system = chain_from_transmon(spectrum, frame, rates)
    grid = setup.grid
    eta_t = pert.get("eta_t")
    if eta_t != 1.0:
        grid = grid.scaled(eta_t)
    if params is not None:
        eta_omega = pert.get("eta_omega")
        if eta_omega != 1.0:
            params = apply_amplitude_scaling(params, eta_omega)
        if eta_t != 1.0:
            params = apply_time_scaling(params, eta_t)
    return system, params, grid


def improvement_factor(f_init: float, f_opt: float, floor: float = IMPROVEMENT_FLOOR) -> float:
    """(1 - F_init) / (1 - F_opt), with the denominator floored at ``floor``."""
    return (1.0 - f_init) / max(1.0 - f_opt, floor)


def fidelity(setup: TransmonSetup, params: GaussianParams, pert: Perturbation | None = None) -> float:
    system, p, grid = apply_perturbation(setup, params, pert or Perturbation())
    traj = propagate(system, p, grid, basis(system.dimension, 0))
    return populations(traj, target=setup.target).fidelity


def protocol_duration(params: GaussianParams, duration: float, threshold: float = 1e-3) -> float:
    """Length of the span where max(Omega_p, Omega_s) >= threshold * max(A_p, A_s), inside [0, T]."""
    peak = max(params.amp_p, params.amp_s)
    if peak == 0:
        return 0.0
    starts, ends = [], []
    for amp, t0, sigma in (params.channel("p"), params.channel("s")):
        if amp <= threshold * peak:
            continue
        half = sigma * np.sqrt(2 * np.log(amp / (threshold * peak)))
        starts.append(max(0.0, t0 - half))
        ends.append(min(duration, t0 + half))
    return float(max(0.0, max(ends) - min(starts)))


@dataclass(frozen=True, eq=False)
class ScanResult:
    knobs: tuple
    axes: tuple  # one array per knob
    points: tuple  # knob-value tuples, row-major
    f_init: np.ndarray
    f_opt: np.ndarray
    improvement: np.ndarray
    capped: np.ndarray
    errors: tuple = ()
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    def rows(self):
        for i, pt in enumerate(self.points):
            row = dict(zip(self.knobs, pt))
            row.update(F_init=self.f_init[i], F_opt=self.f_opt[i], I=self.improvement[i],
                       capped=int(self.capped[i]), error=self.errors[i] if self.errors else "")
            yield row

    def grid(self, name: str = "improvement") -> np.ndarray:
        return np.asarray(getattr(self, name)).reshape(self.shape)


def _evaluate_point(args):
    setup, p_init, p_opt, knob_values = args
    pert = Perturbation(dict(knob_values))
    try:
        return fidelity(setup, p_init, pert), fidelity(setup, p_opt, pert), ""
    except (DivergenceError, FloatingPointError, ValueError) as exc:
        log.warning("scan point %s failed: %s", knob_values, exc)
        return float("nan"), float("nan"), str(exc)


def _run_scan(setup, p_init, p_opt, knobs, axes, workers):
    points = tuple(product(*axes))
    jobs = [(setup, p_init, p_opt, tuple(zip(knobs, pt))) for pt in points]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_point, jobs))
    else:
        results = [_evaluate_point(j) for j in jobs]
    f_init = np.array([r[0] for r in results])
    f_opt = np.array([r[1] for r in results])
    with np.errstate(invalid="ignore"):
        capped = (1.0 - f_opt) < IMPROVEMENT_FLOOR
        improvement = np.array([improvement_factor(a, b) for a, b in zip(f_init, f_opt)])
    fixed = {k: v for k, v in NOMINAL.items() if k not in knobs}
    meta = {
        "setup": setup.describe(),
        "setup_hash": setup.fingerprint(),
        "fixed_knobs": fixed,
        "scanned_knobs": list(knobs),
        "protocols": {"initial": p_init.as_dict(), "optimized": p_opt.as_dict()},
        "raman_bias_convention": "omega_s -> omega_s - delta",
        "eta_alpha_convention": "quadratic and cubic spectrum coefficients scaled, omega_10 fixed",
        "delta_omega_convention": "every adjacent transition shifted by delta_omega",
        "improvement_floor": IMPROVEMENT_FLOOR,
    }
    return ScanResult(tuple(knobs), tuple(np.asarray(a, float) for a in axes), points,
                      f_init, f_opt, improvement, capped,
                      tuple(r[2] for r in results), meta)


def scan_1d(setup: TransmonSetup, initial: GaussianParams, optimized: GaussianParams,
            knob: str, values: Sequence[float], workers: int | None = None) -> ScanResult:
    if len(values) == 0:
        raise ValueError("scan needs at least one value")
    if knob not in NOMINAL:
        raise KeyError(f"unknown perturbation knob {knob!r}")
    return _run_scan(setup, initial, optimized, (knob,), (list(values),), workers)


def scan_2d(setup: TransmonSetup, initial: GaussianParams, optimized: GaussianParams,
            knobs: tuple[str, str], values: tuple[Sequence[float], Sequence[float]],
            workers: int | None = None) -> ScanResult:
    """Cartesian-product scan; the second knob varies fastest."""
    if len(knobs) != 2 or len(values) != 2:
        raise ValueError("scan_2d needs exactly two knobs and two value lists")
    if knobs[0] == knobs[1]:
        raise ValueError("scan_2d needs two distinct knobs")
    for k in knobs:
        if k not in NOMINAL:
            raise KeyError(f"unknown perturbation knob {k!r}")
    if min(len(v) for v in values) == 0:
        raise ValueError("scan grids must be non-empty")
    return _run_scan(setup, initial, optimized, tuple(knobs), tuple(list(v) for v in values), workers)
