"""Transmon level structure in the sixth-order (number-polynomial) approximation.

Energies and frequencies are angular (rad/ns) with hbar = 1.  The level
energies are stored relative to the ground state.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainSystem, Dissipation, Link

__all__ = [
    "InvalidSpecError",
    "TransmonSpec",
    "LevelSpectrum",
    "FrameSpec",
    "spectrum_coefficients",
    "level_spectrum",
    "spectrum_from_transitions",
    "zpf_amplitudes",
    "build_frame",
    "resonant_frame",
    "chain_from_transmon",
    "TRANSMON_CHANNELS",
]

#: drive channel per link (0-1, 1-2, 2-3, 3-4)
TRANSMON_CHANNELS = ("p", "s", "p", "s")


class InvalidSpecError(ValueError):
    pass


@dataclass(frozen=True)
class TransmonSpec:
    charging_energy: float
    josephson_energy: float
    level_count: int = 5

    def __post_init__(self):
        if not (self.charging_energy > 0 and self.josephson_energy > 0):
            raise InvalidSpecError("E_C and E_J must be positive")
        if self.level_count < 3:
            raise InvalidSpecError("need at least three levels")
        ratio = self.josephson_energy / self.charging_energy
        if ratio <= 1:
            raise InvalidSpecError(f"E_J/E_C = {ratio:g} is outside the transmon regime")
        if ratio < 20:
            warnings.warn(f"E_J/E_C = {ratio:g} < 20; expansion may be inaccurate",
                          RuntimeWarning, stacklevel=3)

    @property
    def xi(self) -> float:
        return float(np.sqrt(2 * self.charging_energy / self.josephson_energy))

    @property
    def omega0(self) -> float:
        return float(np.sqrt(8 * self.josephson_energy * self.charging_energy))


@dataclass(frozen=True)
class LevelSpectrum:
    """Level energies E_n (E_0 = 0) and derived transition frequencies."""

    energies: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        object.__setattr__(self, "energies", e - e[0])

    @property
    def level_count(self) -> int:
        return len(self.energies)

    @property
    def transitions(self) -> np.ndarray:
        """Adjacent transition frequencies omega_{n+1,n}."""
        return np.diff(self.energies)

    @property
    def cumulative(self) -> np.ndarray:
        """omega_{n0} = E_n - E_0."""
        return self.energies.copy()

    @property
    def anharmonicity(self) -> float:
        w = self.transitions
        return float(w[1] - w[0])


def spectrum_coefficients(spec: TransmonSpec) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of E_n = a n + b n^2 + c n^3."""
    ec, xi = spec.charging_energy, spec.xi
    a = spec.omega0 - ec / 2 + ec * xi / 9
    b = ec * xi / 12 - ec / 2
    c = ec * xi / 18
    return a, b, c


def level_spectrum(spec: TransmonSpec) -> LevelSpectrum:
    a, b, c = spectrum_coefficients(spec)
    n = np.arange(spec.level_count, dtype=float)
    return LevelSpectrum(a * n + b * n**2 + c * n**3)


def spectrum_from_transitions(transitions) -> LevelSpectrum:
    w = np.asarray(transitions, dtype=float)
    return LevelSpectrum(np.concatenate([[0.0], np.cumsum(w)]))


def zpf_amplitudes(spec: TransmonSpec) -> tuple[float, float]:
    """Zero-point fluctuation amplitudes (phi_zpf, n_zpf)."""
    r = spec.josephson_energy / spec.charging_energy
    return float((2 / r) ** 0.25), float((r / 32) ** 0.25)


@dataclass(frozen=True)
class FrameSpec:
    omega_p: float
    omega_s: float
    phi_p: float
    phi_s: float
    reference: np.ndarray = field(repr=False)
    detunings: np.ndarray = field(repr=False)

    @property
    def two_photon_detuning(self) -> float:
        return float(self.detunings[2])


def _reference_frequencies(n_levels, omega_p, omega_s):
    # nu_n climbs the ladder alternating pump / Stokes photons
    nu = np.zeros(n_levels)
    for n in range(1, n_levels):
        nu[n] = nu[n - 1] + (omega_p if n % 2 == 1 else omega_s)
    return nu


def build_frame(spectrum: LevelSpectrum, omega_p: float, omega_s: float,
                phi_p: float = 0.0, phi_s: float = 0.0) -> FrameSpec:
    if spectrum.level_count < 3:
        raise InvalidSpecError("frame needs at least three levels")
    if not np.all(np.isfinite([omega_p, omega_s, phi_p, phi_s])):
        raise InvalidSpecError("drive frequencies and phases must be finite")
    nu = _reference_frequencies(spectrum.level_count, omega_p, omega_s)
    return FrameSpec(float(omega_p), float(omega_s), float(phi_p), float(phi_s),
                     reference=nu, detunings=spectrum.cumulative - nu)


def resonant_frame(spectrum: LevelSpectrum, phi_p: float = 0.0, phi_s: float = 0.0) -> FrameSpec:
    """Frame with the pump on 0-1 and the Stokes on 1-2 (Delta_1 = Delta_2 = 0)."""
    w = spectrum.transitions
    return build_frame(spectrum, w[0], w[1], phi_p, phi_s)


def chain_from_transmon(spectrum: LevelSpectrum, frame: FrameSpec, decay_rates=None,
                        channels=None) -> ChainSystem:
    """Nearest-neighbour chain with sqrt(j) charge-matrix scaling on link (j-1, j).

    ``decay_rates[n]`` is the rate of |n> -> |n-1>; entry 0 is ignored.
    """
    n_levels = spectrum.level_count
    if channels is None:
        if n_levels != 5:
            raise InvalidSpecError("explicit channel map required unless N == 5")
        channels = TRANSMON_CHANNELS
    if len(channels) != n_levels - 1:
        raise InvalidSpecError("channel map must name one channel per link")
    phase = {"p": frame.phi_p, "s": frame.phi_s}
    links = tuple(
        Link(j - 1, ch, float(np.sqrt(j)), phase.get(ch, 0.0))
        for j, ch in enumerate(channels, start=1)
    )
    dissipation = ()
    if decay_rates is not None:
        rates = np.asarray(decay_rates, dtype=float)
        if rates.shape != (n_levels,):
            raise InvalidSpecError(f"decay_rates must have length {n_levels}")
        dissipation = tuple(
            Dissipation(float(g), n, n - 1) for n, g in enumerate(rates) if n > 0 and g > 0
        )
    return ChainSystem(np.array(frame.detunings, dtype=float), links, dissipation)
