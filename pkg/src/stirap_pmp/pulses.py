"""Gaussian pump/Stokes envelopes and their parameter derivatives."""
from __future__ import annotations

from dataclasses import astuple, dataclass, fields, replace

import numpy as np

__all__ = [
    "PARAM_NAMES",
    "GaussianParams",
    "EnvelopeSamples",
    "envelope",
    "envelope_param_derivatives",
    "apply_time_scaling",
    "apply_amplitude_scaling",
    "sample_envelopes",
    "project_to_bounds",
    "SIGMA_MIN",
]

PARAM_NAMES = ("amp_p", "amp_s", "t0_p", "t0_s", "sigma_p", "sigma_s")
SIGMA_MIN = 0.5  # ns


@dataclass(frozen=True)
class GaussianParams:
    """u = (A_p, A_s, t0_p, t0_s, sigma_p, sigma_s); rad/ns and ns."""

    amp_p: float
    amp_s: float
    t0_p: float
    t0_s: float
    sigma_p: float
    sigma_s: float

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, float(getattr(self, f.name)))
        if not (self.sigma_p > 0 and self.sigma_s > 0):
            raise ValueError("pulse widths must be positive")
        if self.amp_p < 0 or self.amp_s < 0:
            raise ValueError("pulse amplitudes must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self))

    @classmethod
    def from_array(cls, x) -> "GaussianParams":
        return cls(*np.asarray(x, dtype=float).tolist())

    def as_dict(self) -> dict:
        return dict(zip(PARAM_NAMES, astuple(self)))

    def channel(self, ch: str) -> tuple[float, float, float]:
        """(A, t0, sigma) of channel ``'p'`` or ``'s'``."""
        if ch == "p":
            return self.amp_p, self.t0_p, self.sigma_p
        if ch == "s":
            return self.amp_s, self.t0_s, self.sigma_s
        raise KeyError(f"unknown channel {ch!r}")

    @property
    def counterintuitive(self) -> bool:
        """Stokes before pump."""
        return self.t0_s < self.t0_p


def envelope(params: GaussianParams, channel: str, t):
    amp, t0, sigma = params.channel(channel)
    t = np.asarray(t, dtype=float)
    return amp * np.exp(-((t - t0) ** 2) / (2 * sigma**2))


def envelope_param_derivatives(params: GaussianParams, channel: str, t):
    """(dOmega/dA, dOmega/dt0, dOmega/dsigma) of one channel at ``t``."""
    amp, t0, sigma = params.channel(channel)
    t = np.asarray(t, dtype=float)
    shape = np.exp(-((t - t0) ** 2) / (2 * sigma**2))
    omega = amp * shape
    return shape, omega * (t - t0) / sigma**2, omega * (t - t0) ** 2 / sigma**3


def apply_time_scaling(params: GaussianParams, eta_t: float) -> GaussianParams:
    if not eta_t > 0:
        raise ValueError("time scale must be positive")
    return replace(params, t0_p=eta_t * params.t0_p, t0_s=eta_t * params.t0_s,
                   sigma_p=eta_t * params.sigma_p, sigma_s=eta_t * params.sigma_s)


def apply_amplitude_scaling(params: GaussianParams, eta_omega: float) -> GaussianParams:
    if eta_omega < 0:
        raise ValueError("amplitude scale must be non-negative")
    return replace(params, amp_p=eta_omega * params.amp_p, amp_s=eta_omega * params.amp_s)


@dataclass(frozen=True, eq=False)
class EnvelopeSamples:
    times: np.ndarray
    values: dict

    def __getitem__(self, ch):
        return self.values[ch]


def sample_envelopes(params: GaussianParams, grid) -> EnvelopeSamples:
    t = np.asarray(getattr(grid, "times", grid), dtype=float)
    return EnvelopeSamples(t, {ch: envelope(params, ch, t) for ch in ("p", "s")})


def project_to_bounds(params: GaussianParams, duration: float,
                      sigma_min: float = SIGMA_MIN) -> GaussianParams:
    """Clip to A >= 0, 0 <= t0 <= T, sigma >= sigma_min."""
    x = params.as_array() if isinstance(params, GaussianParams) else np.asarray(params, float)
    x = x.copy()
    x[0:2] = np.maximum(x[0:2], 0.0)
    x[2:4] = np.clip(x[2:4], 0.0, duration)
    x[4:6] = np.maximum(x[4:6], sigma_min)
    return GaussianParams.from_array(x)
