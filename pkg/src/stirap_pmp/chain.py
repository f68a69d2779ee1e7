"""Nearest-neighbour N-level chain in the rotating frame (hbar = 1).

The Hamiltonian is tridiagonal: detunings on the diagonal and
``(1/2) * scale * envelope * exp(i phase)`` on the (j, j+1) entry of each
link.  Envelopes are keyed by channel name so one drive tone can address
several links (the transmon pump drives 0-1 and 2-3).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple

import numpy as np

__all__ = [
    "ChainError",
    "DarkStateError",
    "Link",
    "Dissipation",
    "ChainSystem",
    "DarkState",
    "SubspacePartition",
    "assemble_hamiltonian",
    "non_hermitian_hamiltonian",
    "decay_operator",
    "channel_operator",
    "control_operators",
    "dark_state",
    "mixing_angle",
    "partition",
    "basis",
]


class ChainError(ValueError):
    pass


class DarkStateError(ChainError):
    pass


class Link(NamedTuple):
    lower: int
    channel: str
    scale: float
    phase: float = 0.0


class Dissipation(NamedTuple):
    rate: float
    source: int
    target: int


@dataclass(frozen=True, eq=False)
class ChainSystem:
    detunings: np.ndarray
    links: tuple = ()
    dissipation: tuple = ()

    def __post_init__(self):
        d = np.asarray(self.detunings, dtype=float)
        object.__setattr__(self, "detunings", d)
        links = tuple(Link(*lk) for lk in self.links)
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "dissipation", tuple(Dissipation(*c) for c in self.dissipation))
        n = len(d)
        seen = set()
        for lk in links:
            if not 0 <= lk.lower < n - 1:
                raise ChainError(f"link {lk} does not join adjacent levels of an N={n} chain")
            if lk.lower in seen:
                raise ChainError(f"link ({lk.lower}, {lk.lower + 1}) appears twice")
            if not lk.scale > 0:
                raise ChainError("link scale factors must be positive")
            seen.add(lk.lower)
        for c in self.dissipation:
            if c.rate < 0:
                raise ChainError("dissipation rates must be non-negative")
            if not (0 <= c.source < n and 0 <= c.target < n):
                raise ChainError(f"dissipation channel {c} out of range")

    @property
    def dimension(self) -> int:
        return len(self.detunings)

    @property
    def channels(self) -> tuple[str, ...]:
        out = []
        for lk in self.links:
            if lk.channel not in out:
                out.append(lk.channel)
        return tuple(out)

    @property
    def is_hermitian(self) -> bool:
        return not any(c.rate > 0 for c in self.dissipation)

    def with_detunings(self, detunings) -> "ChainSystem":
        return replace(self, detunings=np.asarray(detunings, dtype=float))

    def without_links(self, lowers) -> "ChainSystem":
        drop = set(lowers)
        return replace(self, links=tuple(lk for lk in self.links if lk.lower not in drop))

    def truncated(self, n_levels: int) -> "ChainSystem":
        """Sub-chain on levels 0..n_levels-1."""
        return ChainSystem(
            self.detunings[:n_levels],
            tuple(lk for lk in self.links if lk.lower + 1 < n_levels),
            tuple(c for c in self.dissipation if c.source < n_levels and c.target < n_levels),
        )

    def coupling(self, link: Link, envelopes: Mapping):
        """Complex coupling Omega_{j,j+1} = scale * env * exp(i phase)."""
        try:
            env = envelopes[link.channel]
        except KeyError:
            raise ChainError(f"no envelope supplied for channel {link.channel!r}") from None
        return link.scale * np.asarray(env) * np.exp(1j * link.phase)


def basis(n: int, k: int) -> np.ndarray:
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def _envelope_shape(system, envelopes):
    shapes = [np.shape(envelopes[ch]) for ch in system.channels if ch in envelopes]
    return np.broadcast_shapes(*shapes) if shapes else ()


def assemble_hamiltonian(system: ChainSystem, envelopes: Mapping) -> np.ndarray:
    """Hermitian chain Hamiltonian.

    Envelope values may be scalars or equal-shape arrays; for arrays of shape
    ``S`` the result has shape ``S + (N, N)``.
    """
    n = system.dimension
    shape = _envelope_shape(system, envelopes)
    h = np.zeros(shape + (n, n), dtype=complex)
    h[..., np.arange(n), np.arange(n)] = system.detunings
    for lk in system.links:
        c = 0.5 * system.coupling(lk, envelopes)
        j = lk.lower
        h[..., j, j + 1] = c
        h[..., j + 1, j] = np.conj(c)
    return h


def decay_operator(system: ChainSystem) -> np.ndarray:
    """sum_mu C_mu^dag C_mu for C_mu = sqrt(rate) |target><source|."""
    n = system.dimension
    g = np.zeros((n, n))
    for c in system.dissipation:
        g[c.source, c.source] += c.rate
    return g


def non_hermitian_hamiltonian(system: ChainSystem, envelopes: Mapping) -> np.ndarray:
    return assemble_hamiltonian(system, envelopes) - 0.5j * decay_operator(system)


def channel_operator(system: ChainSystem, channel: str) -> np.ndarray:
    """dH/dOmega_channel for a real envelope on ``channel``."""
    if channel not in system.channels:
        raise ChainError(f"no link is driven by channel {channel!r}")
    n = system.dimension
    op = np.zeros((n, n), dtype=complex)
    for lk in system.links:
        if lk.channel != channel:
            continue
        j = lk.lower
        op[j, j + 1] += 0.5 * lk.scale * np.exp(1j * lk.phase)
        op[j + 1, j] += 0.5 * lk.scale * np.exp(-1j * lk.phase)
    return op


def control_operators(system: ChainSystem) -> list[tuple[np.ndarray, np.ndarray]]:
    """(X_j, Y_j) for every link, in link order.

    H = H_d + sum_j (Re(Omega_j) X_j + Im(Omega_j) Y_j).
    """
    n = system.dimension
    ops = []
    for lk in system.links:
        j = lk.lower
        x = np.zeros((n, n), dtype=complex)
        y = np.zeros((n, n), dtype=complex)
        x[j, j + 1] = x[j + 1, j] = 0.5
        y[j, j + 1] = 0.5j
        y[j + 1, j] = -0.5j
        ops.append((x, y))
    return ops


@dataclass(frozen=True, eq=False)
class DarkState:
    amplitudes: np.ndarray  # A_k on levels 2k, unnormalised
    norm: float
    vector: np.ndarray = field(repr=False)


def dark_state(system: ChainSystem, envelopes: Mapping, atol: float = 1e-9) -> DarkState:
    """End-to-end dark state of an odd chain, supported on even levels."""
    n = system.dimension
    if n % 2 == 0:
        raise DarkStateError(f"an even chain (N={n}) has no end-to-end dark state")
    even = system.detunings[::2]
    if np.ptp(even) > atol:
        raise DarkStateError("even-sublattice detunings are not aligned")
    by_lower = {lk.lower: lk for lk in system.links}
    omega = np.zeros(n - 1, dtype=complex)
    for j, lk in by_lower.items():
        omega[j] = complex(system.coupling(lk, envelopes))
    half = n // 2
    amps = np.empty(half + 1, dtype=complex)
    for k in range(half + 1):
        left = np.prod(np.conj(omega[0:2 * k:2]))
        right = np.prod(omega[2 * k + 1:n - 1:2])
        amps[k] = (-1) ** k * left * right
    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        raise DarkStateError("all dark-state amplitudes vanish for these envelopes")
    vec = np.zeros(n, dtype=complex)
    vec[::2] = amps / norm
    return DarkState(amps, norm, vec)


def mixing_angle(omega_01: complex, omega_12: complex) -> tuple[float, float]:
    """(theta, phi) with tan(theta) = |Omega_01|/|Omega_12|, theta in [0, pi/2]."""
    a, b = abs(omega_01), abs(omega_12)
    if a == 0 and b == 0:
        raise ChainError("mixing angle undefined when both couplings vanish")
    theta = float(np.arctan2(a, b))
    phi = float(np.angle(omega_01) - np.angle(omega_12))
    return theta, phi


@dataclass(frozen=True, eq=False)
class SubspacePartition:
    target_levels: tuple[int, ...]
    leakage_levels: tuple[int, ...]
    target_projector: np.ndarray = field(repr=False)
    leakage_projector: np.ndarray = field(repr=False)


def partition(system_or_dim, m: int) -> SubspacePartition:
    """Target manifold {0..m} and leakage manifold {m+1..N-1}."""
    n = system_or_dim if isinstance(system_or_dim, int) else system_or_dim.dimension
    if not 0 < m < n:
        raise ChainError(f"partition index m={m} must satisfy 0 < m < {n}")
    tar = np.zeros((n, n))
    tar[np.arange(m + 1), np.arange(m + 1)] = 1.0
    return SubspacePartition(tuple(range(m + 1)), tuple(range(m + 1, n)), tar, np.eye(n) - tar)
