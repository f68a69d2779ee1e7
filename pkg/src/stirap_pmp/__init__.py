"""Optimal control of STIRAP-style transfer in multilevel ladders.

Tridiagonal chain Hamiltonians, transmon spectra, Gaussian pulse pairs,
adjoint (costate) gradients and a BFGS trust-region optimiser.
"""
from .chain import (
    ChainError,
    ChainSystem,
    DarkStateError,
    Dissipation,
    Link,
    assemble_hamiltonian,
    channel_operator,
    dark_state,
    mixing_angle,
    non_hermitian_hamiltonian,
    partition,
)
from .dynamics import DivergenceError, TimeGrid, auto_grid, populations, propagate, propagate_oracle
from .optimizer import TrustRegionConfig, dogleg_step, minimize, optimize_pulses
from .pmp import (
    CostWeights,
    StepSizeError,
    backward_costate,
    evaluate,
    functional_gradient,
    gradient_descent,
    objective,
    parameter_gradient,
)
from .pulses import GaussianParams, envelope, project_to_bounds, sample_envelopes
from .robustness import Perturbation, TransmonSetup, improvement_factor, scan_1d, scan_2d
from .transmon import (
    InvalidSpecError,
    TransmonSpec,
    build_frame,
    chain_from_transmon,
    level_spectrum,
    resonant_frame,
    spectrum_coefficients,
)

__version__ = "0.1.0"
