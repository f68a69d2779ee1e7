import numpy as np
import pytest

from stirap_pmp.dynamics import TimeGrid
from stirap_pmp.pulses import GaussianParams
from stirap_pmp.reference import INITIAL_PARAMS, reference_spec
from stirap_pmp.robustness import (
    KNOBS,
    NOMINAL,
    Perturbation,
    TransmonSetup,
    apply_perturbation,
    fidelity,
    improvement_factor,
    protocol_duration,
    scan_1d,
    scan_2d,
)
from stirap_pmp.transmon import spectrum_coefficients

SETUP = TransmonSetup(reference_spec(), TimeGrid(80.0, 1500), decay_rates=(0, 1e-4, 2e-4, 3e-4, 4e-4))
OTHER = GaussianParams(1.0, 1.1, 50.0, 25.0, 12.0, 13.0)


def detunings(pert):
    return apply_perturbation(SETUP, None, pert)[0].detunings


def test_nominal_is_identity():
    base_sys, base_p, base_grid = apply_perturbation(SETUP, INITIAL_PARAMS, Perturbation())
    explicit = Perturbation(dict(NOMINAL))
    sys2, p2, grid2 = apply_perturbation(SETUP, INITIAL_PARAMS, explicit)
    np.testing.assert_array_equal(base_sys.detunings, sys2.detunings)
    assert p2 == INITIAL_PARAMS and grid2 == SETUP.grid
    np.testing.assert_allclose(base_sys.detunings[:3], 0, atol=1e-12)


def test_drive_shift():
    x = 0.05
    d0, d1 = detunings(Perturbation()), detunings(Perturbation.of("delta_omega_d", x))
    assert d1[1] - d0[1] == pytest.approx(-x, abs=1e-12)
    assert d1[2] - d0[2] == pytest.approx(-2 * x, abs=1e-12)


def test_single_transition_shift():
    x = 0.07
    diff = detunings(Perturbation.of("delta_omega_43", x)) - detunings(Perturbation())
    np.testing.assert_allclose(diff, [0, 0, 0, 0, x], atol=1e-12)
    diff = detunings(Perturbation.of("delta_omega_32", x)) - detunings(Perturbation())
    np.testing.assert_allclose(diff, [0, 0, 0, x, x], atol=1e-12)


def test_common_drift_and_raman_bias():
    x = 0.02
    diff = detunings(Perturbation.of("delta_omega", x)) - detunings(Perturbation())
    np.testing.assert_allclose(diff, x * np.arange(5), atol=1e-12)
    diff = detunings(Perturbation.of("delta", x)) - detunings(Perturbation())
    assert diff[1] == pytest.approx(0, abs=1e-12)
    assert diff[2] == pytest.approx(x, abs=1e-12)


def test_anharmonicity_scale_keeps_omega10():
    eta = 1.1
    _, b, c = spectrum_coefficients(SETUP.spec)
    diff = detunings(Perturbation.of("eta_alpha", eta)) - detunings(Perturbation())
    assert diff[1] == pytest.approx(0, abs=1e-12)
    # omega_21 - omega_10 = 2b + 6c scales with eta_alpha; the Stokes tone stays put
    assert diff[2] == pytest.approx((eta - 1) * (2 * b + 6 * c), rel=1e-9)


def test_time_and_amplitude_knobs_commute():
    both = apply_perturbation(SETUP, OTHER, Perturbation({"eta_omega": 0.9, "eta_t": 1.1}))
    _, p_omega, _ = apply_perturbation(SETUP, OTHER, Perturbation.of("eta_omega", 0.9))
    _, p_then, grid = apply_perturbation(SETUP, p_omega, Perturbation.of("eta_t", 1.1))
    _, p_t, _ = apply_perturbation(SETUP, OTHER, Perturbation.of("eta_t", 1.1))
    _, p_other, _ = apply_perturbation(SETUP, p_t, Perturbation.of("eta_omega", 0.9))
    assert both[1] == p_then == p_other
    assert grid.duration == pytest.approx(88.0) and both[2] == grid


def test_perturbation_validation():
    with pytest.raises(KeyError):
        Perturbation.of("bogus", 1.0)
    with pytest.raises(ValueError):
        Perturbation.of("eta_t", 0.0)
    assert set(Perturbation().full()) == set(KNOBS)


def test_improvement_factor():
    assert improvement_factor(0.9, 0.9) == 1.0
    assert improvement_factor(0.911, 0.998) == pytest.approx(44.5, abs=1e-9)
    assert improvement_factor(1.0, 1.0) == 0.0
    assert improvement_factor(0.5, 1.0) == pytest.approx(0.5e12)


def test_protocol_duration():
    assert protocol_duration(GaussianParams(1, 1, 40, 40, 1, 1), 80.0) == pytest.approx(2 * np.sqrt(2 * np.log(1e3)))
    assert protocol_duration(GaussianParams(0, 0, 40, 40, 1, 1), 80.0) == 0.0
    assert protocol_duration(INITIAL_PARAMS, 80.0) == 80.0


def test_scan_1d_nominal_matches_fidelity():
    res = scan_1d(SETUP, INITIAL_PARAMS, OTHER, "eta_omega", [1.0])
    assert res.f_init[0] == fidelity(SETUP, INITIAL_PARAMS)
    assert res.f_opt[0] == fidelity(SETUP, OTHER)
    assert res.improvement[0] == improvement_factor(res.f_init[0], res.f_opt[0])


def test_scan_2d_shape_order_and_metadata():
    res = scan_2d(SETUP, INITIAL_PARAMS, OTHER, ("eta_omega", "delta"), ([0.9, 1.0], [-0.01, 0.0, 0.01]))
    assert res.shape == (2, 3) and len(res.points) == 6
    assert res.points[1] == (0.9, 0.0)
    assert set(res.metadata["fixed_knobs"]) == set(KNOBS) - {"eta_omega", "delta"}
    rows = list(res.rows())
    assert len(rows) == 6 and rows[4]["delta"] == 0.0
    one = scan_2d(SETUP, INITIAL_PARAMS, OTHER, ("eta_omega", "delta"), ([1.0], [0.0]))
    assert one.improvement[0] == improvement_factor(fidelity(SETUP, INITIAL_PARAMS), fidelity(SETUP, OTHER))


def test_scan_determinism_and_workers():
    values = [0.95, 1.05]
    a = scan_1d(SETUP, INITIAL_PARAMS, OTHER, "eta_t", values)
    b = scan_1d(SETUP, INITIAL_PARAMS, OTHER, "eta_t", values)
    c = scan_1d(SETUP, INITIAL_PARAMS, OTHER, "eta_t", values, workers=2)
    for other in (b, c):
        np.testing.assert_array_equal(a.f_init, other.f_init)
        np.testing.assert_array_equal(a.f_opt, other.f_opt)
    assert a.metadata == b.metadata


def test_scan_errors():
    with pytest.raises(KeyError):
        scan_1d(SETUP, INITIAL_PARAMS, OTHER, "bogus", [1.0])
    with pytest.raises(ValueError):
        scan_1d(SETUP, INITIAL_PARAMS, OTHER, "delta", [])
    with pytest.raises(ValueError):
        scan_2d(SETUP, INITIAL_PARAMS, OTHER, ("delta", "delta"), ([0.0], [0.0]))
