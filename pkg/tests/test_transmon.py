import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stirap_pmp.chain import assemble_hamiltonian
from stirap_pmp.transmon import (
    InvalidSpecError,
    TransmonSpec,
    build_frame,
    chain_from_transmon,
    level_spectrum,
    resonant_frame,
    spectrum_coefficients,
    spectrum_from_transitions,
    zpf_amplitudes,
)

specs = st.builds(
    lambda ec, ratio, n: TransmonSpec(ec, ec * ratio, n),
    st.floats(0.1, 3.0), st.floats(20.5, 200.0), st.integers(3, 8),
)


def test_ground_energy_is_zero():
    assert level_spectrum(TransmonSpec(1.0, 50.0)).energies[0] == 0.0


@given(specs)
def test_anharmonicity_identity(spec):
    w = level_spectrum(spec).transitions
    expected = -spec.charging_energy + spec.charging_energy * spec.xi / 2
    assert abs((w[1] - w[0]) - expected) <= 1e-12 * max(abs(expected), 1.0) * 10


@given(specs)
def test_cubic_coefficients_recovered(spec):
    e = level_spectrum(TransmonSpec(spec.charging_energy, spec.josephson_energy, 6)).energies
    a, b, c = spectrum_coefficients(spec)
    # third difference of a cubic is 6c; second at n=0 is 2b + 6c
    d3 = e[3] - 3 * e[2] + 3 * e[1] - e[0]
    assert d3 == pytest.approx(6 * c, rel=1e-9)
    n = np.arange(6)
    np.testing.assert_allclose(e, a * n + b * n**2 + c * n**3, rtol=1e-12, atol=1e-12)


def test_small_xi_limit_is_quartic_spectrum():
    ec = 1.0
    spec = TransmonSpec(ec, 1e12 * ec)
    a, b, c = spectrum_coefficients(spec)
    assert a == pytest.approx(spec.omega0 - ec / 2, rel=1e-12)
    assert b == pytest.approx(-ec / 2, rel=1e-5)
    assert abs(c) < 1e-5


@given(specs)
def test_zpf_product_is_half(spec):
    phi, n = zpf_amplitudes(spec)
    assert phi * n == pytest.approx(0.5, rel=1e-12)


def test_zpf_unit_cases():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert zpf_amplitudes(TransmonSpec(1.0, 2.0))[0] == pytest.approx(1.0, abs=1e-15)
    assert zpf_amplitudes(TransmonSpec(1.0, 32.0))[1] == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("ec,ej,n", [(0.0, 1.0, 5), (1.0, -1.0, 5), (1.0, 50.0, 2), (1.0, 0.5, 5)])
def test_invalid_specs(ec, ej, n):
    with pytest.raises(InvalidSpecError):
        TransmonSpec(ec, ej, n)


def test_low_ratio_warns():
    with pytest.warns(RuntimeWarning):
        TransmonSpec(1.0, 10.0)


def test_resonant_frame_zero_detunings():
    spectrum = level_spectrum(TransmonSpec(1.0, 50.0))
    frame = resonant_frame(spectrum)
    assert frame.detunings[1] == pytest.approx(0, abs=1e-12)
    assert frame.detunings[2] == pytest.approx(0, abs=1e-12)


@given(st.floats(20, 40), st.floats(20, 40))
@settings(max_examples=30)
def test_two_photon_detuning(wp, ws):
    spectrum = level_spectrum(TransmonSpec(1.0, 50.0))
    frame = build_frame(spectrum, wp, ws)
    assert frame.two_photon_detuning == pytest.approx(spectrum.cumulative[2] - wp - ws, abs=1e-12)


def test_spectrum_from_transitions_roundtrip():
    spectrum = level_spectrum(TransmonSpec(0.8, 40.0))
    again = spectrum_from_transitions(spectrum.transitions)
    np.testing.assert_allclose(again.energies, spectrum.energies, atol=1e-12)


def test_chain_couplings_follow_sqrt_j():
    spectrum = level_spectrum(TransmonSpec(1.0, 50.0))
    system = chain_from_transmon(spectrum, resonant_frame(spectrum))
    assert system.is_hermitian
    assert [lk.channel for lk in system.links] == ["p", "s", "p", "s"]
    h = assemble_hamiltonian(system, {"p": 2.0, "s": 4.0})
    np.testing.assert_allclose([h[0, 1], h[1, 2], h[2, 3], h[3, 4]],
                               [1.0, 2 * np.sqrt(2), np.sqrt(3), 4.0])


def test_chain_decay_and_channel_errors():
    spectrum = level_spectrum(TransmonSpec(1.0, 50.0))
    frame = resonant_frame(spectrum)
    system = chain_from_transmon(spectrum, frame, [0, 0.1, 0.2, 0, 0])
    assert len(system.dissipation) == 2
    assert not system.is_hermitian
    six = level_spectrum(TransmonSpec(1.0, 50.0, 6))
    with pytest.raises(InvalidSpecError):
        chain_from_transmon(six, resonant_frame(six))
    chain6 = chain_from_transmon(six, resonant_frame(six), channels=("p", "s", "p", "s", "p"))
    assert chain6.dimension == 6
