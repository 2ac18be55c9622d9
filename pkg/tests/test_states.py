import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherent_cipher.states import (
    EncodingKind,
    TwoModeState,
    canonical_angle,
    inner_product,
    make_state,
    overlap_angle,
    phase_state,
    polarization_state,
)

GRID = [j * math.pi / 64 for j in range(128)]


def fock_overlap(b, g, terms=80):
    """<b|g> for single-mode coherent states by explicit number-basis summation."""
    b, g = mpmath.mpc(b), mpmath.mpc(g)
    norm = mpmath.exp(-(abs(b) ** 2 + abs(g) ** 2) / 2)
    return complex(norm * mpmath.fsum(mpmath.conj(b) ** n * g**n / mpmath.factorial(n) for n in range(terms)))


def test_phase_state_examples():
    s = phase_state(0.0, 2.0)
    assert s.beta1 == pytest.approx(1.0) and s.beta2 == pytest.approx(1.0)
    s = phase_state(math.pi, 2.0)
    assert s.beta1 == pytest.approx(-1j, abs=1e-15)
    assert s.beta2 == pytest.approx(1j, abs=1e-15)
    assert phase_state(1.234, 0.0) == TwoModeState(0j, 0j)


def test_polarization_state_examples():
    s = polarization_state(0.0, 3.0)
    assert (s.beta1, s.beta2) == (0j, pytest.approx(math.sqrt(3.0)))
    s = polarization_state(math.pi, 4.0)
    assert s.beta1 == pytest.approx(2.0) and s.beta2 == pytest.approx(0.0, abs=1e-15)
    s = polarization_state(math.pi / 2, 1.0)
    assert s.beta1 == pytest.approx(math.sqrt(2) / 2) and s.beta2 == pytest.approx(math.sqrt(2) / 2)


@pytest.mark.parametrize("ctor", [phase_state, polarization_state])
@pytest.mark.parametrize("bad", [(-1.0, 1.0), (0.0, -0.5), (math.nan, 1.0), (math.inf, 1.0), (0.0, math.nan)])
def test_constructor_argument_errors(ctor, bad):
    theta, nbar = bad
    with pytest.raises(ValueError):
        ctor(theta, nbar) if theta != -1.0 else ctor(theta, nbar * -1)


@pytest.mark.parametrize("enc", list(EncodingKind))
@pytest.mark.parametrize("nbar", [0.0, 0.25, 1.0, 10.0, 1000.0])
def test_energy_invariant(enc, nbar):
    for theta in GRID:
        assert make_state(theta, nbar, enc).nbar == pytest.approx(nbar, abs=1e-12, rel=1e-15)


def test_inner_product_examples():
    s = phase_state(0.7, 1.3)
    assert inner_product(s, s) == 1
    vac = TwoModeState(0j, 0j)
    assert inner_product(vac, vac) == 1
    # e^{-1} from the number-basis oracle, mode by mode
    a, b = phase_state(0.0, 1.0), phase_state(math.pi, 1.0)
    expected = fock_overlap(a.beta1, b.beta1) * fock_overlap(a.beta2, b.beta2)
    assert expected == pytest.approx(math.exp(-1), abs=1e-15)
    assert inner_product(a, b) == pytest.approx(expected, abs=1e-15)


def test_inner_product_against_number_basis_sums(rng):
    for _ in range(20):
        z = rng.normal(size=8) * 1.2
        s = TwoModeState(complex(z[0], z[1]), complex(z[2], z[3]))
        t = TwoModeState(complex(z[4], z[5]), complex(z[6], z[7]))
        ref = fock_overlap(s.beta1, t.beta1) * fock_overlap(s.beta2, t.beta2)
        assert inner_product(s, t) == pytest.approx(ref, abs=1e-13)


amp = st.complex_numbers(max_magnitude=4.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(amp, amp, amp, amp)
def test_inner_product_magnitude_is_gaussian_in_distance(b1, b2, g1, g2):
    s, t = TwoModeState(b1, b2), TwoModeState(g1, g2)
    ip = inner_product(s, t)
    assert abs(ip) <= 1.0 + 1e-15
    expected = math.exp(-0.5 * (abs(b1 - g1) ** 2 + abs(b2 - g2) ** 2))
    assert abs(ip) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_overlap_angle_examples():
    assert overlap_angle(0.0, 5.0) == 1.0
    assert overlap_angle(math.pi, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert overlap_angle(2.1, 0.0) == 1.0


@pytest.mark.parametrize("enc", list(EncodingKind))
@pytest.mark.parametrize("nbar", [0.25, 1.0, 10.0])
def test_overlap_angle_matches_amplitude_inner_product(enc, nbar):
    for th in GRID[::5]:
        for tp in GRID[::7]:
            ip = inner_product(make_state(th, nbar, enc), make_state(tp, nbar, enc))
            assert abs(ip) == pytest.approx(overlap_angle(tp - th, nbar), abs=1e-14)


@pytest.mark.parametrize("nbar", [0.25, 1.0, 10.0])
def test_encoding_equivalence_of_inner_products(nbar):
    for th in GRID[::3]:
        for tp in GRID[::3]:
            ph = inner_product(phase_state(th, nbar), phase_state(tp, nbar))
            po = inner_product(polarization_state(th, nbar), polarization_state(tp, nbar))
            assert abs(ph - po) < 1e-13


@settings(max_examples=200, deadline=None)
@given(st.floats(-6.2, 6.2), st.floats(0.0, 100.0), st.floats(0.01, 50.0))
def test_overlap_angle_symmetric_and_decreasing_in_nbar(dtheta, nbar, extra):
    assert overlap_angle(dtheta, nbar) == overlap_angle(-dtheta, nbar)
    if abs(math.cos(dtheta / 2) - 1) > 1e-9:
        assert overlap_angle(dtheta, nbar + extra) < overlap_angle(dtheta, nbar)


def test_canonical_angle():
    assert canonical_angle(0.0) == 0.0
    assert canonical_angle(3 * math.pi) == pytest.approx(math.pi)
    assert canonical_angle(-math.pi / 2) == pytest.approx(1.5 * math.pi)
    assert 0.0 <= canonical_angle(2 * math.pi - 1e-17) < 2 * math.pi


def test_phase_state_is_4pi_periodic_and_2pi_flips_sign():
    s = phase_state(0.3, 2.0)
    t = phase_state(0.3 + 2 * math.pi, 2.0)
    assert cmath.isclose(t.beta1, -s.beta1) and cmath.isclose(t.beta2, -s.beta2)
    u = phase_state(0.3 + 4 * math.pi, 2.0)
    assert cmath.isclose(u.beta1, s.beta1) and cmath.isclose(u.beta2, s.beta2)


def test_encoding_parse():
    assert EncodingKind.parse("Phase") is EncodingKind.PHASE
    assert EncodingKind.parse(EncodingKind.POLARIZATION) is EncodingKind.POLARIZATION
    with pytest.raises(ValueError):
        EncodingKind.parse("frequency")
    assert np.isfinite(phase_state(1.0, 1.0).beta1)
