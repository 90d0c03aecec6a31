"""Edge problem: transfer data, discriminant, bands, Dirichlet spectrum."""

import math

import numpy as np
import pytest

from qgmaryland import (Band, DirichletPointError, OutOfRangeError, Potential,
                        a_coeff, dirichlet_points, discriminant, hill_bands,
                        integrate_fundamental)

ZERO = Potential.zero()
KP = Potential.piecewise_constant((0.0, 0.5, 1.0), (0.0, 6.0))
POTENTIALS = [ZERO, Potential.constant(3.5), KP]


def eta_closed_form(lam: float) -> float:
    """Independent oracle for q=0: 2 cos sqrt(lam) / 2 cosh sqrt(-lam)."""
    if lam >= 0.0:
        return 2.0 * math.cos(math.sqrt(lam))
    return 2.0 * math.cosh(math.sqrt(-lam))


def test_potential_validation():
    with pytest.raises(ValueError):
        Potential.piecewise_constant((0.0, 0.5), (1.0, 2.0))
    with pytest.raises(ValueError):
        Potential.piecewise_constant((0.0, 0.6, 0.5, 1.0), (1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        Potential.piecewise_constant((0.1, 1.0), (1.0,))


def test_transfer_zero_potential_at_zero():
    td = integrate_fundamental(ZERO, 0.0)
    assert td.s1 == pytest.approx(1.0, abs=1e-14)
    assert td.ds1 == pytest.approx(1.0, abs=1e-14)
    assert td.c1 == pytest.approx(1.0, abs=1e-14)
    assert td.dc1 == pytest.approx(0.0, abs=1e-14)


def test_transfer_zero_potential_at_pi_squared():
    # closed form: s = sin(sqrt(z) t)/sqrt(z), c = cos(sqrt(z) t)
    td = integrate_fundamental(ZERO, math.pi**2)
    assert td.s1 == pytest.approx(0.0, abs=1e-12)
    assert td.ds1 == pytest.approx(-1.0, abs=1e-12)
    assert td.c1 == pytest.approx(-1.0, abs=1e-12)
    assert td.dc1 == pytest.approx(0.0, abs=1e-11)


def test_transfer_real_z_gives_real_floats():
    td = integrate_fundamental(KP, -3.7)
    for value in (td.s1, td.ds1, td.c1, td.dc1):
        assert isinstance(value, float)


def test_transfer_constant_shift_oracle():
    rng = np.random.default_rng(20240811)
    v0 = 3.5
    shifted = Potential.constant(v0)
    for z in rng.uniform(-50.0, 200.0, size=25):
        td_shift = integrate_fundamental(shifted, z)
        td_zero = integrate_fundamental(ZERO, z - v0)
        np.testing.assert_allclose(
            [td_shift.s1, td_shift.ds1, td_shift.c1, td_shift.dc1],
            [td_zero.s1, td_zero.ds1, td_zero.c1, td_zero.dc1],
            rtol=0.0, atol=1e-13)


@pytest.mark.parametrize("q", POTENTIALS, ids=lambda p: p.kind)
def test_wronskian_conservation(q):
    rng = np.random.default_rng(7)
    for z in rng.uniform(-50.0, 200.0, size=100):
        td = integrate_fundamental(q, float(z))
        assert td.wronskian_defect <= 1e-8


def test_wronskian_complex_z():
    rng = np.random.default_rng(11)
    for _ in range(20):
        z = complex(rng.uniform(-20, 50), rng.uniform(-2, 2))
        td = integrate_fundamental(KP, z)
        assert td.wronskian_defect <= 1e-10


def test_discriminant_trivial_values():
    assert discriminant(ZERO, 0.0) == pytest.approx(2.0, abs=1e-14)
    assert discriminant(ZERO, math.pi**2) == pytest.approx(-2.0, abs=1e-12)
    assert discriminant(ZERO, -1.0) == pytest.approx(2.0 * math.cosh(1.0), rel=1e-14)


def test_discriminant_closed_form_grid():
    for lam in np.linspace(-50.0, 200.0, 200):
        assert abs(discriminant(ZERO, float(lam)) - eta_closed_form(float(lam))) <= 1e-8


def test_subdivision_invariance():
    # splitting pieces leaves the exact propagation unchanged; this is the
    # refinement analogue for matrix-product integration
    fine = Potential.piecewise_constant((0.0, 0.25, 0.5, 0.75, 1.0), (0.0, 0.0, 6.0, 6.0))
    for lam in (-20.0, -1.0, 2.5, 37.0, 150.0):
        assert abs(discriminant(KP, lam) - discriminant(fine, lam)) <= 1e-12


def test_a_coeff_values():
    assert a_coeff(ZERO, math.pi**2 / 4) == pytest.approx(math.pi / 2, rel=1e-13)
    assert a_coeff(ZERO, -1.0) == pytest.approx(1.0 / math.sinh(1.0), rel=1e-13)


def test_a_coeff_dirichlet_point():
    with pytest.raises(DirichletPointError):
        a_coeff(ZERO, math.pi**2)


def test_integrate_overflow_out_of_range():
    with pytest.raises(OutOfRangeError):
        integrate_fundamental(ZERO, -1e7)


def test_hill_bands_zero_potential():
    bands = hill_bands(ZERO, (-5.0, 50.0))
    assert len(bands) == 1
    assert bands[0].lo == pytest.approx(0.0, abs=1e-8)
    assert bands[0].hi == 50.0


def test_hill_bands_empty_window():
    assert hill_bands(ZERO, (-5.0, -0.5)) == []


def test_hill_bands_constant_shift_oracle():
    v0 = 3.5
    shifted = hill_bands(Potential.constant(v0), (-5.0, 50.0))
    reference = hill_bands(ZERO, (-5.0 - v0, 50.0 - v0))
    assert len(shifted) == len(reference)
    for band_s, band_r in zip(shifted, reference):
        assert band_s.lo == pytest.approx(band_r.lo + v0, abs=1e-8)
        assert band_s.hi == pytest.approx(band_r.hi + v0, abs=1e-8)


def test_hill_bands_piecewise_structure():
    bands = hill_bands(KP, (0.0, 45.0))
    assert len(bands) == 3
    for b0, b1 in zip(bands, bands[1:]):
        assert b0.hi < b1.lo
    # interior band edges sit on |eta| = 2
    for band in bands:
        if band.lo > 0.0:
            assert abs(abs(discriminant(KP, band.lo)) - 2.0) <= 1e-8
        if band.hi < 45.0:
            assert abs(abs(discriminant(KP, band.hi)) - 2.0) <= 1e-8


def test_dirichlet_points_zero_potential():
    points = dirichlet_points(ZERO, (0.0, 100.0))
    expected = [math.pi**2, 4 * math.pi**2, 9 * math.pi**2]
    np.testing.assert_allclose(points, expected, rtol=0.0, atol=1e-8)


def test_dirichlet_points_negative_window_empty():
    assert dirichlet_points(ZERO, (-10.0, 5.0)) == []


def test_dirichlet_points_constant_shift_oracle():
    v0 = 3.5
    shifted = dirichlet_points(Potential.constant(v0), (0.0, 100.0))
    reference = [p + v0 for p in dirichlet_points(ZERO, (-v0, 100.0 - v0))]
    np.testing.assert_allclose(shifted, reference, rtol=0.0, atol=1e-8)


@pytest.mark.parametrize("q", POTENTIALS, ids=lambda p: p.kind)
def test_dirichlet_points_in_gap_closures(q):
    for lam in dirichlet_points(q, (-5.0, 100.0)):
        assert abs(discriminant(q, lam)) >= 2.0 - 1e-6


def test_bandlist_invariants_random_potential():
    rng = np.random.default_rng(3)
    breaks = (0.0, 0.3, 0.7, 1.0)
    values = tuple(rng.uniform(-4.0, 8.0, size=3))
    q = Potential.piecewise_constant(breaks, values)
    bands = hill_bands(q, (-10.0, 80.0))
    for band in bands:
        assert band.lo < band.hi
    for b0, b1 in zip(bands, bands[1:]):
        assert b0.hi < b1.lo
