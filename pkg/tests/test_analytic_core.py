import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from confcalc.analytic_core import (CircleContour, ConformalMap, DomainDescriptor,
                                    contour_integral, identity, laurent_coeffs, mobius,
                                    newton_invert, polynomial, schwarzian, taylor_coeffs)
from confcalc.errors import ContourSingularityError, NoConvergenceError


# --- contour integrals -------------------------------------------------------

def test_integral_of_one_over_z_is_one():
    assert contour_integral(lambda z: 1 / z, CircleContour()) == pytest.approx(1, abs=1e-14)


def test_clockwise_orientation_flips_sign():
    c = CircleContour(0j, 1.0, -1)
    assert contour_integral(lambda z: 1 / z, c) == pytest.approx(-1, abs=1e-14)


@pytest.mark.parametrize("center,radius", [(0, 1), (0.3 + 0.2j, 0.5), (-2j, 3)])
def test_entire_integrand_gives_zero(center, radius):
    c = CircleContour(center, radius)
    assert abs(contour_integral(lambda z: np.ones_like(z), c)) < 1e-14
    assert abs(contour_integral(lambda z: np.exp(z) * z ** 3, c)) < 1e-12 * max(1, radius ** 4)


def test_residue_location():
    f = lambda z: 1 / (z - 0.3)
    assert contour_integral(f, CircleContour(0j, 1.0)) == pytest.approx(1, abs=1e-14)
    assert abs(contour_integral(f, CircleContour(0j, 0.2))) < 1e-14


def test_pole_on_contour_is_rejected():
    with pytest.raises(ContourSingularityError):
        contour_integral(lambda z: 1 / (z - 1), CircleContour(0j, 1.0))


@pytest.mark.parametrize("kwargs", [dict(radius=0), dict(orientation=2), dict(nodes=7)])
def test_bad_contour(kwargs):
    with pytest.raises(ValueError):
        CircleContour(**kwargs)


# --- Laurent / Taylor ---------------------------------------------------------

def test_laurent_examples():
    np.testing.assert_allclose(laurent_coeffs(lambda z: z ** 2, CircleContour(), 0, 3),
                               [0, 0, 1, 0], atol=1e-14)
    np.testing.assert_allclose(laurent_coeffs(lambda z: 1 / (1 - z), CircleContour(0j, 0.5), 0, 2),
                               [1, 1, 1], atol=1e-14)
    np.testing.assert_allclose(laurent_coeffs(lambda z: 1 / z + 2 * z, CircleContour(), -1, 1),
                               [1, 0, 2], atol=1e-14)


def test_laurent_shifted_center():
    c = CircleContour(1 + 1j, 0.5)
    np.testing.assert_allclose(laurent_coeffs(lambda z: (z - 1 - 1j) ** -2, c, -3, 0),
                               [0, 1, 0, 0], atol=1e-13)


def test_taylor_of_exp():
    a = taylor_coeffs(np.exp, 0.2, 0.3, 5)
    fact = np.array([1, 1, 2, 6, 24, 120])
    np.testing.assert_allclose(a, np.exp(0.2) / fact, rtol=1e-12)


# --- maps --------------------------------------------------------------------

def test_exact_derivative_matches_contour_derivative():
    g = polynomial([0, 1, 0.1, 0.02j])
    rep = g.verify(DomainDescriptor.unit_disk().probe_grid())
    assert rep["derivative_mismatch"] < 1e-9
    assert rep["min_abs_derivative"] > 0


def test_map_without_derivative_uses_cauchy():
    g = ConformalMap(lambda z: z + 0.1 * np.sin(z))
    z = np.array([0.1, 0.3j, -0.2 + 0.1j])
    np.testing.assert_allclose(g.derivative(z), 1 + 0.1 * np.cos(z), atol=1e-12)


def test_mobius_composition_is_matrix_product():
    g1, g2 = mobius(1, 2, 0.3, 1), mobius(0.3j, 1, 1, 2)
    g = g1 @ g2
    assert g.kind == "mobius"
    z = np.array([0.1, 0.5j, -1 + 0.2j])
    np.testing.assert_allclose(g(z), g1(g2(z)), rtol=1e-13)


def test_mobius_singular_determinant():
    with pytest.raises(ValueError):
        mobius(1, 2, 2, 4)


def test_mobius_at_infinity():
    assert mobius(2, 1, 1, 0)(np.inf) == pytest.approx(2)


def test_domain_checks():
    with pytest.raises(ValueError):
        DomainDescriptor.annulus(1.0, 0.5)
    assert DomainDescriptor.halfplane().contains(1j)
    assert not DomainDescriptor.unit_disk().contains(1.5)
    assert DomainDescriptor.exterior_disk().contains(5)
    assert not DomainDescriptor.punctured(0.5, 0.1).contains(0.55)


# --- Newton --------------------------------------------------------------------

def test_newton_examples():
    assert newton_invert(identity(), 0.3 + 0.1j) == pytest.approx(0.3 + 0.1j, abs=1e-15)
    assert newton_invert(polynomial([0, 2]), 1.0) == pytest.approx(0.5, abs=1e-15)
    g = ConformalMap(lambda z: z / (1 - 0.2 * z), lambda z: 1 / (1 - 0.2 * z) ** 2)
    assert newton_invert(g, g(0.4)) == pytest.approx(0.4, abs=1e-14)


def test_newton_vectorized_roundtrip():
    g = polynomial([0, 1, 0.15, -0.05j])
    z = 0.6 * np.exp(2j * np.pi * np.arange(50) / 50) * np.linspace(0.1, 1, 50)
    np.testing.assert_allclose(newton_invert(g, g(z)), z, atol=1e-13)


def test_newton_gives_up_without_root():
    g = ConformalMap(lambda z: np.exp(z), lambda z: np.exp(z))
    with pytest.raises(NoConvergenceError):
        newton_invert(g, 0.0, maxiter=20)


# --- Schwarzian ------------------------------------------------------------------

def test_schwarzian_of_square():
    assert schwarzian(polynomial([0, 0, 1]), 1.0) == pytest.approx(-1.5, abs=1e-12)


def test_schwarzian_without_exact_derivative():
    g = ConformalMap(lambda z: z ** 2)
    assert schwarzian(g, 1.0) == pytest.approx(-1.5, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       st.complex_numbers(min_magnitude=0.01, max_magnitude=0.3, allow_nan=False,
                          allow_infinity=False))
def test_mobius_annihilation(a, b, c):
    assume(abs(a + 1 - b * c) > 0.1)
    g = mobius(a + 1, b, c, 1)
    w = np.array([0.1, -0.3j, 0.2 + 0.2j])
    assert np.max(np.abs(schwarzian(g, w))) < 1e-12 * (1 + abs(a) + abs(b))


def test_schwarzian_composition_rule():
    rng = np.random.default_rng(3)
    g1 = ConformalMap(lambda z: np.exp(0.4 * z), lambda z: 0.4 * np.exp(0.4 * z))
    g2 = polynomial([0.1, 1, 0.1j, 0.05])
    w = rng.uniform(-0.4, 0.4, 10) + 1j * rng.uniform(-0.4, 0.4, 10)
    lhs = schwarzian(g1 @ g2, w)
    rhs = g2.derivative(w) ** 2 * schwarzian(g1, g2(w)) + schwarzian(g2, w)
    assert np.max(np.abs(lhs - rhs)) < 1e-10
