import numpy as np
import pytest

from confcalc.analytic_core import mobius, polynomial
from confcalc.errors import DeviationTooLargeError
from confcalc.riemann_map import (BoundaryCurve, cayley, cayley_curve, cayley_inverse,
                                  conformal_radius_halfplane, halfplane_uniformizer,
                                  solve_disk_map)
from confcalc.vector_fields import family_form, special_field_hw

DISK_GRID = 0.9 * np.linspace(0.05, 1, 12)[:, None] * np.exp(1j * np.linspace(0, 6, 12))[None, :]
HP_GRID = np.array([1j, 0.5 + 0.3j, -1 + 2j, 2 + 0.5j, -0.3 + 0.1j])


def test_circle_is_affine():
    curve = BoundaryCurve.circle(0.3 - 0.2j, 1.7)
    res = solve_disk_map(curve)
    np.testing.assert_allclose(res.map(DISK_GRID), 0.3 - 0.2j + 1.7 * DISK_GRID, atol=1e-13)
    assert res.conformal_radius == pytest.approx(1.7)


def test_recovers_polynomial_image():
    G = polynomial([0, 1, 0.1])
    curve = BoundaryCurve.from_function(lambda t: G(np.exp(1j * t)))
    res = solve_disk_map(curve)
    assert np.max(np.abs(res.map(DISK_GRID) - G(DISK_GRID))) < 1e-9
    assert res.residual < 1e-10


def test_ellipse_resolution_independent():
    ell = lambda t: np.cos(t) + 1.1j * np.sin(t)
    a = solve_disk_map(BoundaryCurve.from_function(ell, modes=128))
    b = solve_disk_map(BoundaryCurve.from_function(ell, modes=256))
    assert np.max(np.abs(a.map(DISK_GRID) - b.map(DISK_GRID))) < 1e-8


def test_ellipse_boundary_and_normalization():
    ell = lambda t: np.cos(t) + 1.1j * np.sin(t)
    res = solve_disk_map(BoundaryCurve.from_function(ell))
    F = res.map
    assert abs(F(0.0)) < 1e-14
    assert abs(F.derivative(0.0).imag) < 1e-14 and F.derivative(0.0).real > 0
    # boundary lands on the ellipse x^2 + (y/1.1)^2 = 1
    w = F(np.exp(1j * np.linspace(0, 2 * np.pi, 50)))
    np.testing.assert_allclose(w.real ** 2 + (w.imag / 1.1) ** 2, 1, atol=1e-11)


def test_inverse_roundtrip():
    res = solve_disk_map(BoundaryCurve.from_function(lambda t: np.exp(1j * t) + 0.08 * np.exp(2j * t)))
    inv = res.inverse()
    np.testing.assert_allclose(inv(res.map(DISK_GRID)), DISK_GRID, atol=1e-12)


def test_rejects_large_deviation():
    with pytest.raises(DeviationTooLargeError):
        BoundaryCurve.from_function(lambda t: np.cos(t) + 2j * np.sin(t))


def test_rejects_self_intersecting_curve():
    with pytest.raises(DeviationTooLargeError):
        BoundaryCurve.from_function(lambda t: np.exp(-1j * t))


def test_cayley_pair():
    z = 0.3 + 0.7j
    K, Kinv = cayley(z), cayley_inverse(z)
    assert abs(K(z)) < 1e-15
    np.testing.assert_allclose(np.abs(K(np.linspace(-5, 5, 11))), 1, atol=1e-14)
    np.testing.assert_allclose(Kinv(K(HP_GRID)), HP_GRID, atol=1e-13)


def test_uniformizer_undeformed_is_identity():
    curve = cayley_curve([], 1j)
    m = halfplane_uniformizer(curve, 1j)
    np.testing.assert_allclose(m(HP_GRID), HP_GRID, atol=1e-10)


def test_uniformizer_of_mobius_image():
    G = mobius(1.2, 0.3, -0.1, 1.0)  # real coefficients, positive determinant
    z = complex(G(1j))
    curve = cayley_curve([G], z)
    m = halfplane_uniformizer(curve, z)
    x = G(np.linspace(-3, 3, 25))
    assert np.max(np.abs(m(x).imag)) < 1e-10
    assert abs(m(z) - z) < 1e-12


def test_uniformizer_of_joukowsky_deformation():
    w = 0.5 + 0.8j
    g = family_form(special_field_hw(w), None, 1e-3)
    z = 1j
    curve = cayley_curve([g], z)
    m = halfplane_uniformizer(curve, z)
    x = g(np.linspace(-3, 3, 25))
    assert np.max(np.abs(m(x).imag)) < 1e-10


def test_conformal_radius_halfplane():
    assert conformal_radius_halfplane([], 0.3 + 2j) == pytest.approx(4.0)
    # a real affine map scales the conformal radius
    A = mobius(1.5, 0.2, 0, 1)
    assert conformal_radius_halfplane([A], A(1j)) == pytest.approx(3.0, rel=1e-12)
