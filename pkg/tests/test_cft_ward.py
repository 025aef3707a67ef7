import numpy as np
import pytest

from confcalc.analytic_core import DomainDescriptor, mobius, polynomial
from confcalc.cft_ward import (DRC_PREFACTOR, LARGE_DRC_PREFACTOR, CentralCharge,
                               boundary_continuum_form, connected_subtract, drc_joukowsky_T,
                               gff_functional, gff_sphere_correlator, halfplane_functional,
                               halfplane_onepoint, onepoint_T, onepoint_T_bootstrap,
                               reflection_decomposition_check, transform_T,
                               ward_identity_check, ward_image_terms, ward_rhs_halfplane,
                               ward_rhs_sphere)
from confcalc.derivative_engine import (Configuration, PrimaryFieldData, apply_action,
                                        constant_functional, holo_derivative_point)

TWO = Configuration.gff([0, 1], [1, -1])
FOUR = Configuration.gff([0.1 + 0.2j, 1.0 - 0.3j, -0.7 + 0.5j, 0.4 + 1.1j], [0.7, -0.7, 0.7, -0.7])
HALF = Configuration(DomainDescriptor.halfplane(), (1j,), (PrimaryFieldData(0.5, 0.5),))


# --- correlators ------------------------------------------------------------------

def test_two_point_hand_value():
    assert gff_sphere_correlator(TWO) == pytest.approx(1, abs=1e-15)


def test_correlator_mobius_invariance():
    G = mobius(2, 1, 0, 1)
    for cfg in (TWO, FOUR):
        assert abs(gff_sphere_correlator(apply_action(G, cfg)) - gff_sphere_correlator(cfg)) < 1e-12


def test_swap_symmetry():
    cfg = FOUR
    swapped = Configuration.gff([cfg.points[2], cfg.points[1], cfg.points[0], cfg.points[3]],
                                [0.7, -0.7, 0.7, -0.7])
    assert gff_sphere_correlator(swapped, swapped) == pytest.approx(gff_sphere_correlator(cfg, cfg))


def test_halfplane_onepoint():
    assert halfplane_onepoint(1j, 0.5) == pytest.approx(0.5)
    assert halfplane_functional()(HALF) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        halfplane_onepoint(-1j, 0.5)


# --- Ward right-hand sides -------------------------------------------------------------

def test_sphere_rhs_two_point_ratio():
    z1, z2 = TWO.points
    for w in (0.5 + 1j, -2 + 0.1j):
        ratio = ward_rhs_sphere(w, TWO) / gff_sphere_correlator(TWO, TWO)
        assert ratio == pytest.approx(0.5 * (z1 - z2) ** 2 / ((w - z1) ** 2 * (w - z2) ** 2))


def test_sphere_rhs_decay_and_empty():
    r = [abs(ward_rhs_sphere(R * np.exp(0.3j), FOUR)) for R in (1e2, 1e3)]
    assert r[0] / r[1] == pytest.approx(1e4, rel=1e-2)
    empty = Configuration(DomainDescriptor.sphere(), (), ())
    assert ward_rhs_sphere(1.0, empty) == 0


def test_sphere_rhs_custom_correlator_matches_closed_form():
    def corr(z, zb):
        return ((z[0] - z[1]) * (zb[0] - zb[1])) ** -1.0
    assert ward_rhs_sphere(0.5 + 1j, TWO, corr) == pytest.approx(ward_rhs_sphere(0.5 + 1j, TWO))


def test_halfplane_rhs_ratio_and_reality():
    z = 1j
    for w in (0.5 + 0.5j, 2 + 3j):
        ratio = ward_rhs_halfplane(w, HALF) / 0.5
        assert ratio == pytest.approx(0.5 * (z - z.conjugate()) ** 2
                                      / ((w - z) ** 2 * (w - z.conjugate()) ** 2), rel=1e-9)
    x = ward_rhs_halfplane(0.7, HALF)
    assert abs(x.imag) < 1e-10 * abs(x)
    r = [abs(ward_rhs_halfplane(R * np.exp(0.3j), HALF)) for R in (1e2, 1e3)]
    assert r[0] / r[1] == pytest.approx(1e4, rel=1e-2)


def test_connected_subtract():
    assert connected_subtract(3.0, 0.5, 2.0) == pytest.approx(2.0)


# --- numerical Ward identities ------------------------------------------------------------

@pytest.mark.parametrize("cfg", [TWO, FOUR], ids=["two-point", "four-point"])
def test_ward_check_sphere(cfg):
    for w in (2.0 + 1j, -1.2 - 0.4j):
        assert ward_identity_check(cfg, w) / (1 + abs(ward_rhs_sphere(w, cfg))) < 1e-6


def test_halfplane_ward_numeric():
    for w in (0.4 + 1.2j, -0.3 + 0.6j):
        num = holo_derivative_point(halfplane_functional(), HALF, w).value
        ora = ward_rhs_halfplane(w, HALF)
        assert abs(num - ora) / abs(ora) < 1e-5


def test_reflection_decomposition():
    w = 0.5 + 1.5j
    assert reflection_decomposition_check(HALF, w) < 1e-5
    boundary = holo_derivative_point(halfplane_functional(), HALF, w, move="boundary").value
    assert abs(boundary - ward_image_terms(w, HALF)) / abs(boundary) < 1e-5


def test_boundary_continuum_form():
    w = 0.5 + 1.2j
    val = boundary_continuum_form(HALF, w, nodes=16)
    ora = ward_rhs_halfplane(w, HALF)
    assert abs(val - ora) / abs(ora) < 1e-4


def test_continuum_form_without_boundary_is_point_sum():
    w = 2 + 1j
    val = boundary_continuum_form(TWO, w)
    assert abs(val - ward_rhs_sphere(w, TWO)) < 1e-6


# --- Joukowsky limit ------------------------------------------------------------------

def test_joukowsky_limit_of_constant_is_zero():
    assert drc_joukowsky_T(constant_functional(2.0), TWO, 0.5 + 1j) == 0


@pytest.mark.parametrize("w", [0.5 + 1j, 2.0 - 0.5j, -1 + 0.3j])
def test_joukowsky_limit_matches_ward_and_point(w):
    f = gff_functional(TWO)
    num = drc_joukowsky_T(f, TWO, w)
    ora = ward_rhs_sphere(w, TWO)
    assert abs(num - ora) / abs(ora) < 1e-4
    assert abs(num - holo_derivative_point(f, TWO, w).value) / abs(ora) < 1e-4


def test_joukowsky_extrapolation_improves_raw():
    f = gff_functional(TWO)
    w = 0.5 + 1j
    value, raw = drc_joukowsky_T(f, TWO, w, return_raw=True)
    ora = ward_rhs_sphere(w, TWO)
    assert abs(value - ora) < abs(raw[-1] - ora)


def test_large_prefactor_is_sixteen_times_larger():
    f = gff_functional(TWO)
    w = 0.5 + 1j
    large = drc_joukowsky_T(f, TWO, w, prefactor=LARGE_DRC_PREFACTOR)
    assert LARGE_DRC_PREFACTOR / DRC_PREFACTOR == pytest.approx(16)
    assert large / ward_rhs_sphere(w, TWO) == pytest.approx(16, rel=1e-4)


# --- stress tensor one-point functions ----------------------------------------------

def test_transform_T_mobius_is_tensorial():
    G = mobius(1, 0.5, 0.2, 1)
    w = 0.3 + 0.2j
    assert transform_T(G, w, 2.0, 1.0) == pytest.approx(G.derivative(w) ** 2 * 2.0, abs=1e-12)


def test_onepoint_T_vanishes_for_mobius_uniformizer():
    G = mobius(1.2, 0.3, -0.1, 1.0)
    assert abs(onepoint_T(G, 0.2 + 1.1j, CentralCharge(1.0))) < 1e-12


@pytest.mark.parametrize("w", [0.3 + 0.8j, -0.2 + 1.3j, 1.0 + 0.5j])
def test_onepoint_T_dual_path(w):
    g = polynomial([0, 1, 0.05])
    c = CentralCharge(0.5)
    assert abs(onepoint_T(g, w, c) - onepoint_T_bootstrap(g, w, c)) < 1e-8


def test_central_charge_validation():
    with pytest.raises(ValueError):
        CentralCharge(float("nan"))
    assert float(CentralCharge(0.5)) == 0.5
