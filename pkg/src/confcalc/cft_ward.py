"""
Exactly solvable correlators and Ward-identity oracles.

* Vertex-operator correlators of the Gaussian free field on the sphere.
* The one-point function of a spinless primary on the upper half-plane,
  evaluated on deformed domains through their conformal radius.
* Right-hand sides of the sphere and half-plane Ward identities, the
  stress-tensor transformation law and its one-point average.
* The Joukowsky-type limit that extracts <T(w) ...> from finite deformations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .analytic_core import (CircleContour, ConformalMap, contour_integral, schwarzian,
                            taylor_coeffs)
from .derivative_engine import (Configuration, Functional, PrimaryFieldData,
                                antiholo_derivative_point, apply_action, holo_derivative_point,
                                jacobian_factor, local_scale)
from .errors import SingularConfigurationError
from .riemann_map import cayley, cayley_inverse, conformal_radius_halfplane
from .vector_fields import family_form, special_field_hw

__all__ = ["PrimaryFieldData", "CentralCharge", "gff_sphere_correlator", "gff_functional",
           "halfplane_onepoint", "halfplane_functional", "ward_rhs_sphere",
           "ward_rhs_halfplane", "connected_subtract", "transform_T", "onepoint_T",
           "onepoint_T_bootstrap", "drc_joukowsky_T", "ward_identity_check",
           "theorem4_check",
           "reflection_decomposition_check", "boundary_continuum_form"]


@dataclass(frozen=True)
class CentralCharge:
    c: float

    def __post_init__(self):
        if not np.isfinite(self.c):
            raise ValueError("central charge must be finite")

    def __float__(self):
        return float(self.c)


def _c(c) -> float:
    return float(c.c if isinstance(c, CentralCharge) else c)


# ---------------------------------------------------------------------------
# Correlators
# ---------------------------------------------------------------------------

def _charges(cfg: Configuration) -> np.ndarray:
    q = [fd.charge for fd in cfg.fields]
    if any(a is None for a in q):
        raise ValueError("GFF correlator needs a charge at every point")
    return np.array(q, float)


def gff_sphere_correlator(cfg: Configuration, reference: Optional[Configuration] = None) -> complex:
    """prod_{i<j} (z_i - z_j)^(a_i a_j) (conj z_i - conj z_j)^(a_i a_j), times
    the Jacobian factors carried by the configuration.

    Without a reference each factor uses the principal branch (the two
    factors disagree only on the negative real axis).  With a reference
    configuration the branches are continued from it along deformation
    paths, which makes the product |z_i - z_j|^(2 a_i a_j).
    """
    z, a = cfg.z, _charges(cfg)
    log_total = 0j
    n = len(z)
    for i in range(n):
        for j in range(i + 1, n):
            d = z[i] - z[j]
            if abs(d) < 1e-300:
                raise SingularConfigurationError("coincident marked points")
            p = a[i] * a[j]
            if reference is None:
                log_total += p * (np.log(d) + np.log(d.conjugate()))
                continue
            # continued from the reference, the two factors keep opposite
            # phases, so only the modulus survives
            log_total += 2 * p * np.log(abs(d))
    return complex(np.exp(log_total) * jacobian_factor(cfg))


def gff_functional(reference: Optional[Configuration] = None) -> Functional:
    return Functional(lambda cfg: gff_sphere_correlator(cfg, reference), "gff", True)


def halfplane_onepoint(z, delta: float) -> float:
    """(2 Im z)^(-2 delta)."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("point must lie in the upper half-plane")
    return float((2 * z.imag) ** (-2 * delta))


def _halfplane_eval(cfg: Configuration) -> complex:
    if len(cfg.points) == 0:
        return 1.0
    if len(cfg.points) != 1:
        raise NotImplementedError("only the one-point function is available on the half-plane")
    fd = cfg.fields[0]
    if abs(fd.spin) > 1e-15:
        raise ValueError("a nonzero one-point function needs a spinless field")
    R = conformal_radius_halfplane(cfg.boundary_maps, cfg.points[0])
    return complex(R ** (-2 * fd.delta) * jacobian_factor(cfg))


def halfplane_functional() -> Functional:
    """<O(z)>_C = R(z, C)^(-2 delta) with R the conformal radius; equals
    (2 Im z)^(-2 delta) on the undeformed half-plane."""
    return Functional(_halfplane_eval, "halfplane-onepoint", True)


def default_functional(cfg: Configuration) -> Functional:
    if cfg.domain.kind == "sphere":
        return gff_functional(cfg)
    if cfg.domain.kind == "halfplane":
        return halfplane_functional()
    raise ValueError(f"no built-in functional for domain {cfg.domain.kind}")


# ---------------------------------------------------------------------------
# Ward identities
# ---------------------------------------------------------------------------

def _holo_partials(corr: Callable, z: np.ndarray, zb: np.ndarray):
    """d/dz_j and d/dzbar_j of a function holomorphic in each of the 2n
    variables separately, by Cauchy extraction."""
    dz, dzb = np.zeros(len(z), complex), np.zeros(len(z), complex)
    pts = np.concatenate([z, zb])
    for j in range(len(z)):
        for var, out in ((0, dz), (1, dzb)):
            k = j + var * len(z)
            dist = np.abs(np.delete(pts, k) - pts[k])
            # a real z_j coincides with its own conjugate; that is no singularity
            dist = dist[dist > 1e-14]
            r = 0.25 * np.min(dist) if len(dist) else 0.25

            def fn(u, k=k):
                full = np.repeat(pts[None, :], u.size, axis=0)
                full[:, k] = u.ravel()
                n = len(z)
                return np.array([corr(row[:n], row[n:]) for row in full]).reshape(u.shape)

            out[j] = taylor_coeffs(fn, pts[k], r, 1)[1]
    return dz, dzb


def ward_rhs_sphere(w, cfg: Configuration, correlator: Optional[Callable] = None) -> complex:
    """sum_j (delta_j/(w - z_j)^2 + d_{z_j}/(w - z_j)) applied to the sphere
    correlator.  GFF derivatives are in closed form; a custom ``correlator``
    (a function of (z, zbar) arrays) is differentiated by contour extraction."""
    w = complex(w)
    z = cfg.z
    if len(z) == 0:
        return 0j
    delta = np.array([fd.delta for fd in cfg.fields])
    if correlator is None:
        a = _charges(cfg)
        value = gff_sphere_correlator(cfg, cfg)
        dlog = np.array([sum(a[j] * a[k] / (z[j] - z[k]) for k in range(len(z)) if k != j)
                         for j in range(len(z))])
        dz = dlog * value
    else:
        value = correlator(z, z.conj()) * jacobian_factor(cfg)
        dz = _holo_partials(correlator, z, z.conj())[0] * jacobian_factor(cfg)
    return complex(np.sum(delta / (w - z) ** 2 * value + dz / (w - z)))


def _halfplane_correlator(cfg: Configuration) -> Callable:
    fd = cfg.fields[0]
    p = -(fd.delta + fd.delta_bar)
    return lambda z, zb: complex(((z[0] - zb[0]) / 1j) ** p)


def ward_rhs_halfplane(w, cfg: Configuration, correlator: Optional[Callable] = None) -> complex:
    """Direct plus image terms,
    sum_j [delta_j/(w-z_j)^2 + d_{z_j}/(w-z_j) + delta_bar_j/(w-zbar_j)^2
    + d_{zbar_j}/(w-zbar_j)], applied to the half-plane correlator."""
    w = complex(w)
    z = cfg.z
    if len(z) == 0:
        return 0j
    corr = correlator or _halfplane_correlator(cfg)
    J = jacobian_factor(cfg)
    value = corr(z, z.conj()) * J
    dz, dzb = _holo_partials(corr, z, z.conj())
    dz, dzb = dz * J, dzb * J
    d = np.array([fd.delta for fd in cfg.fields])
    db = np.array([fd.delta_bar for fd in cfg.fields])
    zb = z.conj()
    return complex(np.sum(d / (w - z) ** 2 * value + dz / (w - z)
                          + db / (w - zb) ** 2 * value + dzb / (w - zb)))


def ward_image_terms(w, cfg: Configuration) -> complex:
    """The image part sum_j [delta_bar_j/(w-zbar_j)^2 + d_{zbar_j}/(w-zbar_j)] f."""
    w = complex(w)
    z = cfg.z
    if len(z) == 0:
        return 0j
    corr = _halfplane_correlator(cfg)
    J = jacobian_factor(cfg)
    value = corr(z, z.conj()) * J
    dzb = _holo_partials(corr, z, z.conj())[1] * J
    db = np.array([fd.delta_bar for fd in cfg.fields])
    zb = z.conj()
    return complex(np.sum(db / (w - zb) ** 2 * value + dzb / (w - zb)))


def connected_subtract(full: complex, onept_T: complex, correlator: complex) -> complex:
    """<T prod O> - <T><prod O>."""
    return complex(full - onept_T * correlator)


# ---------------------------------------------------------------------------
# Stress tensor
# ---------------------------------------------------------------------------

def transform_T(g: ConformalMap, w, T_value, c) -> complex:
    """g'(w)^2 T(g(w)) + (c/12){g, w}."""
    w = complex(w)
    return complex(g.derivative(w) ** 2 * T_value + _c(c) / 12 * schwarzian(g, w))


def onepoint_T(g: ConformalMap, w, c) -> complex:
    """<T(w)>_C = (c/12){g^{-1}, w} for a uniformizer g of the half-plane onto C."""
    return complex(_c(c) / 12 * schwarzian(g.inverse(), complex(w)))


def onepoint_T_bootstrap(g: ConformalMap, w, c) -> complex:
    """Same quantity from <T>_H = 0 and the transformation law at
    zeta = g^{-1}(w): -(c/12){g, zeta}/g'(zeta)^2."""
    zeta = complex(g.inverse()(complex(w)))
    return complex(-_c(c) / 12 * schwarzian(g, zeta) / g.derivative(zeta) ** 2)


# ---------------------------------------------------------------------------
# Joukowsky limit
# ---------------------------------------------------------------------------

DRC_NODES = 32
# Normalization that makes the limit equal <T(w) ...>.  The alternative
# 8/pi overshoots by exactly a factor 16; it is kept for comparison.
DRC_PREFACTOR = 1 / (2 * np.pi)
LARGE_DRC_PREFACTOR = 8 / np.pi


def _neville_zero(x: Sequence[float], y: Sequence[complex]) -> complex:
    """Polynomial extrapolation of y(x) to x = 0."""
    x = list(x)
    p = list(y)
    n = len(x)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (x[i] * p[i + 1] - x[i + m] * p[i]) / (x[i] - x[i + m])
    return complex(p[0])


def drc_joukowsky_T(f: Functional, cfg: Configuration, w, eps_sequence=None,
                    prefactor: float = DRC_PREFACTOR, nodes: int = DRC_NODES,
                    return_raw: bool = False):
    """Limit of prefactor/eps^2 * int_0^{2 pi} e^{-2 i theta} [f(g.cfg) - f(cfg)] d theta
    for g(z) = z + eps^2 e^{2 i theta}/(w - z).

    The theta integral uses ``nodes`` equispaced points.  Odd powers of the
    family parameter cannot reach the e^{2 i theta} mode, so the error is
    even in eps^4; values at the given eps are extrapolated in eps^4.
    """
    w = complex(w)
    scale = local_scale(cfg, special_field_hw(w))
    eps = np.asarray(eps_sequence if eps_sequence is not None
                     else scale * np.array([0.2, 0.1, 0.05]), float)
    f0 = f(cfg)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    raw = []
    for e in eps:
        acc = 0j
        for th in theta:
            g = family_form(special_field_hw(w, 2 * th), None, e ** 2, cfg.z)
            acc += np.exp(-2j * th) * (f(apply_action(g, cfg)) - f0)
        raw.append(prefactor / e ** 2 * acc * 2 * np.pi / nodes)
    value = _neville_zero(eps ** 4, raw)
    return (value, raw) if return_raw else value


# ---------------------------------------------------------------------------
# Ward identity checks
# ---------------------------------------------------------------------------

def ward_oracle(w, cfg: Configuration) -> complex:
    if cfg.domain.kind == "sphere":
        return ward_rhs_sphere(w, cfg)
    if cfg.domain.kind == "halfplane":
        return ward_rhs_halfplane(w, cfg)
    raise ValueError(f"no Ward oracle for domain {cfg.domain.kind}")


def ward_identity_check(cfg: Configuration, w, f: Optional[Functional] = None, **kw) -> float:
    """|Delta_w f - <T(w) prod O>| for the built-in correlator of the domain
    (the one-point average of T vanishes on the sphere and the half-plane)."""
    f = f or default_functional(cfg)
    num = holo_derivative_point(f, cfg, w, **kw).value
    return float(abs(num - ward_oracle(w, cfg)))


theorem4_check = ward_identity_check


def reflection_decomposition_check(cfg: Configuration, w, f: Optional[Functional] = None,
                                   **kw) -> float:
    """|boundary-only Delta_w f - sum_j antiholomorphic point derivatives at w|.

    The antiholomorphic derivative "at w" is taken with the pole field at
    conj(w), whose conjugate variable is w.
    """
    f = f or default_functional(cfg)
    w = complex(w)
    boundary = holo_derivative_point(f, cfg, w, move="boundary", **kw).value
    image = sum(antiholo_derivative_point(f, cfg, w.conjugate(), move=j, **kw).value
                for j in range(len(cfg.points)))
    return float(abs(boundary - image))


def boundary_continuum_form(cfg: Configuration, w, f: Optional[Functional] = None,
                            nodes: int = 32, **kw) -> complex:
    """Point derivatives plus the boundary treated as a continuum of fields.

    Returns sum_j Delta_{w|j} f plus the clockwise contour integral of
    Delta_{z|boundary} f/(w - z) over a loop inside the domain surrounding w.
    On the half-plane the loop is the preimage of a circle under the Cayley
    map centred at the first marked point.
    """
    f = f or default_functional(cfg)
    w = complex(w)
    point_part = sum(holo_derivative_point(f, cfg, w, move=j, **kw).value
                     for j in range(len(cfg.points)))
    if not cfg.has_boundary:
        return complex(point_part)
    if cfg.domain.kind != "halfplane":
        raise NotImplementedError("continuum form is implemented for the half-plane")
    zeta = cfg.points[0] if cfg.points else 1j
    K, Kinv = cayley(zeta), cayley_inverse(zeta)
    rho = 0.5 * (1 + abs(K(w)))

    def integrand(u):
        out = np.empty(u.shape, complex)
        for k, uk in enumerate(u.ravel()):
            z = complex(Kinv(uk))
            bd = holo_derivative_point(f, cfg, z, move="boundary", **kw).value
            out.flat[k] = bd / (w - z) * Kinv.derivative(uk)
        return out

    boundary_part = contour_integral(integrand, CircleContour(0j, rho, -1, nodes))
    return complex(point_part + boundary_part)
