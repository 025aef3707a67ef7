"""
Factorization of near-identity maps on an annulus.

With A = {|z| > rho_A} and B = {|z| < rho_B}, a map g = id + h analytic on
rho_A < |z| < rho_B is written g = g_A' o g_B, where g_B is conformal on
(most of) B and g_A'(z) = z + O(1/z) is conformal near infinity.

Writing g_B^{-1}(y) = y + R(y), the unknown R is the fixed point of

    R = -[h(y + R(y))]_+

where [.]_+ keeps the nonnegative Laurent modes on the iteration circle
|y| = rho_tilde.  The remaining negative modes give g_A'(y) - y.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic_core import (CircleContour, ConformalMap, DomainDescriptor, _as_complex,
                            contour_integral, laurent_coeffs, newton_invert)
from .errors import ConfigError, NoConvergenceError


@dataclass(frozen=True)
class AnnularSetup:
    rho_A: float
    rho_B: float
    rho_tilde: Optional[float] = None
    nodes: int = 256

    def __post_init__(self):
        if not 0 < self.rho_A < self.rho_B:
            raise ConfigError(f"need 0 < rho_A < rho_B, got {self.rho_A}, {self.rho_B}")
        if self.rho_tilde is None:
            object.__setattr__(self, "rho_tilde",
                               self.rho_A + 0.6 * (self.rho_B - self.rho_A))
        if not self.rho_A < self.rho_tilde < self.rho_B:
            raise ConfigError("iteration radius must lie strictly between rho_A and rho_B")

    @property
    def inner(self) -> float:
        return self.rho_A + 0.25 * (self.rho_B - self.rho_A)

    @property
    def mid(self) -> float:
        return 0.5 * (self.rho_A + self.rho_B)

    @property
    def outer(self) -> float:
        return self.rho_A + 0.75 * (self.rho_B - self.rho_A)


@dataclass(frozen=True)
class SmallnessReport:
    h_sup: float
    a: float
    R: float
    L_X: float
    gamma_X: float
    q: float
    contour_lengths: tuple
    bound: float
    satisfied: bool

    @property
    def contraction_estimate(self) -> float:
        return self.gamma_X * self.h_sup / self.q


@dataclass(frozen=True, eq=False)
class FactorizationResult:
    g_B: ConformalMap
    g_Aprime: ConformalMap
    iterations: int
    final_update: float
    updates: tuple
    composition_residual: float
    tail_B: float
    tail_Aprime: float
    smallness: SmallnessReport
    R_coeffs: np.ndarray = field(repr=False, default=None)
    A_coeffs: np.ndarray = field(repr=False, default=None)


def smallness_diagnostics(h, setup: AnnularSetup, samples: int = 256) -> SmallnessReport:
    """Sufficient condition |h|_X < q/(gamma_X + 1/R) for the iteration.

    The iteration circle of B has radius rho_tilde_B; the matching circle of
    A is pushed out by S = rho_B - rho_tilde_B.  With a = S/2, R = S - a and
    d the gap between the two circles, q is the infimum over the B circle of
    the piecewise distance ratio, X is the widened annulus
    rho_A + a/2 < |z| < rho_tilde_B + a/2 + R with L_X the length of its
    boundary and gamma_X = 4 L_X / a^2.
    """
    rB = setup.rho_tilde
    S = setup.rho_B - rB
    rA = setup.rho_A + S
    a = S / 2
    Rr = S - a
    d = rB - rA
    lB, lA = 2 * np.pi * rB, 2 * np.pi * rA
    # the piecewise q(z) is constant on each circle for concentric circles
    q = float(min(d / (2 * lB), d / (2 * lA + d))) if d > 0 else 0.0
    r_in, r_out = setup.rho_A + a / 2, rB + a / 2 + Rr
    L_X = 2 * np.pi * (r_in + r_out)
    gamma_X = 4 * L_X / a ** 2
    t = 2 * np.pi * np.arange(samples) / samples
    ring = np.concatenate([r_in * np.exp(1j * t), r_out * np.exp(1j * t)])
    with np.errstate(all="ignore"):
        h_sup = float(np.max(np.abs(_as_complex(h(ring)))))
    bound = q / (gamma_X + 1 / Rr)
    return SmallnessReport(h_sup, a, Rr, L_X, gamma_X, q, (lB, lA, L_X), bound,
                           bool(h_sup < bound))


# Modes below this (relative, on the iteration circle) are roundoff; keeping
# them would blow up when the series is evaluated off the circle.
NOISE_FLOOR = 1e-15


def _series_map(coeffs: np.ndarray, powers: np.ndarray, kind: str, domain) -> ConformalMap:
    dcoeffs = coeffs * powers

    def fn(z):
        z = _as_complex(z)
        return z + np.sum(coeffs * z[..., None] ** powers, axis=-1)

    def deriv(z):
        z = _as_complex(z)
        return 1 + np.sum(dcoeffs * z[..., None] ** (powers - 1), axis=-1)

    return ConformalMap(fn, deriv, domain, kind, (coeffs, powers))


def factorize(g: ConformalMap, setup: AnnularSetup, tol: float = 1e-13,
              maxiter: int = 100) -> FactorizationResult:
    """Split g = g_A' o g_B with g_A'(z) = z + O(1/z)."""
    M = setup.nodes
    rt = setup.rho_tilde
    y = rt * np.exp(2j * np.pi * np.arange(M) / M)
    k = np.fft.fftfreq(M, 1.0 / M).astype(int)
    pos = k >= 0

    def h(z):
        return g.fn(z) - z

    def plus(vals):
        F = np.fft.fft(vals)
        F[~pos] = 0
        return np.fft.ifft(F)

    report = smallness_diagnostics(h, setup)
    if not report.satisfied:
        warnings.warn(f"smallness bound not met: |h|_X = {report.h_sup:.3g} "
                      f">= {report.bound:.3g}; iterating anyway", RuntimeWarning)
    R = np.zeros(M, complex)
    updates = []
    for it in range(1, maxiter + 1):
        with np.errstate(all="ignore"):
            R_new = -plus(h(y + R))
        if not np.all(np.isfinite(R_new)):
            raise NoConvergenceError("iteration left the annulus", last_iterate=R,
                                     diagnostics={"updates": updates})
        upd = float(np.max(np.abs(R_new - R)))
        updates.append(upd)
        R = R_new
        if upd < tol:
            break
        if it > 5 and upd > 1e3 * updates[0]:
            raise NoConvergenceError("iteration diverges", last_iterate=R,
                                     diagnostics={"updates": updates})
    else:
        raise NoConvergenceError(f"no convergence in {maxiter} iterations", last_iterate=R,
                                 diagnostics={"updates": updates})

    # Laurent data on the iteration circle
    F = np.fft.fft(R) / M
    nmax = M // 2
    rpow = np.arange(nmax)
    rco = F[:nmax] / rt ** rpow
    rco[np.abs(F[:nmax]) < NOISE_FLOOR * max(1.0, np.max(np.abs(F)))] = 0
    with np.errstate(all="ignore"):
        Hm = np.fft.fft(h(y + R)) / M
    apow = -np.arange(1, nmax)
    aco = Hm[apow % M] / rt ** apow
    aco[np.abs(Hm[apow % M]) < NOISE_FLOOR * max(1.0, np.max(np.abs(Hm)))] = 0

    inv_B = _series_map(rco, rpow, "closed-form", DomainDescriptor.disk(0, setup.rho_B))
    B_dom = DomainDescriptor.disk(0, setup.rho_B)

    def gB_fn(z):
        return newton_invert(inv_B, z)

    def gB_deriv(z):
        return 1.0 / inv_B.derivative(gB_fn(z))

    g_B = ConformalMap(gB_fn, gB_deriv, B_dom, "newton-inverse", (inv_B,), (), 1.0,
                       lambda: inv_B)
    g_A = _series_map(aco, apow, "closed-form", DomainDescriptor.exterior_disk(0, setup.rho_A))

    z_mid = setup.mid * np.exp(2j * np.pi * (np.arange(128) + 0.5) / 128)
    comp = float(np.max(np.abs(g_A(g_B(z_mid)) - g.fn(z_mid))))
    cB = laurent_coeffs(lambda z: g_B(z) - z, CircleContour(0j, setup.mid, 1, 128), -40, -1)
    cA = laurent_coeffs(lambda z: g_A(z) - z, CircleContour(0j, setup.outer, 1, 128), 0, 40)
    return FactorizationResult(g_B, g_A, it, updates[-1], tuple(updates), comp,
                               float(np.max(np.abs(cB))), float(np.max(np.abs(cA))),
                               report, rco, aco)


def cauchy_split_plus(h, setup: AnnularSetup, z) -> np.ndarray:
    """Cauchy integral of h(y)/(y - z) over the iteration circle, for z
    inside it: the part of h analytic in B."""
    c = CircleContour(0j, setup.rho_tilde, 1, setup.nodes)
    z = np.atleast_1d(_as_complex(z))
    return np.array([contour_integral(lambda y: h(y) / (y - zz), c) for zz in z])
