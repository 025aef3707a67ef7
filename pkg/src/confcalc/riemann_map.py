"""
Riemann maps for nearly circular analytic Jordan domains.

The disk map is found with Theodorsen's conjugate-function iteration for the
boundary correspondence.  Half-plane domains with a slightly deformed boundary
are handled by conjugating with the Cayley map centred at a marked point.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .analytic_core import ConformalMap, DomainDescriptor, _as_complex, newton_invert
from .errors import DeviationTooLargeError, NoConvergenceError

DEFAULT_MODES = 128
MAX_MODES = 2048


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """Closed curve t -> sum_{|n|<=N} coeffs[n + N] e^{int}, t in [0, 2 pi)."""
    coeffs: np.ndarray
    center: complex
    mean_radius: float

    @property
    def modes(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @classmethod
    def from_function(cls, gamma: Callable, center=0j, modes: int = DEFAULT_MODES,
                      validate: bool = True) -> "BoundaryCurve":
        """Fourier data of a curve given pointwise.

        Samples sit at half-offset nodes, so gamma is never asked for t = 0.
        The mode count doubles until coefficients beyond modes/2 drop below
        1e-13 of the mean radius.
        """
        while True:
            M = 4 * modes
            t = 2 * np.pi * (np.arange(M) + 0.5) / M
            with np.errstate(all="ignore"):
                vals = _as_complex(gamma(t))
            if not np.all(np.isfinite(vals)):
                raise DeviationTooLargeError("curve samples are not finite")
            F = np.fft.fft(vals) / M
            n = np.arange(-modes, modes + 1)
            c = F[n % M] * np.exp(-1j * n * np.pi / M)
            radius = float(np.mean(np.abs(vals - center)))
            tail = np.max(np.abs(c[np.abs(n) > modes // 2]))
            if tail <= 1e-13 * radius or modes >= MAX_MODES:
                break
            modes *= 2
        curve = cls(c, complex(center), radius)
        if validate:
            curve.validate()
        return curve

    @classmethod
    def circle(cls, center=0j, radius=1.0, modes: int = 8) -> "BoundaryCurve":
        c = np.zeros(2 * modes + 1, complex)
        c[modes] = center
        c[modes + 1] = radius
        return cls(c, complex(center), float(radius))

    def __call__(self, t):
        t = np.asarray(t, float)
        n = np.arange(-self.modes, self.modes + 1)
        return np.exp(1j * np.multiply.outer(t, n)) @ self.coeffs

    def validate(self, samples: int = 512):
        t = 2 * np.pi * np.arange(samples) / samples
        z = self(t) - self.center
        dev = np.max(np.abs(np.abs(z) - self.mean_radius)) / self.mean_radius
        if dev > 0.3:
            raise DeviationTooLargeError(f"relative deviation {dev:.3g} exceeds 0.3")
        # star-shaped about the centre with increasing angle implies Jordan
        steps = np.angle(np.roll(z, -1) / z)
        if np.any(steps <= 0) or abs(np.sum(steps) - 2 * np.pi) > 1e-6:
            raise DeviationTooLargeError("curve is not a positively oriented Jordan curve")


def _conjugate(f):
    """Periodic conjugate function via the multiplier -i sign(k)."""
    M = len(f)
    k = np.fft.fftfreq(M, 1.0 / M)
    return np.fft.ifft(np.fft.fft(f) * (-1j * np.sign(k))).real


@dataclass(frozen=True, eq=False)
class RiemannMapResult:
    map: ConformalMap
    iterations: int
    residual: float
    taylor: np.ndarray
    curve: BoundaryCurve

    @property
    def conformal_radius(self) -> float:
        """|F'(0)|, the conformal radius of the curve's interior at its centre."""
        return float(np.exp(self.taylor[0].real))

    def inverse(self) -> ConformalMap:
        return self.map.inverse()


def solve_disk_map(curve: BoundaryCurve, tol: float = 1e-12, maxiter: int = 200) -> RiemannMapResult:
    """Conformal map F of the unit disk onto the interior of ``curve`` with
    F(0) = curve.center and F'(0) > 0."""
    c = curve.center
    M = 2 * curve.modes
    theta = 2 * np.pi * np.arange(M) / M
    u = np.zeros(M)

    def sigma(S):
        return np.log((curve(S) - c) * np.exp(-1j * S))

    n = np.arange(-curve.modes, curve.modes + 1)

    def angular_speed(S):
        # d arg(gamma - c)/dS; divides the plain Theodorsen update so that
        # curves with uneven parametrization still contract
        E = np.exp(1j * np.multiply.outer(S, n))
        return ((E @ (1j * n * curve.coeffs)) / (E @ curve.coeffs - c)).imag

    update = np.inf
    for it in range(1, maxiter + 1):
        S = theta + u
        s = sigma(S)
        step = (_conjugate(s.real) - s.imag - u) / angular_speed(S)
        u = u + step
        update = np.max(np.abs(step))
        if update < tol:
            break
    else:
        raise DeviationTooLargeError("boundary correspondence iteration did not converge",
                                     last_residual=float(update))
    S = theta + u
    phi = sigma(S) + 1j * u
    P = np.fft.fft(phi) / M
    p = P[:M // 2].copy()
    p[0] = p[0].real
    poly = np.polynomial.Polynomial(p)
    dpoly = poly.deriv()

    def fn(z):
        return c + z * np.exp(poly(z))

    def deriv(z):
        return np.exp(poly(z)) * (1 + z * dpoly(z))

    boundary = np.exp(1j * theta)
    residual = float(np.max(np.abs(fn(boundary) - curve(S))))
    rad = np.exp(p[0].real)
    F = ConformalMap(fn, deriv, DomainDescriptor.unit_disk(), "riemann-map", (curve,), (), 1.0,
                     lambda: _disk_map_inverse(F, c, rad))
    return RiemannMapResult(F, it, residual, p, curve)


def _disk_map_inverse(F: ConformalMap, c: complex, rad: float) -> ConformalMap:
    def fn(w):
        return newton_invert(F, w, (_as_complex(w) - c) / rad)

    def deriv(w):
        return 1.0 / F.derivative(fn(w))

    return ConformalMap(fn, deriv, DomainDescriptor.image(F.domain, F), "newton-inverse",
                        (F,), (), 1.0, lambda: F)


# ---------------------------------------------------------------------------
# Half-plane
# ---------------------------------------------------------------------------

def cayley(zeta):
    """K(u) = (u - zeta)/(u - conj zeta), mapping the upper half-plane onto the
    unit disk with zeta -> 0."""
    zeta = complex(zeta)
    zb = zeta.conjugate()
    d = zeta - zb

    def fn(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 1 - d / (u - zb)
        return np.where(np.isinf(u), 1.0 + 0j, out)

    return ConformalMap(fn, lambda u: d / (u - zb) ** 2, DomainDescriptor.sphere(),
                        "mobius", (1, -zeta, 1, -zb), (zb,), 1.0,
                        lambda: cayley_inverse(zeta))


def cayley_inverse(zeta):
    zeta = complex(zeta)
    zb = zeta.conjugate()
    return ConformalMap(lambda v: (zeta - zb * v) / (1 - v),
                        lambda v: (zeta - zb) / (1 - v) ** 2,
                        DomainDescriptor.sphere(), "mobius", (-zb, zeta, -1, 1), (1,), 1.0,
                        lambda: cayley(zeta))


def cayley_curve(boundary_maps: Sequence[ConformalMap], zeta, modes: int = DEFAULT_MODES,
                 validate: bool = True) -> BoundaryCurve:
    """Image of the real line under the composed boundary maps (applied in
    order), in Cayley coordinates centred at ``zeta``."""
    K = cayley(zeta)
    Kinv = cayley_inverse(zeta)

    def gamma(t):
        x = Kinv.fn(np.exp(1j * t))
        for g in boundary_maps:
            x = g.fn(x)
        return K.fn(x)

    return BoundaryCurve.from_function(gamma, 0j, modes, validate)


def halfplane_uniformizer(curve: BoundaryCurve, z) -> ConformalMap:
    """Map from the deformed domain onto the upper half-plane fixing z.

    ``curve`` is the deformed boundary in Cayley coordinates centred at z.
    """
    res = solve_disk_map(curve)
    K, Kinv = cayley(z), cayley_inverse(z)
    return Kinv @ res.inverse() @ K


def conformal_radius_halfplane(boundary_maps: Sequence[ConformalMap], zeta,
                               modes: int = DEFAULT_MODES) -> float:
    """Conformal radius at zeta of the domain bounded by g_k(...g_1(R)) that
    contains zeta.  Undeformed, this is 2 Im zeta."""
    zeta = complex(zeta)
    base = 2 * zeta.imag
    if not boundary_maps:
        return base
    curve = cayley_curve(boundary_maps, zeta, modes)
    res = solve_disk_map(curve)
    if res.residual > 1e-9:
        raise NoConvergenceError("disk map boundary residual too large",
                                 diagnostics={"residual": res.residual})
    return base * res.conformal_radius
