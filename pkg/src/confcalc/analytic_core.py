"""
Complex-analytic primitives.

Contour integrals here use the normalized measure in which the positively
oriented integral of dz/z around the origin equals 1, i.e. every integral is
the ordinary line integral divided by 2*pi*i.  Formulas elsewhere in the
package are written in this measure, without explicit 2*pi*i factors.

Map derivatives are taken by Cauchy extraction on small circles, never by
finite differences, so second and third derivatives stay spectrally accurate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (ContourSingularityError, DegenerateDerivativeError,
                     NoConvergenceError)

ComplexFn = Callable[[np.ndarray], np.ndarray]

# Node count for Cauchy derivative extraction.  With the radius rules below the
# aliasing error is below (1/4)**32.
CAUCHY_NODES = 32


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _unwrap_scalar(z_in, out):
    if np.ndim(z_in) == 0:
        return complex(np.asarray(out).reshape(()))
    return out


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DomainDescriptor:
    """Simply connected domain (or annulus) on the Riemann sphere.

    ``kind`` is one of ``disk``, ``exterior``, ``halfplane``, ``sphere``,
    ``annulus``, ``punctured``, ``mobius-image`` and ``map-image``.  Disks carry
    ``(center, radius)``; the unit disk is ``disk`` with ``(0, 1)``.
    """
    kind: str
    params: tuple = ()
    contains_infinity: bool = False
    base: Optional["DomainDescriptor"] = None
    map: Optional["ConformalMap"] = None

    def __post_init__(self):
        if self.kind == "annulus":
            r, R = self.params
            if not 0 < r < R:
                raise ValueError(f"annulus needs 0 < r < R, got r={r}, R={R}")
        if self.kind in ("disk", "exterior", "punctured") and self.params[1] <= 0:
            raise ValueError("radius must be positive")

    @classmethod
    def unit_disk(cls):
        return cls("disk", (0j, 1.0))

    @classmethod
    def disk(cls, center=0j, radius=1.0):
        return cls("disk", (complex(center), float(radius)))

    @classmethod
    def exterior_disk(cls, center=0j, radius=1.0):
        return cls("exterior", (complex(center), float(radius)), contains_infinity=True)

    @classmethod
    def halfplane(cls):
        return cls("halfplane")

    @classmethod
    def sphere(cls):
        return cls("sphere", contains_infinity=True)

    @classmethod
    def annulus(cls, r, R):
        return cls("annulus", (float(r), float(R)))

    @classmethod
    def punctured(cls, w, radius):
        """The sphere with the closed disk |z - w| <= radius removed."""
        return cls("punctured", (complex(w), float(radius)), contains_infinity=True)

    @classmethod
    def image(cls, base, g):
        kind = "mobius-image" if g.kind == "mobius" else "map-image"
        inf = base.contains_infinity if g.kind != "mobius" else bool(
            base.contains(g.inverse()(np.inf)) if g.params[2] != 0 else base.contains_infinity)
        return cls(kind, (), contains_infinity=inf, base=base, map=g)

    def contains(self, z):
        z = _as_complex(z)
        k = self.kind
        if k == "sphere":
            out = np.ones(z.shape, bool)
        elif k == "disk":
            c, r = self.params
            out = np.abs(z - c) < r
        elif k in ("exterior", "punctured"):
            c, r = self.params
            out = ~(np.abs(z - c) <= r)
        elif k == "halfplane":
            out = z.imag > 0
        elif k == "annulus":
            r, R = self.params
            out = (np.abs(z) > r) & (np.abs(z) < R)
        else:
            with np.errstate(all="ignore"):
                pre = self.map.inverse()(z)
            out = self.base.contains(pre) & np.isfinite(pre)
        return bool(out) if out.ndim == 0 else out

    def probe_grid(self, n=64):
        """Two concentric circles of n // 2 points each, inside the domain."""
        t = 2 * np.pi * (np.arange(n // 2) + 0.5) / (n // 2)
        k = self.kind
        if k == "disk":
            c, r = self.params
            radii = (0.5 * r, 0.9 * r)
        elif k in ("exterior", "punctured"):
            c, r = self.params
            radii = (1.1 * r, 2.0 * r)
        elif k == "annulus":
            c = 0j
            r, R = self.params
            radii = (r + 0.25 * (R - r), r + 0.75 * (R - r))
        elif k == "halfplane":
            c, radii = 1j, (0.3, 0.6)
        else:
            c, radii = 0j, (0.5, 1.0)
        return np.concatenate([c + rr * np.exp(1j * t) for rr in radii])


# ---------------------------------------------------------------------------
# Contours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircleContour:
    center: complex = 0j
    radius: float = 1.0
    orientation: int = 1
    nodes: int = 256

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("contour radius must be positive")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.nodes < 16 or self.nodes % 2:
            raise ValueError("node count must be even and at least 16")

    def points(self):
        t = 2 * np.pi * np.arange(self.nodes) / self.nodes
        return self.center + self.radius * np.exp(1j * t)


def _sample(fn, z):
    with np.errstate(all="ignore"):
        vals = _as_complex(fn(z))
    vals = np.broadcast_to(vals, z.shape)
    if not np.all(np.isfinite(vals)):
        raise ContourSingularityError("integrand is not finite on the contour")
    return vals


def contour_integral(integrand: ComplexFn, contour: CircleContour) -> complex:
    """Normalized contour integral (line integral over 2*pi*i), trapezoid rule."""
    z = contour.points()
    vals = _sample(integrand, z)
    return complex(contour.orientation * np.mean(vals * (z - contour.center)))


def laurent_coeffs(fn: ComplexFn, contour: CircleContour, n_min: int, n_max: int) -> np.ndarray:
    """Coefficients a_n, n_min <= n <= n_max, of fn(z) = sum a_n (z - center)^n
    on the contour circle."""
    M = contour.nodes
    if n_max - n_min + 1 > M:
        raise ValueError("coefficient range wider than the node count")
    vals = _sample(fn, contour.points())
    F = np.fft.fft(vals) / M
    n = np.arange(n_min, n_max + 1)
    return F[n % M] / contour.radius ** n


def taylor_coeffs(fn: ComplexFn, z0, radius, order: int, nodes: int = CAUCHY_NODES) -> np.ndarray:
    """Taylor coefficients a_0..a_order of fn around each z0.

    Returns shape ``z0.shape + (order + 1,)``.  ``radius`` may be an array
    broadcastable against z0.
    """
    z0 = _as_complex(z0)
    r = np.asarray(radius, float)[..., None]
    u = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    pts = z0[..., None] + r * u
    vals = _sample(fn, pts)
    F = np.fft.fft(vals, axis=-1) / nodes
    k = np.arange(order + 1)
    return F[..., k] / r ** k


# ---------------------------------------------------------------------------
# Conformal maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConformalMap:
    """Analytic map with derivative access.

    ``deriv`` is exact for library maps; when absent the derivative comes from
    Cauchy extraction.  ``singularities`` lists known non-analytic points and
    sets the extraction radius; ``scale`` is the local length scale.
    """
    fn: ComplexFn
    deriv: Optional[ComplexFn] = None
    domain: DomainDescriptor = field(default_factory=DomainDescriptor.sphere)
    kind: str = "closed-form"
    params: tuple = ()
    singularities: tuple = ()
    scale: float = 1.0
    inverse_fn: Optional[Callable[[], "ConformalMap"]] = None

    def __call__(self, z):
        zz = _as_complex(z)
        return _unwrap_scalar(z, self.fn(zz))

    @property
    def has_exact_derivative(self):
        return self.deriv is not None

    def cauchy_radius(self, z):
        z = _as_complex(z)
        if self.singularities:
            s = np.array([p for p in self.singularities if np.isfinite(p)], complex)
            if s.size:
                d = np.min(np.abs(z[..., None] - s), axis=-1)
                return np.minimum(0.25 * d, 0.25 * self.scale)
            return np.full(z.shape, 0.25 * self.scale)
        return np.full(z.shape, 0.05 * self.scale)

    def derivative(self, z):
        zz = _as_complex(z)
        if self.deriv is not None:
            out = self.deriv(zz)
        else:
            out = taylor_coeffs(self.fn, zz, self.cauchy_radius(zz), 1)[..., 1]
        return _unwrap_scalar(z, out)

    def taylor(self, z0, order):
        """Taylor coefficients of the map at z0 up to ``order``."""
        z0 = _as_complex(z0)
        r = self.cauchy_radius(z0)
        if self.deriv is not None and order >= 1:
            b = taylor_coeffs(self.deriv, z0, r, order - 1)
            k = np.arange(1, order + 1)
            a0 = np.asarray(_as_complex(self.fn(z0)))[..., None]
            return np.concatenate([a0, b / k], axis=-1)
        return taylor_coeffs(self.fn, z0, r, order)

    def compose(self, inner: "ConformalMap") -> "ConformalMap":
        """Return ``self o inner``."""
        if self.kind == "identity":
            return inner
        if inner.kind == "identity":
            return self
        if self.kind == "mobius" and inner.kind == "mobius":
            m = np.array(self.params).reshape(2, 2) @ np.array(inner.params).reshape(2, 2)
            return mobius(*m.ravel())
        outer = self
        deriv = None
        if outer.deriv is not None or inner.deriv is not None:
            def deriv(z):
                return outer.derivative(inner.fn(z)) * inner.derivative(z)
        inverse_fn = None
        if outer.inverse_fn is not None and inner.inverse_fn is not None:
            def inverse_fn():
                return inner.inverse().compose(outer.inverse())
        return ConformalMap(lambda z: outer.fn(inner.fn(z)), deriv, inner.domain,
                            "composition", (outer, inner), (),
                            min(outer.scale, inner.scale), inverse_fn)

    def __matmul__(self, inner):
        return self.compose(inner)

    def inverse(self, guess: Optional[ComplexFn] = None) -> "ConformalMap":
        if self.inverse_fn is not None:
            return self.inverse_fn()
        g = self

        def fn(w):
            return newton_invert(g, w, None if guess is None else guess(w))

        def deriv(w):
            return 1.0 / g.derivative(fn(w))

        return ConformalMap(fn, deriv, DomainDescriptor.image(self.domain, self)
                            if self.kind != "identity" else self.domain,
                            "newton-inverse", (self,), (), self.scale,
                            lambda: g)

    def verify(self, probe=None):
        """Derivative consistency and conformality on a probe grid."""
        probe = self.domain.probe_grid() if probe is None else _as_complex(probe)
        exact = _as_complex(self.derivative(probe))
        cauchy = taylor_coeffs(self.fn, probe, self.cauchy_radius(probe), 1)[..., 1]
        return {"derivative_mismatch": float(np.max(np.abs(exact - cauchy))),
                "min_abs_derivative": float(np.min(np.abs(exact)))}


def identity() -> ConformalMap:
    return ConformalMap(lambda z: z, lambda z: np.ones_like(z), kind="identity",
                        inverse_fn=lambda: identity())


def mobius(a, b, c, d) -> ConformalMap:
    """z -> (a z + b)/(c z + d)."""
    a, b, c, d = (complex(x) for x in (a, b, c, d))
    det = a * d - b * c
    if abs(det) < 1e-300:
        raise ValueError("Mobius map needs ad - bc != 0")

    def fn(z):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (a * z + b) / (c * z + d)
        inf_in = np.isinf(z)
        if np.any(inf_in):
            out = np.where(inf_in, a / c if c != 0 else np.inf, out)
        return out

    def deriv(z):
        return det / (c * z + d) ** 2

    sing = (-d / c,) if c != 0 else ()
    return ConformalMap(fn, deriv, DomainDescriptor.sphere(), "mobius", (a, b, c, d),
                        sing, 1.0, lambda: mobius(d, -b, -c, a))


def polynomial(coeffs: Sequence[complex]) -> ConformalMap:
    """z -> sum coeffs[k] z^k (a perturbation of the identity, typically)."""
    p = np.polynomial.Polynomial(np.asarray(coeffs, complex))
    dp = p.deriv()
    return ConformalMap(lambda z: p(z), lambda z: dp(z) + 0 * z,
                        DomainDescriptor.sphere(), "polynomial-perturbation",
                        tuple(complex(c) for c in coeffs))


def newton_invert(g: ConformalMap, w, initial_guess=None, tol: float = 1e-13,
                  maxiter: int = 50):
    """Solve g(z) = w by damped Newton iteration (vectorized over w).

    Stops once |g(z) - w| <= tol * max(1, |w|) and then takes one polishing
    step.  Entries that fail are retried with a warm start from the nearest
    converged neighbour before giving up.
    """
    w_in = w
    w = np.atleast_1d(_as_complex(w))
    z = _as_complex(w if initial_guess is None else initial_guess)
    z = np.broadcast_to(z, w.shape).copy()
    scale = np.maximum(1.0, np.abs(w))
    z, ok = _newton_loop(g, w, z, tol * scale, maxiter)
    if not np.all(ok) and np.any(ok):
        flat_w, flat_z, flat_ok = w.ravel(), z.ravel(), ok.ravel()
        good = np.flatnonzero(flat_ok)
        for i in np.flatnonzero(~flat_ok):
            j = good[np.argmin(np.abs(flat_w[good] - flat_w[i]))]
            zi, oki = _newton_loop(g, flat_w[i:i + 1], flat_z[j:j + 1].copy(),
                                   tol * np.maximum(1.0, np.abs(flat_w[i:i + 1])), maxiter)
            flat_z[i], flat_ok[i] = zi[0], oki[0]
        z, ok = flat_z.reshape(w.shape), flat_ok.reshape(w.shape)
    if not np.all(ok):
        raise NoConvergenceError("Newton inversion did not converge", last_iterate=z)
    return _unwrap_scalar(w_in, z.reshape(np.shape(w_in)))


def _newton_loop(g, w, z, tol, maxiter):
    with np.errstate(all="ignore"):
        res = np.array(g.fn(z) - w, complex)
        ok = np.abs(res) <= tol
        for _ in range(maxiter):
            if np.all(ok):
                break
            act = ~ok
            step = res[act] / _as_complex(g.derivative(z[act]))
            znew = z[act] - step
            rnew = g.fn(znew) - w[act]
            # backtrack where the residual grew
            for _ in range(6):
                worse = ~(np.abs(rnew) < np.abs(res[act]))
                if not np.any(worse):
                    break
                step = np.where(worse, 0.5 * step, step)
                znew = np.where(worse, z[act] - step, znew)
                rnew = np.where(worse, g.fn(znew) - w[act], rnew)
            z[act], res[act] = znew, rnew
            ok = np.abs(res) <= tol
        # polishing step restores full precision
        if np.any(ok):
            zp = z[ok] - res[ok] / _as_complex(g.derivative(z[ok]))
            rp = g.fn(zp) - w[ok]
            better = np.abs(rp) <= np.abs(res[ok])
            z[ok] = np.where(better, zp, z[ok])
    return z, ok & np.isfinite(z)


def schwarzian(g: ConformalMap, w):
    """Schwarzian derivative g'''/g' - (3/2)(g''/g')^2 at w."""
    w_in = w
    w = _as_complex(w)
    a = g.taylor(w, 3)
    a1, a2, a3 = a[..., 1], a[..., 2], a[..., 3]
    if np.any(np.abs(a1) < 1e-14 * g.scale):
        raise DegenerateDerivativeError("derivative vanishes at the evaluation point")
    return _unwrap_scalar(w_in, 6 * a3 / a1 - 6 * (a2 / a1) ** 2)
