"""
Holomorphic vector fields, the rotated monomial basis, actions of conformal
maps on fields, one-parameter deformation families and exponential flows.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .analytic_core import (CircleContour, ConformalMap, DomainDescriptor,
                            _as_complex, _unwrap_scalar, contour_integral,
                            taylor_coeffs)
from .errors import HorizonExceededError, StepTooLargeError


def _sign(s) -> int:
    if s in ("+", 1, 1.0):
        return 1
    if s in ("-", -1, -1.0):
        return -1
    raise ValueError(f"s must be + or -, got {s!r}")


@dataclass(frozen=True, eq=False)
class VectorField:
    """A holomorphic vector field z -> h(z) on ``domain``.

    ``quadratic`` holds (a, b, c) when h(z) = a + b z + c z^2, i.e. when h is
    global on the sphere; flows of such fields are Mobius maps.
    """
    fn: object
    deriv: Optional[object] = None
    domain: DomainDescriptor = field(default_factory=DomainDescriptor.unit_disk)
    rep: str = "closed-form"
    params: tuple = ()
    singularities: tuple = ()
    quadratic: Optional[tuple] = None

    def __call__(self, z):
        zz = _as_complex(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.broadcast_to(self.fn(zz), zz.shape)
        return _unwrap_scalar(z, out)

    def derivative(self, z):
        zz = _as_complex(z)
        if self.deriv is not None:
            out = np.broadcast_to(self.deriv(zz), zz.shape)
        else:
            if self.singularities:
                s = np.array(self.singularities, complex)
                r = 0.25 * np.min(np.abs(zz[..., None] - s), axis=-1)
                r = np.minimum(r, 0.05)
            else:
                r = np.full(zz.shape, 0.05)
            out = taylor_coeffs(self.fn, zz, r, 1)[..., 1]
        return _unwrap_scalar(z, out)

    def __add__(self, other: "VectorField") -> "VectorField":
        f, g = self, other
        quad = None
        if f.quadratic is not None and g.quadratic is not None:
            quad = tuple(x + y for x, y in zip(f.quadratic, g.quadratic))
        deriv = None
        if f.deriv is not None and g.deriv is not None:
            deriv = lambda z: f.deriv(z) + g.deriv(z)
        return VectorField(lambda z: f.fn(z) + g.fn(z), deriv, f.domain, "closed-form",
                           (), f.singularities + g.singularities, quad)

    def __mul__(self, c) -> "VectorField":
        c = complex(c)
        f = self
        quad = None if f.quadratic is None else tuple(c * x for x in f.quadratic)
        deriv = None if f.deriv is None else (lambda z: c * f.deriv(z))
        return VectorField(lambda z: c * f.fn(z), deriv, f.domain, f.rep,
                           f.params, f.singularities, quad)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def infinity_condition(self, radius: float = 1e4, nodes: int = 64) -> bool:
        """Whether |h(z)|/|z|^2 stays bounded near infinity (only meaningful
        when infinity belongs to the domain)."""
        if not self.domain.contains_infinity:
            return True
        z1 = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
        m1 = np.max(np.abs(self(z1)) / radius ** 2)
        m2 = np.max(np.abs(self(4 * z1)) / (4 * radius) ** 2)
        # O(z^2) keeps the ratio flat; z^3 would quadruple it
        return bool(np.isfinite(m1) and m2 <= 2 * m1 + 1e-12)


def quadratic_field(a=0, b=0, c=0, domain=None) -> VectorField:
    """h(z) = a + b z + c z^2, holomorphic on the whole sphere."""
    a, b, c = complex(a), complex(b), complex(c)
    return VectorField(lambda z: a + b * z + c * z * z, lambda z: b + 2 * c * z + 0 * z,
                       domain or DomainDescriptor.sphere(), "closed-form", (a, b, c),
                       (), (a, b, c))


def basis_H(n: int, s) -> VectorField:
    """H_{n,s}(z) = exp(i pi s / 4) z^n on the unit disk."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    s = _sign(s)
    u = np.exp(1j * np.pi * s / 4)
    quad = None
    if n <= 2:
        quad = tuple(u if k == n else 0j for k in range(3))
    return VectorField(lambda z: u * z ** n,
                       lambda z: u * n * z ** (n - 1) if n else 0 * z,
                       DomainDescriptor.unit_disk(), "monomial", (n, s), (), quad)


def coeff_c(h: VectorField, n: int, s, radius: float = 0.7, nodes: int = 256) -> float:
    """c_{n,s}(h) = Re of the normalized integral of z^(-n-1) e^(-i pi s/4) h(z)."""
    u = np.exp(-1j * np.pi * _sign(s) / 4)
    val = contour_integral(lambda z: z ** (-n - 1) * u * h(z),
                           CircleContour(0j, radius, 1, nodes))
    return float(val.real)


def reconstruct(h: VectorField, N: int, radius: float = 0.7) -> VectorField:
    """Partial sum of c_{n,s}(h) H_{n,s} over n <= N and both s."""
    coeffs = np.zeros(N + 1, complex)
    for n in range(N + 1):
        for s in (1, -1):
            coeffs[n] += coeff_c(h, n, s, radius) * np.exp(1j * np.pi * s / 4)
    p = np.polynomial.Polynomial(coeffs)
    dp = p.deriv()
    return VectorField(lambda z: p(z), lambda z: dp(z) + 0 * z,
                       DomainDescriptor.unit_disk(), "coefficient-series", tuple(coeffs))


def special_field_hw(w, theta: float = 0.0, radius: float = 0.1) -> VectorField:
    """h(z) = e^{i theta}/(w - z), on the sphere minus a small disk about w."""
    w = complex(w)
    u = np.exp(1j * theta)
    return VectorField(lambda z: u / (w - z), lambda z: u / (w - z) ** 2,
                       DomainDescriptor.punctured(w, radius), "pole", (w, theta), (w,))


def _sl2_generator(quad):
    a, b, c = quad
    return np.array([[b / 2, a], [-c, -b / 2]], complex)


def _quad_from_generator(X):
    return (X[0, 1], 2 * X[0, 0], -X[1, 0])


def act_left(g: ConformalMap, h: VectorField) -> VectorField:
    """z -> h(z) g'(z)."""
    return VectorField(lambda z: h.fn(z) * g.derivative(z), None, h.domain,
                       "closed-form", (), h.singularities)


def act_right(g: ConformalMap, h: VectorField) -> VectorField:
    """z -> h(g(z))."""
    return VectorField(lambda z: h.fn(g.fn(z)), None, g.domain, "closed-form")


def pushforward(g: ConformalMap, h: VectorField) -> VectorField:
    """z -> (h g')(g^{-1}(z)), the field h carried along by g."""
    if g.kind == "identity":
        return h
    if g.kind == "mobius" and h.quadratic is not None:
        M = np.array(g.params).reshape(2, 2)
        X = M @ _sl2_generator(h.quadratic) @ np.linalg.inv(M)
        return quadratic_field(*_quad_from_generator(X))
    ginv = g.inverse()
    sing = tuple(complex(g(p)) for p in h.singularities)

    def fn(z):
        y = ginv.fn(z)
        return h.fn(y) * g.derivative(y)

    return VectorField(fn, None, DomainDescriptor.image(h.domain, g), "closed-form",
                       (), sing)


def _is_infinite(a) -> bool:
    return a is None or (np.isscalar(a) and not np.isfinite(a))


def family_form(h: VectorField, anchor=None, eta: float = 0.0, probe=None) -> ConformalMap:
    """One-parameter family of maps with tangent h at eta = 0.

    ``anchor`` None or infinity gives z + eta h(z).  A finite anchor a gives
    a + (z - a)/(1 - eta h(z)/(z - a)), which fixes a.
    """
    eta = float(eta)
    pts = h.domain.probe_grid() if probe is None else _as_complex(probe)
    with np.errstate(all="ignore"):
        if _is_infinite(anchor):
            bad = np.abs(eta * _as_complex(h.derivative(pts)))
            if not np.all(bad < 0.5):
                raise StepTooLargeError(f"eta={eta} too large for z + eta h(z)")

            def fn(z):
                return z + eta * h.fn(z)

            def deriv(z):
                return 1 + eta * h.derivative(z)

            return ConformalMap(fn, deriv, h.domain, "joukowsky-family-member",
                                (np.inf, h, eta), h.singularities)

        a = complex(anchor)
        bad = np.abs(eta * _as_complex(h(pts)) / (pts - a))
        if not np.all(bad < 0.5):
            raise StepTooLargeError(f"eta={eta} too large: family denominator nearly vanishes")

    def fn(z):
        u = z - a
        return a + u / (1 - eta * h.fn(z) / u)

    def deriv(z):
        u = z - a
        q = eta * h.fn(z) / u
        return (1 - 2 * q + eta * h.derivative(z)) / (1 - q) ** 2

    return ConformalMap(fn, deriv, h.domain, "joukowsky-family-member", (a, h, eta),
                        (a,) + h.singularities)


# ---------------------------------------------------------------------------
# Flows
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FlowResult:
    map: ConformalMap
    shrunk_domain: DomainDescriptor
    method: str
    steps: int


RK4_STEPS = 64


def _rk4(h: VectorField, z, t: float, n: int):
    y = _as_complex(z).copy()
    J = np.ones_like(y)
    dt = t / n
    with np.errstate(all="ignore"):
        for _ in range(n):
            k1, l1 = h.fn(y), h.derivative(y) * J
            y2 = y + 0.5 * dt * k1
            k2, l2 = h.fn(y2), h.derivative(y2) * (J + 0.5 * dt * l1)
            y3 = y + 0.5 * dt * k2
            k3, l3 = h.fn(y3), h.derivative(y3) * (J + 0.5 * dt * l2)
            y4 = y + dt * k3
            k4, l4 = h.fn(y4), h.derivative(y4) * (J + dt * l3)
            y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            J = J + dt / 6 * (l1 + 2 * l2 + 2 * l3 + l4)
    return y, J


def _rk4_richardson(h, z, t, n=RK4_STEPS):
    y1, J1 = _rk4(h, z, t, n)
    y2, J2 = _rk4(h, z, t, 2 * n)
    return (16 * y2 - y1) / 15, (16 * J2 - J1) / 15


def _flow_map(h: VectorField, t: float, method: str) -> ConformalMap:
    if method == "closed-form":
        X = _sl2_generator(h.quadratic)
        E = expm(t * X)
        from .analytic_core import mobius
        return mobius(*E.ravel())

    def fn(z):
        zz = np.atleast_1d(_as_complex(z))
        return _rk4_richardson(h, zz.ravel(), t)[0].reshape(zz.shape).reshape(np.shape(z))

    def deriv(z):
        zz = np.atleast_1d(_as_complex(z))
        return _rk4_richardson(h, zz.ravel(), t)[1].reshape(zz.shape).reshape(np.shape(z))

    return ConformalMap(fn, deriv, h.domain, "closed-form", ("rk4-flow", h, t))


def _shrink(gt: ConformalMap, domain: DomainDescriptor, margin: float = 0.05):
    """Largest sub-domain (by probe radius) whose image stays inside ``domain``
    with the given margin; None when nothing works."""
    t = 2 * np.pi * (np.arange(64) + 0.5) / 64
    if domain.kind == "disk":
        c, R = domain.params
        target = DomainDescriptor.disk(c, (1 - margin) * R)
        for frac in np.linspace(1.0, 0.05, 20):
            rho = frac * R
            with np.errstate(all="ignore"):
                img = gt(c + rho * np.exp(1j * t))
            if np.all(np.isfinite(img)) and np.all(target.contains(img)):
                return DomainDescriptor.disk(c, rho)
        return None
    probe = domain.probe_grid()
    with np.errstate(all="ignore"):
        img = gt(probe)
    if domain.kind == "sphere":
        return domain
    if np.all(np.isfinite(img)) and np.all(domain.contains(img)):
        return domain
    return None


def exp_flow(h: VectorField, t: float, method: str = "auto") -> FlowResult:
    """Time-t flow of dz/dt = h(z) from the identity.

    Quadratic fields (constants, z, z^2 and their Mobius conjugates) flow by
    Mobius maps computed in closed form; other fields use fixed-step RK4 with
    one Richardson halving.
    """
    if method == "auto":
        method = "closed-form" if h.quadratic is not None else "rk4"
    if method == "closed-form" and h.quadratic is None:
        raise ValueError("no closed form for this field")
    gt = _flow_map(h, t, method)
    shrunk = _shrink(gt, h.domain)
    if shrunk is None:
        lo, hi = 0.0, abs(t)
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            ok = _shrink(_flow_map(h, np.sign(t) * mid, method), h.domain) is not None
            lo, hi = (mid, hi) if ok else (lo, mid)
        raise HorizonExceededError(f"flow leaves the domain before t={t}",
                                   max_valid_t=float(np.sign(t) * lo))
    steps = 0 if method == "closed-form" else 3 * RK4_STEPS
    return FlowResult(gt, shrunk, method, steps)
