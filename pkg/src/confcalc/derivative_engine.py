"""
Conformal derivatives of functionals of configurations.

A configuration is a domain with marked points carrying primary fields.  A
functional is differentiated along a vector field h by deforming the
configuration with the one-parameter family built from h and taking a
Richardson-corrected central difference in the family parameter.

Holomorphic derivatives at a point w use the pole field 1/(w - z).  With the
field rotated by a phase phi, the directional derivative has the form
e^{i phi} X + e^{-i phi} Y; the holomorphic derivative is X, isolated either
by two phases (pi/4 and -pi/4) or by a 16-node average over phi.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import InitVar, dataclass, replace
from typing import Callable, Optional, Union

import numpy as np

from .analytic_core import ConformalMap, DomainDescriptor, _as_complex, mobius
from .errors import InvalidDeformationError, SingularConfigurationError
from .vector_fields import VectorField, basis_H, family_form, special_field_hw

Move = Union[str, int]


@dataclass(frozen=True)
class PrimaryFieldData:
    """Conformal dimensions (delta, delta_bar), optionally from a GFF charge."""
    delta: float
    delta_bar: float
    charge: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.delta_bar)):
            raise ValueError("dimensions must be finite")
        if self.charge is not None:
            d = self.charge ** 2 / 2
            if abs(self.delta - d) > 1e-12 or abs(self.delta_bar - d) > 1e-12:
                raise ValueError("GFF dimensions must equal alpha^2/2")

    @classmethod
    def gff(cls, alpha: float) -> "PrimaryFieldData":
        return cls(alpha ** 2 / 2, alpha ** 2 / 2, float(alpha))

    @property
    def spin(self) -> float:
        return self.delta - self.delta_bar


@dataclass(frozen=True, eq=False)
class Configuration:
    """Domain, marked points and their fields.

    ``jacobians`` accumulate the derivative of every map applied to each
    point; ``boundary_maps`` record maps applied to the boundary, so the
    current domain is bounded by the image of the original boundary.
    """
    domain: DomainDescriptor
    points: tuple
    fields: tuple
    jacobians: tuple = ()
    boundary_maps: tuple = ()
    sector: str = ""
    check: InitVar[bool] = True

    def __post_init__(self, check):
        object.__setattr__(self, "points", tuple(complex(z) for z in self.points))
        if not self.jacobians:
            object.__setattr__(self, "jacobians", (1 + 0j,) * len(self.points))
        if not check:
            return
        if len(self.fields) != len(self.points):
            raise ValueError("one field per marked point is required")
        z = np.array(self.points, complex)
        if len(z) > 1:
            d = np.abs(z[:, None] - z[None, :]) + np.eye(len(z))
            if np.min(d) < 1e-12:
                raise SingularConfigurationError("marked points must be distinct")
        if not self.boundary_maps and len(z) and not np.all(self.domain.contains(z)):
            raise ValueError("marked points must lie inside the domain")
        if self.domain.kind == "sphere":
            charges = [f.charge for f in self.fields]
            if charges and all(c is not None for c in charges) and abs(sum(charges)) > 1e-12:
                raise ValueError("GFF charges on the sphere must sum to zero")

    @classmethod
    def gff(cls, points, charges, domain=None) -> "Configuration":
        return cls(domain or DomainDescriptor.sphere(), tuple(points),
                   tuple(PrimaryFieldData.gff(a) for a in charges))

    @property
    def z(self) -> np.ndarray:
        return np.array(self.points, complex)

    @property
    def has_boundary(self) -> bool:
        return self.domain.kind not in ("sphere",)

    def moved_indices(self, move: Move):
        if move in ("all", "points"):
            return range(len(self.points))
        if move == "boundary":
            return ()
        return (int(move),)


def apply_action(g: ConformalMap, cfg: Configuration, move: Move = "all") -> Configuration:
    """Act with g on the configuration.

    ``move`` selects what is transformed: ``all`` (points and boundary),
    ``points``, ``boundary`` or a single point index.
    """
    if g.kind == "identity":
        return cfg
    pts, jac = list(cfg.points), list(cfg.jacobians)
    idx = list(cfg.moved_indices(move))
    if idx:
        z = np.array([pts[i] for i in idx], complex)
        with np.errstate(all="ignore"):
            gz = _as_complex(g(z))
            dg = _as_complex(g.derivative(z))
        if not (np.all(np.isfinite(gz)) and np.all(np.isfinite(dg))) or np.any(np.abs(dg) < 1e-14):
            raise InvalidDeformationError("map is singular at a marked point")
        for k, i in enumerate(idx):
            pts[i] = complex(gz[k])
            jac[i] = jac[i] * complex(dg[k])
    bmaps = cfg.boundary_maps
    if move in ("all", "boundary") and cfg.has_boundary:
        bmaps = bmaps + (g,)
    return Configuration(cfg.domain, tuple(pts), cfg.fields, tuple(jac), bmaps,
                         cfg.sector, check=False)


def jacobian_factor(cfg: Configuration) -> complex:
    """prod_j |J_j|^(delta_j + delta_bar_j) exp(i spin_j arg J_j)."""
    out = 1 + 0j
    for J, fd in zip(cfg.jacobians, cfg.fields):
        out *= abs(J) ** (fd.delta + fd.delta_bar) * np.exp(1j * fd.spin * np.angle(J))
    return out


@dataclass(frozen=True, eq=False)
class Functional:
    """Configuration -> complex number."""
    evaluate: Callable[[Configuration], complex]
    name: str = ""
    real: bool = False

    def __call__(self, cfg: Configuration) -> complex:
        return complex(self.evaluate(cfg))

    def pullback(self, g: ConformalMap) -> "Functional":
        """The functional f o g^{-1}: cfg -> f(g^{-1} . cfg)."""
        ginv = g.inverse()
        return Functional(lambda cfg: self(apply_action(ginv, cfg)), f"{self.name}∘g⁻¹",
                          self.real)

    def then(self, F: Callable[[complex], complex], real: Optional[bool] = None) -> "Functional":
        return Functional(lambda cfg: F(self(cfg)), self.name,
                          self.real if real is None else real)


def constant_functional(value=1.0) -> Functional:
    return Functional(lambda cfg: value, "constant", True)


@dataclass(frozen=True)
class HoloDerivative:
    """A computed derivative with its step size and error estimate.

    For series results ``tail[k]`` is the coefficient of z^(powers[k]).
    """
    value: complex
    error: float
    eta: float
    sector: str = ""
    tol: float = 1e-5
    tail: Optional[np.ndarray] = None
    powers: Optional[np.ndarray] = None

    @property
    def flagged(self) -> bool:
        return self.error > self.tol * (1 + abs(self.value))

    def __call__(self, z):
        if self.tail is None:
            raise TypeError("only series derivatives can be evaluated")
        z = _as_complex(z)
        return np.sum(self.tail * z[..., None] ** self.powers, axis=-1)


def local_scale(cfg: Configuration, h: Optional[VectorField] = None, move: Move = "all") -> float:
    """Smallest relevant distance: between marked points, from points to the
    singularities of h, and (for boundary moves) from h's singularities to the
    boundary."""
    z = cfg.z
    d = []
    if len(z) > 1:
        m = np.abs(z[:, None] - z[None, :])
        d.append(np.min(m[~np.eye(len(z), dtype=bool)]))
    if h is not None and h.singularities:
        s = np.array(h.singularities, complex)
        if len(z):
            d.append(np.min(np.abs(z[:, None] - s[None, :])))
        if cfg.domain.kind == "halfplane" and move in ("all", "boundary"):
            d.append(np.min(np.abs(s.imag)))
    return float(min(d)) if d else 1.0


ETA0 = 1e-3


def directional_derivative(f: Functional, cfg: Configuration, h: VectorField, anchor=None,
                           eta0: float = ETA0, move: Move = "all", tol: float = 1e-5,
                           sector: str = "") -> HoloDerivative:
    """Derivative of f along h: Richardson-combined central differences at
    eta and eta/2, with eta = eta0 times the local configuration scale."""
    eta = eta0 * local_scale(cfg, h, move)
    probe = cfg.z if len(cfg.points) else None

    def D(e):
        gp = family_form(h, anchor, e, probe)
        gm = family_form(h, anchor, -e, probe)
        fp = f(apply_action(gp, cfg, move))
        fm = f(apply_action(gm, cfg, move))
        return (fp - fm) / (2 * e), max(abs(fp), abs(fm))

    d1, m1 = D(eta)
    d2, m2 = D(eta / 2)
    value = (4 * d2 - d1) / 3
    error = abs(d2 - d1) / 3 + 1e-15 * max(m1, m2) / eta
    return HoloDerivative(complex(value), float(error), eta, sector, tol)


def partial_derivative_f_ns(f: Functional, cfg: Configuration, n: int, s, **kw) -> complex:
    """Derivative along H_{n,s} with the family anchored at infinity."""
    return directional_derivative(f, cfg, basis_H(n, s), None, **kw).value


THETA_NODES = 16


def holo_derivative_point(f: Functional, cfg: Configuration, w, method: str = "two-phase",
                          move: Move = "all", anchor="w", eta0: float = ETA0,
                          tol: float = 1e-5) -> HoloDerivative:
    """Holomorphic derivative Delta_w f at the point w."""
    w = complex(w)
    a = w if anchor == "w" else anchor
    sector = f"sphere minus a disk about {w:.6g}"
    if method == "two-phase":
        phases = (np.pi / 4, -np.pi / 4)
        weights = (0.5, 0.5)
    elif method == "theta":
        phases = tuple(2 * np.pi * np.arange(THETA_NODES) / THETA_NODES)
        weights = (1 / THETA_NODES,) * THETA_NODES
    else:
        raise ValueError(f"unknown method {method!r}")
    value, error, eta = 0j, 0.0, 0.0
    for ph, wt in zip(phases, weights):
        d = directional_derivative(f, cfg, special_field_hw(w, ph), a, eta0, move, tol)
        value += wt * np.exp(-1j * ph) * d.value
        error += wt * d.error
        eta = d.eta
    return HoloDerivative(complex(value), error, eta, sector, tol)


def antiholo_derivative_point(f: Functional, cfg: Configuration, w, move: Move = "all",
                              anchor="w", eta0: float = ETA0, tol: float = 1e-5) -> HoloDerivative:
    """Antiholomorphic derivative, the full derivative along 1/(w - z) minus
    the holomorphic part."""
    w = complex(w)
    a = w if anchor == "w" else anchor
    full = directional_derivative(f, cfg, special_field_hw(w, 0.0), a, eta0, move, tol)
    hol = holo_derivative_point(f, cfg, w, "two-phase", move, anchor, eta0, tol)
    return HoloDerivative(full.value - hol.value, full.error + hol.error, hol.eta,
                          hol.sector, tol)


def _monomial(n: int, s: int) -> VectorField:
    if n >= 0:
        return basis_H(n, s)
    u = np.exp(1j * np.pi * s / 4)
    return VectorField(lambda z: u * z ** n, lambda z: u * n * z ** (n - 1),
                       DomainDescriptor.exterior_disk(), "monomial", (n, s), (0j,))


def holo_derivative_series(f: Functional, cfg: Configuration, N: int, exterior: bool = False,
                           radius: float = 1.0, eta0: float = ETA0,
                           tol: float = 1e-5) -> HoloDerivative:
    """Holomorphic derivative as a Laurent tail.

    Interior case (points in the disk of the given radius): the result is
    (1/2) sum_{n<=N, s} z^(-n-1) e^(-i pi s/4) f_{n,s}, valid outside the disk.
    For radius r != 1 the configuration is first scaled to the unit disk.
    Exterior case (points outside the unit disk): -(1/2) sum over n <= 2 down
    to n = 2 - N, valid inside the unit disk, with families anchored at 0.
    """
    if not exterior and radius != 1.0:
        G = mobius(1 / radius, 0, 0, 1)
        inner = holo_derivative_series(f.pullback(G), apply_action(G, cfg), N, False, 1.0,
                                       eta0, tol)
        # Delta^{rD}(z) = r^-2 Delta^D(z / r)
        tail = inner.tail * radius ** (-inner.powers - 2)
        return replace(inner, tail=tail, sector=f"disk of radius {radius:g}")
    ns = range(0, N + 1) if not exterior else range(2, 1 - N, -1)
    anchor = None if not exterior else 0j
    sign = 0.5 if not exterior else -0.5
    coeffs, err, eta = [], 0.0, 0.0
    for n in ns:
        c = 0j
        for s in (1, -1):
            d = directional_derivative(f, cfg, _monomial(n, s), anchor, eta0, "all", tol)
            c += sign * np.exp(-1j * np.pi * s / 4) * d.value
            err += abs(d.error)
            eta = d.eta
        coeffs.append(c)
    coeffs = np.array(coeffs)
    powers = -np.array(list(ns)) - 1
    mags = np.abs(coeffs)
    if len(mags) > 4 and mags[-1] > 1e-8 * (1 + mags.max()) and mags[-1] >= 0.5 * mags[-3]:
        warnings.warn("Laurent tail coefficients are not decaying; "
                      "points may be too close to the circle", RuntimeWarning)
    sector = "exterior of the unit disk" if exterior else "unit disk"
    return HoloDerivative(complex(coeffs[0]), err, eta, sector, tol, coeffs, powers)


# ---------------------------------------------------------------------------
# Transformation checks
# ---------------------------------------------------------------------------

def connection_theta(f: Functional, cfg: Configuration, g: ConformalMap, w, **kw) -> complex:
    """Delta_w f(cfg) - g'(w)^2 Delta_{g(w)} (f o g^{-1})(g . cfg)."""
    w = complex(w)
    lhs = holo_derivative_point(f, cfg, w, **kw).value
    rhs = holo_derivative_point(f.pullback(g), apply_action(g, cfg), g(w), **kw).value
    return complex(lhs - g.derivative(w) ** 2 * rhs)


def gamma(f: Functional, cfg: Configuration, g: ConformalMap, w, **kw) -> complex:
    """Delta_w f(cfg) - g'(w)^2 Delta_{g(w)} f(g . cfg), same functional on
    both sides."""
    w = complex(w)
    lhs = holo_derivative_point(f, cfg, w, **kw).value
    rhs = holo_derivative_point(f, apply_action(g, cfg), g(w), **kw).value
    return complex(lhs - g.derivative(w) ** 2 * rhs)


def check_mobius_covariance(f: Functional, cfg: Configuration, G: ConformalMap, w, **kw) -> float:
    if G.kind not in ("mobius", "identity"):
        raise ValueError("covariance check needs a Mobius map")
    return abs(connection_theta(f, cfg, G, w, **kw))


def chain_rule_check(f: Functional, F: Callable[[float], float], cfg: Configuration, w,
                     Fprime: Optional[Callable[[float], float]] = None, **kw) -> float:
    """|Delta_w (F o f) - F'(f) Delta_w f| for real-valued f."""
    if Fprime is None:
        def Fprime(x, h=1e-4):
            return (-F(x + 2 * h) + 8 * F(x + h) - 8 * F(x - h) + F(x - 2 * h)) / (12 * h)
    Ff = f.then(lambda v: F(v.real), real=True)
    lhs = holo_derivative_point(Ff, cfg, w, **kw).value
    rhs = Fprime(f(cfg).real) * holo_derivative_point(f, cfg, w, **kw).value
    return float(abs(lhs - rhs))


def partial_holo_derivatives(f: Functional, cfg: Configuration, w, **kw) -> dict:
    """Single-argument holomorphic derivatives: one per point plus the
    boundary (when the domain has one)."""
    parts = {j: holo_derivative_point(f, cfg, w, move=j, **kw).value
             for j in range(len(cfg.points))}
    if cfg.has_boundary:
        parts["boundary"] = holo_derivative_point(f, cfg, w, move="boundary", **kw).value
    return parts


def additivity_check(f: Functional, cfg: Configuration, w, **kw) -> float:
    total = holo_derivative_point(f, cfg, w, **kw).value
    parts = partial_holo_derivatives(f, cfg, w, **kw)
    return float(abs(total - sum(parts.values())))
