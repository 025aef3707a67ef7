"""
Command-line driver for the verification suites.

    confcalc <suite> [--config PATH] [--out DIR] [--seed N] [--eta0 X] [--tol X]
    confcalc --list

The config is a JSON document; each suite reads its own section (keyed by the
suite name) and falls back to built-in defaults.  Complex numbers may be given
as [re, im], as plain numbers or as Python-style strings like "0.5+0.8j".
Every run writes ``report.json`` and, for suites that sweep w, ``grid.csv``.
Exit status: 0 if all checks pass, 1 if any fails, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from . import analytic_core as ac
from . import annular_factorization as af
from . import cft_ward as cw
from . import derivative_engine as de
from . import vector_fields as vf
from .errors import ConfcalcError, ConfigError

SUITES = {
    "ward-sphere": "holomorphic derivative of GFF correlators vs the sphere Ward identity",
    "ward-halfplane": "half-plane one-point function: Ward identity, reflection, boundary continuum",
    "drc": "Joukowsky-family limit vs the sphere Ward identity",
    "flow": "exponential flows: closed form vs RK4, semigroup, commutation, conjugation",
    "factorize": "annular factorization residuals, tails, contraction and idempotence",
    "schwarzian": "Schwarzian: Mobius annihilation, composition rule, one-point <T>",
    "derivative-props": "anchor independence, linearity, series forms, covariance, chain rule",
    "all": "every suite above",
}


def list_suites():
    return list(SUITES.items())


# ---------------------------------------------------------------------------
# Config helpers
# ---------------------------------------------------------------------------

def parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex number must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex number {x!r}") from exc
    if isinstance(x, (int, float)):
        return complex(x)
    raise ConfigError(f"cannot parse complex number {x!r}")


def _positive(value, name):
    value = float(value)
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


@dataclass
class Context:
    seed: int = 0
    eta0: float = de.ETA0
    tol: float | None = None
    grid: List[tuple] = field(default_factory=list)

    def rng(self, offset=0):
        return np.random.default_rng(self.seed + offset)


def _enc(v):
    if v is None:
        return None
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return {"re": _enc(v.real), "im": _enc(v.imag)}
    v = float(v)
    return v if math.isfinite(v) else None


class Checks:
    def __init__(self, ctx: Context, prefix: str = ""):
        self.ctx, self.prefix, self.items = ctx, prefix, []

    def add(self, name, value, oracle, residual, tol):
        tol = self.ctx.tol if self.ctx.tol is not None else tol
        ok = residual is not None and math.isfinite(residual) and residual < tol
        self.items.append({"name": self.prefix + name, "value": _enc(value),
                           "oracle": _enc(oracle), "residual": _enc(residual),
                           "tol": tol, "pass": bool(ok)})

    def run(self, name, fn: Callable[[], tuple], tol):
        """fn returns (value, oracle, residual); exceptions become failures."""
        try:
            value, oracle, residual = fn()
        except (ConfcalcError, ArithmeticError, ValueError, RuntimeError) as exc:
            self.items.append({"name": self.prefix + name, "value": None, "oracle": None,
                               "residual": None, "tol": tol, "pass": False,
                               "error": f"{type(exc).__name__}: {exc}"})
            return
        self.add(name, value, oracle, residual, tol)


def _rel(a, b):
    return abs(a - b) / (1 + abs(b))


def _ring(center, radius, count):
    return [center + radius * np.exp(2j * np.pi * (k + 0.5) / count) for k in range(count)]


def _w_grid(sec, default_center, default_radius, default_count):
    if "w" in sec:
        return [parse_complex(x) for x in sec["w"]]
    return _ring(parse_complex(sec.get("w_center", default_center)),
                 _positive(sec.get("w_radius", default_radius), "w_radius"),
                 int(sec.get("w_count", default_count)))


def _gff_cfg(entry) -> de.Configuration:
    pts = [parse_complex(p) for p in entry["points"]]
    charges = [float(a) for a in entry["charges"]]
    if len(pts) != len(charges):
        raise ConfigError("points and charges differ in length")
    try:
        return de.Configuration.gff(pts, charges)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

DEFAULT_SPHERE = [{"points": [[0, 0], [1, 0]], "charges": [1, -1]},
                  {"points": [[0.1, 0.2], [1.0, -0.3], [-0.7, 0.5], [0.4, 1.1]],
                   "charges": [0.7, -0.7, 0.7, -0.7]}]


def suite_ward_sphere(sec, ctx, out: Checks):
    cfgs = [_gff_cfg(s) for s in sec.get("configurations", DEFAULT_SPHERE)]
    tol = float(sec.get("tol", 1e-6))
    for i, cfg in enumerate(cfgs):
        f = cw.gff_functional(cfg)
        center = complex(np.mean(cfg.z))
        spread = float(np.max(np.abs(cfg.z - center)))
        for w in _w_grid(sec, [center.real, center.imag], spread + 0.7, 20):
            def one(w=w):
                num = de.holo_derivative_point(f, cfg, w, eta0=ctx.eta0).value
                ora = cw.ward_rhs_sphere(w, cfg)
                res = _rel(num, ora)
                ctx.grid.append((w.real, w.imag, num.real, num.imag, res))
                return num, ora, res
            out.run(f"cfg{i} w={w:.4f}", one, tol)


def _halfplane_cfg(sec):
    z = parse_complex(sec.get("point", [0, 1]))
    delta = float(sec.get("delta", 0.5))
    if z.imag <= 0:
        raise ConfigError("half-plane point must have positive imaginary part")
    return de.Configuration(ac.DomainDescriptor.halfplane(), (z,),
                            (de.PrimaryFieldData(delta, delta),))


def suite_ward_halfplane(sec, ctx, out: Checks):
    cfg = _halfplane_cfg(sec)
    z = cfg.points[0]
    f = cw.halfplane_functional()
    tol = float(sec.get("tol", 1e-5))
    for w in _w_grid(sec, [z.real, z.imag], 0.5 * z.imag, 10):
        def one(w=w):
            num = de.holo_derivative_point(f, cfg, w, eta0=ctx.eta0).value
            ora = cw.ward_rhs_halfplane(w, cfg)
            res = abs(num - ora) / abs(ora)
            ctx.grid.append((w.real, w.imag, num.real, num.imag, res))
            return num, ora, res
        out.run(f"ward w={w:.4f}", one, tol)
    for w in (z + 0.5 * z.imag * (1 + 1j), z - 0.4 * z.imag):
        def refl(w=w):
            img = cw.ward_image_terms(w, cfg)
            return None, img, cw.reflection_decomposition_check(cfg, w, eta0=ctx.eta0)
        out.run(f"reflection w={w:.4f}", refl, tol)

    w = z + 0.5 * z.imag + 0.2j * z.imag

    def cont():
        val = cw.boundary_continuum_form(cfg, w, eta0=ctx.eta0)
        ora = cw.ward_rhs_halfplane(w, cfg)
        return val, ora, abs(val - ora) / abs(ora)
    out.run(f"continuum w={w:.4f}", cont, float(sec.get("continuum_tol", 1e-4)))


def suite_drc(sec, ctx, out: Checks):
    cfg = _gff_cfg(sec.get("configuration", DEFAULT_SPHERE[0]))
    f = cw.gff_functional(cfg)
    tol = float(sec.get("tol", 1e-4))
    center = complex(np.mean(cfg.z))
    for w in _w_grid(sec, [center.real, center.imag + 0.1], 1.2, 10):
        def one(w=w):
            num = cw.drc_joukowsky_T(f, cfg, w)
            ora = cw.ward_rhs_sphere(w, cfg)
            res = abs(num - ora) / abs(ora)
            ctx.grid.append((w.real, w.imag, num.real, num.imag, res))
            return num, ora, res
        out.run(f"drc w={w:.4f}", one, tol)


def _disk_grid(radius, n_r=8, n_t=16):
    r = radius * np.linspace(0, 1, n_r + 1)[1:]
    t = 2 * np.pi * np.arange(n_t) / n_t
    return np.concatenate([[0j], np.outer(r, np.exp(1j * t)).ravel()])


def suite_flow(sec, ctx, out: Checks):
    t = float(sec.get("t", 0.1))
    z = _disk_grid(float(sec.get("probe_radius", 0.5)))
    z2 = vf.quadratic_field(c=1, domain=ac.DomainDescriptor.unit_disk())

    def rk4_vs_closed():
        a = vf.exp_flow(z2, t, "closed-form").map(z)
        b = vf.exp_flow(z2, t, "rk4").map(z)
        exact = z / (1 - t * z)
        return None, None, float(max(np.max(np.abs(b - exact)), np.max(np.abs(a - exact))))
    out.run("rk4 vs closed form h=z^2", rk4_vs_closed, float(sec.get("rk4_tol", 1e-10)))

    cubic = vf.VectorField(lambda u: 0.5 * u ** 3 + 0.2 * u + 0.1j,
                           lambda u: 1.5 * u ** 2 + 0.2 + 0 * u)
    for label, h in (("z^2", z2), ("cubic", cubic)):
        def semigroup(h=h):
            a, b = vf.exp_flow(h, 0.4 * t).map, vf.exp_flow(h, 0.6 * t).map
            c = vf.exp_flow(h, t).map
            return None, None, float(np.max(np.abs(a(b(z)) - c(z))))
        out.run(f"semigroup {label}", semigroup, float(sec.get("semigroup_tol", 1e-9)))

        def commute(h=h):
            g = vf.exp_flow(h, t).map
            return None, None, float(np.max(np.abs(h(g(z)) - h(z) * g.derivative(z))))
        out.run(f"commutation {label}", commute, float(sec.get("commute_tol", 1e-8)))

    def conj():
        G = ac.mobius(1, 0.3, 0.2, 1)
        h = vf.quadratic_field(0.3, 0.2, -0.5, domain=ac.DomainDescriptor.unit_disk())
        lhs = vf.exp_flow(vf.pushforward(G, h), t).map
        rhs = G @ vf.exp_flow(h, t).map @ G.inverse()
        w = G(z)
        return None, None, float(np.max(np.abs(lhs(w) - rhs(w))))
    out.run("conjugation by Mobius", conj, float(sec.get("semigroup_tol", 1e-9)))


def _laurent_map(coeffs: Dict[str, object]) -> ac.ConformalMap:
    c = {int(k): parse_complex(v) for k, v in coeffs.items()}
    c.setdefault(1, 1.0)

    def fn(z):
        return sum(v * z ** k for k, v in c.items())

    def deriv(z):
        return sum(k * v * z ** (k - 1) for k, v in c.items() if k != 0) + 0 * z

    return ac.ConformalMap(fn, deriv, kind="closed-form")


def suite_factorize(sec, ctx, out: Checks):
    setup = af.AnnularSetup(float(sec.get("rho_A", 0.5)), float(sec.get("rho_B", 1.5)),
                            sec.get("rho_tilde"))
    g = _laurent_map(sec.get("map", {"-1": 0.01}))
    mixed = _laurent_map(sec.get("mixed_map", {"-1": 0.01, "2": 0.01}))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = af.factorize(g, setup)
        out.add("composition residual", None, 0.0, res.composition_residual,
                float(sec.get("composition_tol", 1e-10)))
        out.add("g_B negative-mode tail", None, 0.0, res.tail_B, float(sec.get("tail_tol", 1e-9)))
        out.add("g_A' nonnegative-mode tail", None, 0.0, res.tail_Aprime,
                float(sec.get("tail_tol", 1e-9)))
        again = af.factorize(res.g_Aprime @ res.g_B, setup)
        zz = setup.mid * np.exp(2j * np.pi * np.arange(64) / 64)
        idem = float(max(np.max(np.abs(again.g_B(zz) - res.g_B(zz))),
                         np.max(np.abs(again.g_Aprime(zz) - res.g_Aprime(zz)))))
        out.add("idempotent refactorization", None, 0.0, idem, float(sec.get("idem_tol", 1e-9)))
        mix = af.factorize(mixed, setup)
        up = np.array(mix.updates)
        ratios = up[1:] / up[:-1] if len(up) > 1 else np.array([0.0])
        out.add("contraction (largest update ratio)", float(np.max(ratios)), None,
                float(np.max(ratios)), 1.0)
        out.add("mixed map composition residual", None, 0.0, mix.composition_residual,
                float(sec.get("composition_tol", 1e-10)))


def suite_schwarzian(sec, ctx, out: Checks):
    rng = ctx.rng(1)
    n_maps = int(sec.get("mobius_count", 5))
    n_pts = int(sec.get("points", 100))
    for k in range(n_maps):
        a, b, d = rng.normal(size=3) + 1j * rng.normal(size=3)
        c = 0.2 * (rng.normal() + 1j * rng.normal())
        G = ac.mobius(a, b, c, d)
        w = rng.uniform(-0.5, 0.5, n_pts) + 1j * rng.uniform(-0.5, 0.5, n_pts)
        w = w[np.abs(w + d / c) > 1.0]
        out.run(f"mobius #{k} annihilation",
                lambda G=G, w=w: (None, 0.0, float(np.max(np.abs(ac.schwarzian(G, w))))),
                float(sec.get("mobius_tol", 1e-12)))
    out.run("z^2 at w=1", lambda: (ac.schwarzian(ac.polynomial([0, 0, 1]), 1.0), -1.5,
                                    abs(ac.schwarzian(ac.polynomial([0, 0, 1]), 1.0) + 1.5)),
            1e-12)

    def composition():
        g1 = ac.ConformalMap(lambda z: np.exp(0.3 * z) + 0.1 * z ** 2,
                             lambda z: 0.3 * np.exp(0.3 * z) + 0.2 * z)
        g2 = ac.mobius(1, 0.2, 0.1, 1) @ ac.polynomial([0, 1, 0.05])
        w = rng.uniform(-0.4, 0.4, 20) + 1j * rng.uniform(-0.4, 0.4, 20)
        lhs = ac.schwarzian(g1 @ g2, w)
        rhs = g2.derivative(w) ** 2 * ac.schwarzian(g1, g2(w)) + ac.schwarzian(g2, w)
        return None, None, float(np.max(np.abs(lhs - rhs)))
    out.run("composition rule", composition, float(sec.get("composition_tol", 1e-10)))

    cc = cw.CentralCharge(float(sec.get("c", 0.5)))
    g = ac.polynomial([0, 1, 0.05])
    for w in (0.3 + 0.8j, -0.2 + 1.3j):
        def dual(w=w):
            a = cw.onepoint_T(g, w, cc)
            b = cw.onepoint_T_bootstrap(g, w, cc)
            return a, b, abs(a - b)
        out.run(f"<T> dual path w={w:.3f}", dual, float(sec.get("dual_tol", 1e-8)))


def suite_derivative_props(sec, ctx, out: Checks):
    cfg = _gff_cfg(sec.get("configuration", {"points": [[0.1, 0], [-0.3, 0.2]],
                                             "charges": [1, -1]}))
    f = cw.gff_functional(cfg)
    eta0 = ctx.eta0
    w = parse_complex(sec.get("w", [0.7, 0.9]))
    h3 = vf.basis_H(3, "+") + vf.basis_H(1, "-") * 0.5

    def anchors():
        vals = [de.directional_derivative(f, cfg, h3, a, eta0).value for a in (None, -3, -2j)]
        return vals[0], vals[1], float(max(abs(v - vals[0]) for v in vals))
    out.run("anchor independence", anchors, 1e-7)

    def linearity():
        h1, h2 = vf.basis_H(3, "+"), vf.basis_H(1, "-")
        lhs = de.directional_derivative(f, cfg, h1 * 0.7 + h2 * -1.3, None, eta0).value
        rhs = (0.7 * de.directional_derivative(f, cfg, h1, None, eta0).value
               - 1.3 * de.directional_derivative(f, cfg, h2, None, eta0).value)
        return lhs, rhs, abs(lhs - rhs)
    out.run("real linearity", linearity, 1e-7)

    series = de.holo_derivative_series(f, cfg, 20, eta0=eta0)
    for z in (2.0, 1.5j):
        def s_vs_p(z=z):
            a = series(z)
            b = de.holo_derivative_point(f, cfg, z, eta0=eta0).value
            return a, b, abs(a - b)
        out.run(f"series vs point z={z}", s_vs_p, 1e-6)
    for r in (0.8, 1.2):
        def scale(r=r):
            other = de.holo_derivative_series(f, cfg, 20, radius=r, eta0=eta0)
            return other(2.0), series(2.0), abs(other(2.0) - series(2.0))
        out.run(f"disk radius {r} vs 1", scale, 1e-7)
    out.run("chain rule F=exp",
            lambda: (None, 0.0, de.chain_rule_check(f, np.exp, cfg, w, np.exp, eta0=eta0)), 1e-6)
    out.run("chain rule F=x^2",
            lambda: (None, 0.0, de.chain_rule_check(f, lambda x: x * x, cfg, w,
                                                     lambda x: 2 * x, eta0=eta0)), 1e-6)
    out.run("additivity", lambda: (None, 0.0, de.additivity_check(f, cfg, w, eta0=eta0)), 1e-6)
    for name, G in (("dilation", ac.mobius(2, 0, 0, 1)),
                    ("rotation", ac.mobius(np.exp(0.4j), 0, 0, 1)),
                    ("translation", ac.mobius(1, 0.3 - 0.2j, 0, 1)),
                    ("inversion", ac.mobius(0, 1, 1, 0))):
        out.run(f"Mobius covariance {name}",
                lambda G=G: (None, 0.0, de.check_mobius_covariance(f, cfg, G, w, eta0=eta0)), 1e-6)
    ext = de.Configuration.gff([2, -1.5 + 1j], [1, -1])
    out.run("Mobius covariance inversion (exterior)",
            lambda: (None, 0.0, de.check_mobius_covariance(cw.gff_functional(ext), ext,
                                                           ac.mobius(0, 1, 1, 0), 0.3 + 0.1j,
                                                           eta0=eta0)), 1e-6)
    out.run("connection vanishes for Mobius",
            lambda: (None, 0.0, abs(de.connection_theta(f, cfg, ac.mobius(1, 0.2, -0.1, 1), w,
                                                        eta0=eta0))), 1e-6)

    def composition_rule():
        g1, g2 = ac.polynomial([0, 1, 0.05]), ac.polynomial([0, 1, 0, 0.03j])
        lhs = de.connection_theta(f, cfg, g1 @ g2, w, eta0=eta0)
        rhs = (de.connection_theta(f, cfg, g2, w, eta0=eta0)
               + g2.derivative(w) ** 2 * de.connection_theta(f.pullback(g2),
                                                            de.apply_action(g2, cfg), g1,
                                                            g2(w), eta0=eta0))
        return lhs, rhs, abs(lhs - rhs)
    out.run("connection composition rule", composition_rule, 1e-5)

    def biorth():
        worst = 0.0
        for n in range(5):
            for s in (1, -1):
                for m in range(5):
                    for t in (1, -1):
                        want = 1.0 if (n, s) == (m, t) else 0.0
                        worst = max(worst, abs(vf.coeff_c(vf.basis_H(m, t), n, s) - want))
        return None, 0.0, worst
    out.run("dual basis biorthogonality", biorth, 1e-12)

    h = vf.VectorField(lambda u: 1 / (2 - u), lambda u: 1 / (2 - u) ** 2)
    zr = 0.9 * np.exp(2j * np.pi * np.arange(64) / 64)
    for N in (5, 10):
        def tail(N=N):
            err = float(np.max(np.abs(vf.reconstruct(h, N)(zr) - h(zr))))
            # sum_{n>N} z^n / 2^(n+1) at |z| = 0.9, maximal at z = 0.9
            geo = 0.45 ** (N + 1) / (2 - 0.9)
            return err, geo, abs(np.log2(err / geo))
        out.run(f"reconstruct tail N={N} (log2 ratio to geometric)", tail, 1.0)


SUITE_FUNCS = {"ward-sphere": suite_ward_sphere, "ward-halfplane": suite_ward_halfplane,
               "drc": suite_drc, "flow": suite_flow, "factorize": suite_factorize,
               "schwarzian": suite_schwarzian, "derivative-props": suite_derivative_props}


def validate_config(config: dict):
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    for key in config:
        if key not in SUITES and key not in ("seed", "eta0", "tol"):
            raise ConfigError(f"unknown config section {key!r}")
    for name, sec in config.items():
        if not isinstance(sec, dict):
            continue
        for key, val in sec.items():
            if key.endswith("tol") and not float(val) > 0:
                raise ConfigError(f"{name}.{key} must be positive")
    fac = config.get("factorize", {})
    if fac:
        af.AnnularSetup(float(fac.get("rho_A", 0.5)), float(fac.get("rho_B", 1.5)),
                        fac.get("rho_tilde"))
    if "ward-halfplane" in config:
        _halfplane_cfg(config["ward-halfplane"])
    for s in config.get("ward-sphere", {}).get("configurations", []):
        _gff_cfg(s)
    if "drc" in config and "configuration" in config["drc"]:
        _gff_cfg(config["drc"]["configuration"])


def run(suite: str, config: dict, ctx: Context) -> dict:
    """Run one suite (or all) and return the report dictionary."""
    names = [s for s in SUITE_FUNCS] if suite == "all" else [suite]
    checks = []
    for name in names:
        out = Checks(ctx, f"{name}: " if suite == "all" else "")
        SUITE_FUNCS[name](config.get(name, {}), ctx, out)
        checks.extend(out.items)
    return {"suite": suite, "checks": checks, "pass": all(c["pass"] for c in checks)}


def _parser():
    p = argparse.ArgumentParser(prog="confcalc", description=__doc__.split("\n\n")[0])
    p.add_argument("suite", nargs="?", choices=list(SUITES))
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--seed", type=int)
    p.add_argument("--eta0", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--list", action="store_true", help="list suites and exit")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.list:
        for name, desc in list_suites():
            print(f"{name:18s} {desc}")
        return 0
    if args.suite is None:
        print("confcalc: a suite name is required (see --list)", file=sys.stderr)
        return 2
    try:
        config = {}
        if args.config is not None:
            config = json.loads(args.config.read_text())
        validate_config(config)
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        eta0 = args.eta0 if args.eta0 is not None else float(config.get("eta0", de.ETA0))
        tol = args.tol if args.tol is not None else config.get("tol")
        if not eta0 > 0 or (tol is not None and not float(tol) > 0):
            raise ConfigError("eta0 and tol must be positive")
        ctx = Context(seed, eta0, None if tol is None else float(tol))
    except (OSError, json.JSONDecodeError, ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"confcalc: config error: {exc}", file=sys.stderr)
        return 2

    report = run(args.suite, config, ctx)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    if ctx.grid:
        with open(args.out / "grid.csv", "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["re_w", "im_w", "re_value", "im_value", "residual"])
            for row in ctx.grid:
                wr.writerow([repr(float(x)) for x in row])
    n_fail = sum(not c["pass"] for c in report["checks"])
    print(f"{args.suite}: {len(report['checks']) - n_fail}/{len(report['checks'])} checks passed")
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
