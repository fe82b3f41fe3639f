"""Solution oracles: exact solutions with analytic derivatives, and grid-backed ones.

Every analytic fixture has the form ``w = tau(a*phi1(x) + b*phi2(y) + c*phi3(z))``
with scalar maps ``tau`` and ``phi_i``.  A traveling wave ``f(ax + by + cz)``
solves every (A,B,C)-equation since its residual is ``abc f' f'' (A + B + C)``;
gauge transforms and coordinate reparameterizations keep it a solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import UnknownFixture
from .fields import Grid3, ScalarField3


@dataclass(frozen=True)
class ScalarMap:
    """A scalar function with its first two derivatives."""

    f: Callable
    d1: Callable
    d2: Callable
    name: str = ""

    def __call__(self, t):
        return self.f(t)

    def compose(self, inner: "ScalarMap") -> "ScalarMap":
        """``self o inner``."""
        f, g = self, inner
        return ScalarMap(
            lambda t: f.f(g.f(t)),
            lambda t: f.d1(g.f(t)) * g.d1(t),
            lambda t: f.d2(g.f(t)) * g.d1(t) ** 2 + f.d1(g.f(t)) * g.d2(t),
            f"{f.name}({g.name})",
        )


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=complex))


IDENTITY = ScalarMap(lambda t: t, lambda t: np.ones_like(np.asarray(t, dtype=complex)), _zero, "id")
EXP = ScalarMap(np.exp, np.exp, np.exp, "exp")
SIN = ScalarMap(np.sin, np.cos, lambda t: -np.sin(t), "sin")
CUBIC = ScalarMap(lambda t: t + t**3, lambda t: 1 + 3 * t**2, lambda t: 6 * t, "t+t^3")
TANH = ScalarMap(np.tanh, lambda t: 1 / np.cosh(t) ** 2,
                 lambda t: -2 * np.tanh(t) / np.cosh(t) ** 2, "tanh")


def quadratic_map(c) -> ScalarMap:
    """``s -> s + c s^2``."""
    return ScalarMap(lambda s: s + c * s**2, lambda s: 1 + 2 * c * s,
                     lambda s: 2 * c + 0 * s, f"s+{c}s^2")


def polynomial_map(coeffs, name: str = "") -> ScalarMap:
    """``t -> sum coeffs[k] t^k``."""
    p = np.polynomial.Polynomial(coeffs)
    d1, d2 = p.deriv(1), p.deriv(2)
    return ScalarMap(p, d1, d2, name or f"poly{list(coeffs)}")


PROFILES = {"exp": EXP, "sin": SIN, "cubic": CUBIC, "tanh": TANH, "identity": IDENTITY}


class SolutionOracle:
    """Interface: ``w``, ``grad``, optionally ``hessian``, and ``sample``."""

    provenance = "analytic"
    has_hessian = False

    def w(self, x, y, z):
        raise NotImplementedError

    def grad(self, x, y, z):
        raise NotImplementedError

    def __call__(self, x, y, z):
        return self.w(x, y, z)

    def sample(self, grid: Grid3) -> ScalarField3:
        X, Y, Z = grid.mesh()
        return ScalarField3(self.w(X, Y, Z), grid)

    def nondegenerate_on(self, grid: Grid3, floor: float = 1e-12) -> bool:
        X, Y, Z = grid.mesh()
        return all(np.min(np.abs(g)) > floor for g in self.grad(X, Y, Z))


@dataclass(frozen=True)
class SeparableOracle(SolutionOracle):
    """``tau(a phi1(x) + b phi2(y) + c phi3(z))``."""

    coeffs: tuple = (1.0, 1.0, 1.0)
    tau: ScalarMap = IDENTITY
    phis: tuple = (IDENTITY, IDENTITY, IDENTITY)
    name: str = ""
    params: dict = field(default_factory=dict)

    has_hessian = True

    def _s(self, x, y, z):
        a, b, c = self.coeffs
        p1, p2, p3 = self.phis
        return a * p1(np.asarray(x, dtype=complex)) + b * p2(np.asarray(y, dtype=complex)) \
            + c * p3(np.asarray(z, dtype=complex))

    def _ds(self, x, y, z):
        a, b, c = self.coeffs
        p1, p2, p3 = self.phis
        return (a * p1.d1(np.asarray(x, dtype=complex)), b * p2.d1(np.asarray(y, dtype=complex)),
                c * p3.d1(np.asarray(z, dtype=complex)))

    def w(self, x, y, z):
        return self.tau(self._s(x, y, z))

    def grad(self, x, y, z):
        s = self._s(x, y, z)
        t1 = self.tau.d1(s)
        sx, sy, sz = self._ds(x, y, z)
        return t1 * sx, t1 * sy, t1 * sz

    def hessian(self, x, y, z) -> dict:
        s = self._s(x, y, z)
        t1, t2 = self.tau.d1(s), self.tau.d2(s)
        sx, sy, sz = self._ds(x, y, z)
        a, b, c = self.coeffs
        p1, p2, p3 = self.phis
        sxx = a * p1.d2(np.asarray(x, dtype=complex))
        syy = b * p2.d2(np.asarray(y, dtype=complex))
        szz = c * p3.d2(np.asarray(z, dtype=complex))
        return {
            "xx": t2 * sx**2 + t1 * sxx,
            "yy": t2 * sy**2 + t1 * syy,
            "zz": t2 * sz**2 + t1 * szz,
            "xy": t2 * sx * sy,
            "xz": t2 * sx * sz,
            "yz": t2 * sy * sz,
        }

    def gauge(self, tau: ScalarMap) -> "SeparableOracle":
        return SeparableOracle(self.coeffs, tau.compose(self.tau), self.phis,
                               f"{tau.name}o{self.name}", self.params)

    def reparameterize(self, phis) -> "SeparableOracle":
        """``w(phi1(x), phi2(y), phi3(z))``."""
        new = tuple(old.compose(p) for old, p in zip(self.phis, phis))
        return SeparableOracle(self.coeffs, self.tau, new, f"{self.name}_reparam", self.params)


@dataclass(frozen=True)
class GaugedOracle(SolutionOracle):
    """``tau o w`` for any oracle ``w``."""

    base: SolutionOracle
    tau: ScalarMap

    @property
    def has_hessian(self):
        return getattr(self.base, "has_hessian", False)

    @property
    def provenance(self):
        return self.base.provenance

    def w(self, x, y, z):
        return self.tau(self.base.w(x, y, z))

    def grad(self, x, y, z):
        t1 = self.tau.d1(self.base.w(x, y, z))
        return tuple(t1 * g for g in self.base.grad(x, y, z))

    def hessian(self, x, y, z) -> dict:
        w = self.base.w(x, y, z)
        t1, t2 = self.tau.d1(w), self.tau.d2(w)
        g = dict(zip("xyz", self.base.grad(x, y, z)))
        H = self.base.hessian(x, y, z)
        return {k: t2 * g[k[0]] * g[k[1]] + t1 * H[k] for k in H}


def gauge_transform(w: SolutionOracle, tau: ScalarMap) -> SolutionOracle:
    """Values ``tau(w)``, gradient ``tau'(w) grad w``."""
    if isinstance(w, SeparableOracle):
        return w.gauge(tau)
    return GaugedOracle(w, tau)


class GridOracle(SolutionOracle):
    """A sampled field; queries must hit grid nodes, gradients are central differences."""

    provenance = "grid-backed"
    has_hessian = False

    def __init__(self, field: ScalarField3):
        self.field = field
        v = field.values
        hx, hy, hz = field.grid.spacing
        self._grad = tuple(
            np.gradient(v, h, axis=ax, edge_order=2) if n >= 3 else np.full(v.shape, np.nan + 0j)
            for ax, (h, n) in enumerate(zip((hx, hy, hz), v.shape))
        )

    def _index(self, x, y, z):
        idx = []
        for q, o, h, n in zip((x, y, z), self.field.grid.origin, self.field.grid.spacing,
                              self.field.grid.shape):
            f = (np.real(np.asarray(q)) - o) / h
            i = np.rint(f).astype(int)
            if np.any(np.abs(f - i) > 1e-6) or np.any(i < 0) or np.any(i >= n):
                raise ValueError("grid oracle queried off its nodes")
            idx.append(i)
        return tuple(idx)

    def w(self, x, y, z):
        return self.field.values[self._index(x, y, z)]

    def grad(self, x, y, z):
        i = self._index(x, y, z)
        return tuple(g[i] for g in self._grad)

    def sample(self, grid: Grid3) -> ScalarField3:
        if grid == self.field.grid:
            return self.field
        return super().sample(grid)


def fixture(name: str, params: dict | None = None) -> SolutionOracle:
    """Named exact solutions.

    ``linear``: ``a x + b y + c z`` (params a, b, c);
    ``exp`` / ``sin`` / ``cubic`` / ``tanh``: ``f(a x + b y + c z)``;
    ``exp_reparam``: ``exp`` composed with ``phi_i(s) = s + q_i s^2`` (params q).
    Optional ``gauge`` (a profile name) post-composes.
    """
    params = dict(params or {})
    coeffs = tuple(complex(params.get(k, d)) for k, d in zip("abc", (1.0, 2.0, 3.0)))
    if name == "linear":
        coeffs = tuple(complex(params.get(k, 1.0)) for k in "abc")
        w = SeparableOracle(coeffs, IDENTITY, name="linear", params=params)
    elif name in ("exp", "sin", "cubic", "tanh"):
        w = SeparableOracle(coeffs, PROFILES[name], name=name, params=params)
    elif name == "exp_reparam":
        q = params.get("q", (0.3, -0.2, 0.25))
        w = SeparableOracle(coeffs, EXP, tuple(quadratic_map(v) for v in q),
                            name="exp_reparam", params=params)
    else:
        raise UnknownFixture(f"unknown fixture {name!r}")
    if "gauge" in params:
        if params["gauge"] not in PROFILES:
            raise UnknownFixture(f"unknown gauge profile {params['gauge']!r}")
        w = gauge_transform(w, PROFILES[params["gauge"]])
    return w
