"""Gluing functions from solutions, and solutions back from gluing functions.

Given a nondegenerate solution ``w`` and a curve ``y = Y(x)`` in the plane
``z = 0``, the gluing function over the circle sample ``lam`` is the map
``t -> z(0)`` obtained by following the characteristic ODE

    dz/dx = A wx / (mu C wz) - B wy Y'(x) / ((mu - 1) C wz),   y = Y(x),

from ``(x, z) = (t, 0)`` to ``x = 0``, where ``mu = (l1:l2:l3:lam)``.  Feeding
that gluing function to the wave solver and undoing the reparameterization of
y and the gauge recovers ``w``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C

from . import constants
from .annulus import _winding, circle_points
from .errors import (
    DerivativeBlowup,
    InverseOutOfRange,
    LeftDomain,
    MuTooCloseToPole,
    NodePlacement,
    NondegeneracyLost,
    ODEStepFailure,
    QEqualsOne,
)
from .fields import Grid3, ScalarField3
from .gluing import GluingFunction
from .ode import integrate
from .pde import ABCTriple, abc_from_lambda_triple, cross_ratio
from .riemann import holes_from_codes, sweep_axes, wave_values

log = logging.getLogger(__name__)


class TransversalCurve:
    """``y = Y(x)`` on ``|x| <= radius`` with ``Y(0) = 0``."""

    def __init__(self, Y: Callable, dY: Callable, radius: float, spec: dict | None = None):
        self._Y, self._dY = Y, dY
        self.radius = float(radius)
        self.spec = spec or {}

    def _check(self, x):
        if np.any(np.abs(np.real(x)) > self.radius * (1 + 1e-12)):
            raise LeftDomain(f"x outside the curve's domain |x| <= {self.radius:g}")

    def Y(self, x):
        x = np.asarray(x, dtype=float)
        self._check(x)
        return self._Y(x)

    def dY(self, x):
        x = np.asarray(x, dtype=float)
        self._check(x)
        return self._dY(x)

    __call__ = Y

    @classmethod
    def linear(cls, slope, radius) -> "TransversalCurve":
        s = complex(slope)
        return cls(lambda x: s * x + 0j, lambda x: s + 0 * x + 0j, radius,
                   {"kind": "linear", "slope": [s.real, s.imag]})

    def inverse(self, y, tol: float = 1e-14, max_iters: int = 50):
        """``phi2 = Y^{-1}`` by Newton's method on the dense output (real x)."""
        y = np.asarray(y, dtype=complex)
        s0 = complex(self._dY(np.array(0.0)))
        x = np.clip(np.real(y / s0), -self.radius, self.radius)
        for _ in range(max_iters):
            r = self._Y(x) - y
            step = np.real(r / self._dY(x))
            x = np.clip(x - step, -self.radius, self.radius)
            if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(x))):
                break
        if np.any(np.abs(self._Y(x) - y) > 1e-10 * np.maximum(np.abs(y), 1e-3)):
            raise InverseOutOfRange("y outside the image of Y")
        return x


def canonical_Y(oracle, abc: ABCTriple, radius: float, rtol: float = 1e-12,
                atol: float = 1e-14, floor: float = constants.NONDEGENERACY_FLOOR) -> TransversalCurve:
    """Solution of ``dY/dx = A wx(x, Y, 0) / (B wy(x, Y, 0))``, ``Y(0) = 0``."""

    def rhs(x, Y):
        wx, wy, _ = oracle.grad(x, Y[0], 0.0)
        if abs(wy) < floor:
            raise DerivativeBlowup(f"wy vanishes near x = {x:.6g}")
        return np.array([abc.A * wx / (abc.B * wy)], dtype=complex)

    halves = {}
    for sign in (1, -1):
        try:
            halves[sign] = integrate(rhs, (0.0, sign * radius), [0j], rtol=rtol, atol=atol,
                                     dense=True).sol
        except ODEStepFailure as exc:
            raise LeftDomain(f"canonical curve stopped: {exc}") from exc

    def Y(x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return complex(halves[1 if x >= 0 else -1](x)[0])
        out = np.empty(x.shape, dtype=complex)
        pos, neg = x >= 0, x < 0
        if pos.any():
            out[pos] = halves[1](x[pos])[0]
        if neg.any():
            out[neg] = halves[-1](x[neg])[0]
        return out

    def dY(x):
        x = np.asarray(x, dtype=float)
        yv = Y(x)
        wx, wy, _ = oracle.grad(x, yv, 0.0 * x)
        return abc.A * wx / (abc.B * wy)

    return TransversalCurve(Y, dY, radius, {"kind": "canonical"})


def boundary_values(oracle, Y: TransversalCurve) -> Callable:
    """``psi(t) = w(t, Y(t), 0)``."""
    return lambda t: oracle.w(t, Y.Y(np.real(t)), 0.0 * np.asarray(t))


def chebyshev_lobatto(t_max: float, degree: int) -> np.ndarray:
    return t_max * np.cos(np.pi * np.arange(degree + 1)[::-1] / degree)


@dataclass
class SampledGluing:
    """Per-sample Chebyshev interpolant in t over ``[-t_max, t_max]``.

    Only defined at the 2N circle samples; ``eval(lam, t)`` checks that ``lam``
    is that sample set (``t`` may carry leading batch axes).
    """

    lambda_samples: np.ndarray
    cheb_coeffs: np.ndarray  # (degree + 1, 2N)
    t_max: float
    fit_residual: float = 0.0
    provenance: dict = field(default_factory=dict)
    epsilon: float = 0.5
    zero_preserving: bool = True
    kind: str = "sampled"

    def __post_init__(self):
        self.lambda_samples = np.asarray(self.lambda_samples, dtype=complex)
        self.cheb_coeffs = np.asarray(self.cheb_coeffs, dtype=complex)
        self._dcoeffs = C.chebder(self.cheb_coeffs, axis=0) / self.t_max

    @property
    def N(self) -> int:
        return self.lambda_samples.size // 2

    @property
    def delta(self) -> float:
        return self.t_max

    def _check_lam(self, lam):
        lam = np.asarray(lam)
        if lam.shape[-1:] != self.lambda_samples.shape or not np.allclose(
                np.broadcast_to(lam, np.broadcast_shapes(lam.shape, self.lambda_samples.shape)),
                self.lambda_samples, rtol=0, atol=1e-13):
            raise ValueError("a sampled gluing is only defined at its circle samples")

    def eval(self, lam, t):
        self._check_lam(lam)
        t = np.asarray(t, dtype=complex)
        # the fit vanishes at 0 only up to rounding in the Chebyshev sum; make it exact
        return np.where(t == 0, 0j, C.chebval(t / self.t_max, self.cheb_coeffs, tensor=False))

    def dt(self, lam, t):
        self._check_lam(lam)
        t = np.asarray(t, dtype=complex)
        return C.chebval(t / self.t_max, self._dcoeffs, tensor=False)

    def t_ok(self, lam, t):
        return np.abs(t) <= self.t_max

    def index_at_zero(self) -> int:
        n, _, _ = _winding(self.dt(self.lambda_samples, np.zeros(self.lambda_samples.shape)))
        return int(n)

    # serialization
    def to_dict(self) -> dict:
        def cplx(a):
            return [[float(v.real), float(v.imag)] for v in np.ravel(a)]

        return {
            "lambda_samples": cplx(self.lambda_samples),
            "cheb_coeffs": [cplx(row) for row in self.cheb_coeffs],
            "t_max": self.t_max,
            "fit_residual": self.fit_residual,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SampledGluing":
        def cplx(a):
            a = np.asarray(a, dtype=float)
            return a[..., 0] + 1j * a[..., 1]

        return cls(cplx(d["lambda_samples"]), cplx(d["cheb_coeffs"]), float(d["t_max"]),
                   float(d.get("fit_residual", 0.0)), d.get("provenance", {}))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "SampledGluing":
        return cls.from_dict(json.loads(Path(path).read_text()))


def mu_on_circle(lam1, lam2, lam3, lam, eps1: float = constants.EPS1) -> np.ndarray:
    """``mu = (l1:l2:l3:lam)`` per circle sample, checked against the poles 0 and 1."""
    mu = np.array([cross_ratio(lam1, lam2, lam3, complex(v)) for v in np.ravel(lam)])
    if np.any(np.abs(mu) <= eps1) or np.any(np.abs(mu - 1) <= eps1):
        raise MuTooCloseToPole(f"|mu| or |mu - 1| <= {eps1:g} on the circle")
    return mu.reshape(np.shape(lam))


def _shots(oracle, abc: ABCTriple, Y: TransversalCurve, mu, t, rtol, atol, floor):
    """``z(0)`` for every pair (mu_j, t_k); returns an array of shape (len(t), len(mu)).

    All shots run in one vectorised solve with ``x = s t``, ``s`` from 1 to 0.
    """
    t = np.asarray(t, dtype=float)
    mu = np.asarray(mu, dtype=complex)
    cm = 1.0 / (mu * abc.C)
    cm1 = 1.0 / ((mu - 1) * abc.C)
    shape = (t.size, mu.size)
    worst = [np.inf]

    def rhs(s, zflat):
        z = zflat.reshape(shape)
        x = s * t
        y = Y.Y(x)
        yp = Y.dY(x)
        wx, wy, wz = oracle.grad(x[:, None], y[:, None], z)
        worst[0] = min(worst[0], float(np.min(np.abs(wz))))
        if worst[0] < floor:
            raise NondegeneracyLost("wz vanishes along a characteristic")
        dzdx = abc.A * wx * cm / wz - abc.B * wy * yp[:, None] * cm1 / wz
        return (t[:, None] * dzdx).ravel()

    sol = integrate(rhs, (1.0, 0.0), np.zeros(t.size * mu.size, dtype=complex), rtol=rtol, atol=atol)
    return sol.y[:, -1].reshape(shape)


def glue_sample(oracle, lam1, lam2, lam3, Y: TransversalCurve, t_max: float = constants.T_MAX,
                degree: int = constants.CHEB_DEGREE, N: int = constants.DEFAULT_N,
                eps1: float = constants.EPS1, rtol: float = constants.ODE_RTOL,
                atol: float = constants.ODE_ATOL, floor: float = constants.NONDEGENERACY_FLOOR,
                holdout: bool = True) -> SampledGluing:
    """Characteristic shots at Chebyshev-Lobatto nodes in t, fitted per circle sample."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if t_max > Y.radius * (1 + 1e-12):
        raise LeftDomain(f"t_max = {t_max:g} exceeds the curve radius {Y.radius:g}")
    if not (abs(lam1) < 1 and abs(lam2) < 1 and abs(lam3) > 1):
        raise NodePlacement(f"need |lam1|, |lam2| < 1 < |lam3|, got {lam1}, {lam2}, {lam3}")
    abc = abc_from_lambda_triple(lam1, lam2, lam3)
    lam = circle_points(N)
    mu = mu_on_circle(lam1, lam2, lam3, lam, eps1)
    nodes = chebyshev_lobatto(t_max, degree)
    vals = _shots(oracle, abc, Y, mu, nodes, rtol, atol, floor)
    vals[nodes == 0] = 0.0
    coeffs = C.chebfit(nodes / t_max, vals, degree)
    coeffs[0] -= C.chebval(0.0, coeffs)  # exact zero at t = 0
    sg = SampledGluing(lam, coeffs, float(t_max), 0.0, {
        "lambdas": [[complex(v).real, complex(v).imag] for v in (lam1, lam2, lam3)],
        "Y": Y.spec,
        "degree": degree,
        "oracle": getattr(oracle, "name", type(oracle).__name__),
    })
    if holdout:
        mids = t_max * np.cos(np.pi * (np.arange(degree) + 0.5) / degree)
        check = _shots(oracle, abc, Y, mu, mids, rtol, atol, floor)
        fit = sg.eval(lam, mids[:, None] + 0 * lam)
        scale = max(float(np.max(np.abs(check))), 1e-300)
        sg.fit_residual = float(np.max(np.abs(fit - check)) / scale)
    log.info("sampled gluing: t_max=%g degree=%d fit residual %.2e", t_max, degree, sg.fit_residual)
    return sg


def slope_at_zero(oracle, lam1, lam2, lam3, Y: TransversalCurve, N: int = constants.DEFAULT_N,
                  eps1: float = constants.EPS1) -> np.ndarray:
    """``dg/dt(lam, 0)`` per circle sample: minus the characteristic slope at the origin."""
    abc = abc_from_lambda_triple(lam1, lam2, lam3)
    mu = mu_on_circle(lam1, lam2, lam3, circle_points(N), eps1)
    wx, wy, wz = oracle.grad(0.0, 0.0, 0.0)
    yp = Y.dY(np.array(0.0))
    return -(abc.A * wx / (mu * abc.C * wz) - abc.B * wy * yp / ((mu - 1) * abc.C * wz))


def suggest_t_max(oracle, lam1, lam2, lam3, Y: TransversalCurve, grid: Grid3,
                  N: int = constants.DEFAULT_N, margin: float = 1.25) -> float:
    """t-range needed by the wave solver on ``grid``, from the problem linearized at t = 0.

    The sections ``sigma_+`` the solver visits on the circle are much larger than the
    grid values themselves, so the fit must cover ``max |sigma_+|`` over the box corners.
    """
    slope = slope_at_zero(oracle, lam1, lam2, lam3, Y, N)
    lin = GluingFunction(lambda lam, t: slope * t, lambda lam, t: slope + 0 * t,
                         kind="linearized")
    corners = [(a, b, c) for a in grid.axes()[0][[0, -1]] for b in grid.axes()[1][[0, -1]]
               for c in grid.axes()[2][[0, -1]]]
    x, y, z = (np.array(v) for v in zip(*corners))
    yy = Y.inverse(y)
    from .scaffold import wave_scaffold  # local: only needed here

    res = wave_values(lin, lam1, lam2, lam3, x, yy, z, N)
    sg = wave_scaffold(lin, lam1, lam2, lam3, x, yy, z, N=N, check=False)
    sigma = sg.t_tilde(circle_points(N), res.sigma_plus)
    return float(margin * max(np.max(np.abs(sigma)), 1e-12))


@dataclass(frozen=True)
class ConditionReport:
    ok: bool
    lhs: float
    Q: complex
    margin: float

    def to_dict(self) -> dict:
        return {"ok": self.ok, "lhs": self.lhs, "Q": [self.Q.real, self.Q.imag],
                "margin": self.margin}


def check_condition_10760(oracle, lam1, lam2, Y: TransversalCurve, lam3=None, abc=None,
                          radius: float = 1.0, strict: bool = False) -> ConditionReport:
    """``|(Q l1 - l2)/(Q - 1)| > radius`` with ``Q = Y'(0) B wy(0) / (A wx(0))``.

    ``Q = 1`` (the canonical curve) puts the point at infinity, reported as a pass
    with infinite margin unless ``strict``.
    """
    if abc is None:
        if lam3 is None:
            raise ValueError("need lam3 or abc")
        abc = abc_from_lambda_triple(lam1, lam2, lam3)
    wx, wy, _ = oracle.grad(0.0, 0.0, 0.0)
    Q = complex(Y.dY(np.array(0.0)) * abc.B * wy / (abc.A * wx))
    if abs(Q - 1) <= 1e-12:
        if strict:
            raise QEqualsOne("Q = 1: the condition's denominator vanishes")
        return ConditionReport(True, float("inf"), Q, float("inf"))
    lhs = float(abs((Q * lam1 - lam2) / (Q - 1)))
    return ConditionReport(lhs > radius, lhs, Q, lhs - radius)


def reconstruct(sg: SampledGluing, lam1, lam2, lam3, Y: TransversalCurve, psi: Callable,
                grid: Grid3, tol: float = constants.NEWTON_TOL,
                max_iters: int = constants.NEWTON_MAX_ITERS, jobs: int = 1) -> ScalarField3:
    """``w_rec(x, y, z) = psi(w~(x, phi2(y), z))`` with ``w~`` the wave solution of ``sg``."""
    xs, ys, zs = grid.axes()
    ys2 = Y.inverse(ys)
    values, codes = sweep_axes(sg, lam1, lam2, lam3, xs, ys2, zs, N=sg.N, tol=tol,
                               max_iters=max_iters, jobs=jobs)
    ok = codes == ""
    out = np.full(values.shape, np.nan + 1j * np.nan)
    out[ok] = psi(values[ok])
    return ScalarField3(out, grid, holes_from_codes(codes), {"reconstructed": True})
