"""Backlund-Darboux transform between (A,B,C)-equations.

For a nondegenerate solution ``w`` of the source equation, the target solution
``v`` has gradient proportional to ``(alpha wx, beta wy, gamma wz)`` with
``alpha = A/A~`` and so on.  ``v`` is built leaf by leaf: the level set of ``v``
through a point is traced back to the x-axis, and the gauge ``v(x, 0, 0) = x``
makes the terminal x-coordinate the value.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import constants
from .errors import HypothesisViolated, LeftDomain, NondegeneracyLost, ODEStepFailure, ProportionalTriples
from .fields import Grid3, ScalarField3
from .ode import integrate
from .pde import ABCTriple, Derivs, fd_derivatives, symbol_report

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BacklundCoefficients:
    alpha: complex
    beta: complex
    gamma: complex
    source: ABCTriple
    target: ABCTriple

    @property
    def distinct(self) -> bool:
        a, b, c = self.alpha, self.beta, self.gamma
        tol = 1e-12 * max(abs(a), abs(b), abs(c))
        return abs(a - b) > tol and abs(b - c) > tol and abs(a - c) > tol

    @property
    def all_equal(self) -> bool:
        a, b, c = self.alpha, self.beta, self.gamma
        tol = 1e-12 * max(abs(a), abs(b), abs(c))
        return abs(a - b) <= tol and abs(b - c) <= tol


def classify(source: ABCTriple, target: ABCTriple) -> str:
    """``"equal"`` (alpha = beta = gamma), ``"distinct"`` or ``"mixed"``."""
    c = BacklundCoefficients(source.A / target.A, source.B / target.B, source.C / target.C,
                             source, target)
    if c.all_equal:
        return "equal"
    return "distinct" if c.distinct else "mixed"


def coefficients(source: ABCTriple, target: ABCTriple) -> BacklundCoefficients:
    """``(alpha, beta, gamma) = (A/A~, B/B~, C/C~)``."""
    c = BacklundCoefficients(source.A / target.A, source.B / target.B, source.C / target.C,
                             source, target)
    if c.all_equal:
        raise ProportionalTriples("the triples are proportional: the transform is a gauge")
    scale = abs(source.A * target.B) + abs(target.A * source.B)
    if abs(source.A * target.B - target.A * source.B) <= 1e-12 * scale:
        raise HypothesisViolated("A B~ = A~ B")
    return c


def _stage(oracle, coeff: BacklundCoefficients, x0, fixed, moving0, axis: str, floor):
    """Move one coordinate to 0 along the leaf, holding the other fixed.

    ``axis`` is the moving coordinate (``"y"`` or ``"z"``); ``fixed`` the held one.
    Parameterized by ``s`` from 1 to 0 so that all points share one solve.
    """
    x0 = np.asarray(x0, dtype=complex).ravel()
    fixed = np.asarray(fixed, dtype=float).ravel()
    moving0 = np.asarray(moving0, dtype=float).ravel()
    k = coeff.beta if axis == "y" else coeff.gamma

    def rhs(s, x):
        m = s * moving0
        if axis == "y":
            wx, wy, _ = oracle.grad(x, m, fixed)
            wm = wy
        else:
            wx, _, wz = oracle.grad(x, fixed, m)
            wm = wz
        if np.min(np.abs(wx)) < floor:
            raise NondegeneracyLost("wx vanishes along a leaf")
        return moving0 * (-k * wm / (coeff.alpha * wx))

    if not np.any(moving0):
        return x0
    try:
        sol = integrate(rhs, (1.0, 0.0), x0)
    except ODEStepFailure as exc:
        raise LeftDomain(f"leaf trace failed: {exc}") from exc
    return sol.y[:, -1]


def leaf_trace(oracle, coeff: BacklundCoefficients, x, y, z, order: str = "zy",
               floor: float = constants.NONDEGENERACY_FLOOR):
    """``v`` at the given points (arrays of equal shape) in the gauge ``v(x, 0, 0) = x``.

    ``order="zy"`` first runs z to 0 at fixed y, then y to 0 in the plane z = 0;
    ``order="yz"`` is the other path, used to certify integrability.
    """
    x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, z)))
    shape = x.shape
    if order == "zy":
        x1 = _stage(oracle, coeff, x, y, z, "z", floor)
        out = _stage(oracle, coeff, x1, np.zeros(x.size), y, "y", floor)
    elif order == "yz":
        x1 = _stage(oracle, coeff, x, z, y, "y", floor)
        out = _stage(oracle, coeff, x1, np.zeros(x.size), z, "z", floor)
    else:
        raise ValueError(f"unknown order {order!r}")
    return out.reshape(shape) if shape else complex(out[0])


def transform(oracle, source: ABCTriple, target: ABCTriple, grid: Grid3, order: str = "zy",
              jobs: int = 1) -> ScalarField3:
    """``v`` sampled on a grid by leaf tracing (one vectorised solve per x-slab)."""
    coeff = coefficients(source, target)
    xs, ys, zs = grid.axes()

    def slab(i):
        Y, Z = np.meshgrid(ys, zs, indexing="ij")
        try:
            return leaf_trace(oracle, coeff, np.full(Y.shape, xs[i]), Y, Z, order), {}
        except (NondegeneracyLost, LeftDomain):
            pass
        # isolate the failing points one by one
        vals = np.full(Y.shape, np.nan + 1j * np.nan)
        codes = {}
        for j, k in np.ndindex(Y.shape):
            try:
                vals[j, k] = leaf_trace(oracle, coeff, xs[i], Y[j, k], Z[j, k], order)
            except (NondegeneracyLost, LeftDomain) as exc:
                codes[(i, j, k)] = exc.code
        return vals, codes

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(slab, range(xs.size)))
    else:
        parts = [slab(i) for i in range(xs.size)]
    values = np.stack([p[0] for p in parts])
    holes = {}
    for _, codes in parts:
        holes.update(codes)
    if holes:
        log.warning("%d points failed in the leaf trace", len(holes))
    meta = {"alpha": repr(coeff.alpha), "beta": repr(coeff.beta), "gamma": repr(coeff.gamma),
            "gauge": "v(x,0,0)=x", "order": order}
    return ScalarField3(values, grid, holes, meta)


def _max(a, mask):
    a = np.abs(a[mask])
    return float(np.max(a)) if a.size else float("nan")


def verify_system(w, v: ScalarField3, source: ABCTriple, target: ABCTriple,
                  tol: float = 1e-6) -> dict:
    """Residuals of ``A B~ wx vy = A~ B wy vx`` and ``A C~ wx vz = A~ C wz vx``,
    and the 2x2 minors of ``[grad v; (alpha wx, beta wy, gamma wz)]``.

    ``w`` is a field on the same grid or an oracle (analytic first partials).
    Residuals are scaled max-norms over the interior.
    """
    dv = fd_derivatives(v)
    if isinstance(w, ScalarField3):
        dw = fd_derivatives(w)
    else:
        X, Y, Z = v.grid.mesh()
        wx, wy, wz = w.grad(X, Y, Z)
        dw = Derivs(wx, wy, wz, *(np.zeros_like(wx),) * 3)
    mask = v.grid.interior() & np.isfinite(dv.wx)
    A, B, C = source.as_tuple()
    At, Bt, Ct = target.as_tuple()
    t1, t2 = A * Bt * dw.wx * dv.wy, At * B * dw.wy * dv.wx
    t3, t4 = A * Ct * dw.wx * dv.wz, At * C * dw.wz * dv.wx
    r1 = _max(t1 - t2, mask) / max(_max(t1, mask), _max(t2, mask))
    r2 = _max(t3 - t4, mask) / max(_max(t3, mask), _max(t4, mask))
    alpha, beta, gamma = A / At, B / Bt, C / Ct
    u = (dv.wx, dv.wy, dv.wz)
    q = (alpha * dw.wx, beta * dw.wy, gamma * dw.wz)
    minors = [u[i] * q[j] - u[j] * q[i] for i, j in ((0, 1), (0, 2), (1, 2))]
    norms = np.sqrt(sum(np.abs(c) ** 2 for c in u)) * np.sqrt(sum(np.abs(c) ** 2 for c in q))
    with np.errstate(invalid="ignore", divide="ignore"):
        minor_ratio = max(_max(m / norms, mask) for m in minors)
    return {
        "system_residual_1": r1,
        "system_residual_2": r2,
        "max_minor_ratio": minor_ratio,
        "ok": bool(max(r1, r2, minor_ratio) <= tol),
    }


def eikonal_residual(w, v: ScalarField3, source: ABCTriple):
    """``principal_symbol(w, grad v)`` for the source equation: report over the interior."""
    dv = fd_derivatives(v)
    if isinstance(w, ScalarField3):
        d = fd_derivatives(w)
        grad_w = (d.wx, d.wy, d.wz)
    else:
        grad_w = w.grad(*v.grid.mesh())
    return symbol_report(grad_w, (dv.wx, dv.wy, dv.wz), source, v.grid)
