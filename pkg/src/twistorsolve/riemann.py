"""Nonlinear Riemann problem ``sigma_-(lam) = g(lam, sigma_+(lam))`` on the unit circle.

Two solvers share the same linearised step.  At a state ``(s+, s-)`` with
``phi = dg/dt(lam, s+)`` of index 1, factor ``phi = lam * a+/a-``.  A
perturbation ``(d+, d-)`` with ``d- - phi*d+ = f`` is then read off from the
additive splitting ``a- * f = lam*h+ + h-`` as ``d+ = -h+/a+``, ``d- = h-/a-``.

* Newton uses ``f = g(lam, s+) - s-`` (the residual), which makes each step an
  exact solve of the linearised problem.
* The homotopy integrates ``f = dg_kappa/dkappa`` along a path of gluing
  functions from a known solution at kappa = 0.

Everything runs on arrays of shape ``(P, 2N)`` so a batch of P independent
problems (a row of grid points) is solved at once.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import constants, errors
from .annulus import (
    CircleFunction,
    _birkhoff,
    _h_split,
    _project_minus,
    _project_plus,
    _to_modes,
    _winding,
    circle_points,
    mode_numbers,
)
from .fields import Grid3, ScalarField3
from .scaffold import ScaffoldedGluing, ScaffoldPath, wave_scaffold

log = logging.getLogger(__name__)

_ERRORS = {
    cls.code: cls
    for cls in vars(errors).values()
    if isinstance(cls, type) and issubclass(cls, errors.TwistorError)
}


@dataclass(frozen=True)
class RiemannSolution:
    sigma_plus: CircleFunction
    sigma_minus: CircleFunction
    residual_norm: float
    newton_iters: int
    index: int = 1

    @property
    def value(self) -> complex:
        """The nonlinear Riemann transform ``sigma_+(0)``."""
        return self.sigma_plus.mode(0)


@dataclass
class BatchResult:
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    residual: np.ndarray
    iters: np.ndarray
    codes: np.ndarray
    index: np.ndarray = field(default=None)
    start: tuple = field(default=None)  # linearized start (s+, s-), kept for warm starts

    @property
    def ok(self) -> np.ndarray:
        return self.codes == ""

    @property
    def values(self) -> np.ndarray:
        """``sigma_+(0)`` per problem (NaN where the solve failed)."""
        v = _to_modes(self.sigma_plus)[..., 0]
        return np.where(self.ok, v, np.nan + 1j * np.nan)


def _tail_fat(samples, ratio=constants.TAIL_RATIO):
    N = samples.shape[-1] // 2
    a = np.abs(_to_modes(samples))
    tail = np.abs(mode_numbers(N)) >= constants.TAIL_START * N
    t = a[..., tail].sum(axis=-1)
    return (t > ratio * a.sum(axis=-1)) & (t > constants.TAIL_ABS_FLOOR)


def _linear_step(phi, forcing):
    """Solve ``d- - phi*d+ = forcing`` for index-1 ``phi``; returns (d+, d-, n, near_zero, coarse)."""
    n, ap, am, near_zero, coarse = _birkhoff(phi)
    hp, hm = _h_split(am * forcing)
    with np.errstate(all="ignore"):
        d_plus = _project_plus(-hp / ap)
        d_minus = _project_minus(hm / am)
    return d_plus, d_minus, n, near_zero, coarse


def linearized_start(sg: ScaffoldedGluing, N: int):
    """Solution of the scaffolded problem with the base gluing replaced by its
    linearization at t = 0.

    The node values enter the scaffold amplified by the Lagrange factors, so
    ``s_+ = 0`` puts t~ far from 0; this start keeps the original ``sigma_+``
    near the exact linear answer instead.
    """
    lam = circle_points(N)
    fp, _, _, _ = sg._factors(lam)
    fm = sg._f_minus(lam)
    g0 = sg.base.dt(lam, np.zeros_like(lam))
    forcing = (g0 * sg._shift(lam) - sg._outer_sum(lam)) / fm
    phi = np.broadcast_to(g0 * fp / fm, forcing.shape)
    with np.errstate(all="ignore"):
        d_plus, d_minus, _, _, _ = _linear_step(phi, forcing)
    return d_plus, d_minus


def newton_batch(g, N: int, sp0=None, sm0=None, tol: float = constants.NEWTON_TOL,
                 max_iters: int = constants.NEWTON_MAX_ITERS, batch_shape=None,
                 check_tail: bool = True) -> BatchResult:
    """Newton iteration for a batch of Riemann problems sharing the sample grid.

    Without a start, scaffolded problems begin at :func:`linearized_start` and
    anything else at 0.
    """
    lam = circle_points(N)
    M = 2 * N
    if sp0 is None and isinstance(g, ScaffoldedGluing):
        sp0, sm0 = linearized_start(g, N)
    if sp0 is None:
        sp = np.zeros(tuple(batch_shape or ()) + (M,), dtype=complex)
    else:
        sp = np.array(np.broadcast_to(sp0, tuple(batch_shape or np.shape(sp0)[:-1]) + (M,)),
                      dtype=complex)
    sm = np.zeros_like(sp) if sm0 is None else np.array(np.broadcast_to(sm0, sp.shape), dtype=complex)
    shape = sp.shape[:-1]
    codes = np.full(shape, "", dtype=object)
    done = np.zeros(shape, dtype=bool)
    iters = np.zeros(shape, dtype=int)
    residual = np.full(shape, np.inf)
    polished = np.zeros(shape, dtype=bool)

    def fail(mask, code):
        mask = mask & ~done
        codes[mask] = code
        done[mask] = True

    with np.errstate(all="ignore"):
        for it in range(max_iters + 1):
            fail(~np.all(g.t_ok(lam, sp), axis=-1), "LeftTDisk")
            R = g.eval(lam, sp) - sm
            res = np.max(np.abs(R), axis=-1)
            residual = np.where(done, residual, res)
            fail(~np.isfinite(res), "LeftTDisk")
            # one extra step after reaching tol: quadratic convergence takes the
            # error to rounding, which keeps finite differences of w clean
            converged = (res <= tol) & ~done
            done |= converged & (polished | (res == 0))
            polished |= converged
            if np.all(done):
                break
            if it == max_iters:
                fail(np.ones(shape, dtype=bool), "MaxItersExceeded")
                break
            dp, dm, n, near_zero, coarse = _linear_step(g.dt(lam, sp), R)
            fail(near_zero, "NearZeroOnCircle")
            fail(coarse, "PhaseJumpTooLarge")
            fail(n != 1, "IndexNotOne")
            step = ~done
            sp = np.where(step[..., None], sp + dp, sp)
            sm = np.where(step[..., None], sm + dm, sm)
            iters = np.where(step, iters + 1, iters)
        index, _, _ = _winding(g.dt(lam, sp))
    if check_tail:
        fail_mask = (codes == "") & _tail_fat(sp)
        codes[fail_mask] = "SpectralTailTooFat"
    return BatchResult(sp, sm, residual, iters, codes, index)


def _raise_for(code: str, detail: str = ""):
    raise _ERRORS.get(code, errors.TwistorError)(f"{code}{': ' if detail else ''}{detail}")


def _single(result: BatchResult) -> RiemannSolution:
    code = result.codes[()] if result.codes.shape == () else result.codes.reshape(-1)[0]
    if code:
        _raise_for(code, f"residual {float(np.ravel(result.residual)[0]):.3e}")
    sp = result.sigma_plus.reshape(-1, result.sigma_plus.shape[-1])[0]
    sm = result.sigma_minus.reshape(-1, result.sigma_minus.shape[-1])[0]
    return RiemannSolution(
        CircleFunction(sp), CircleFunction(sm),
        float(np.ravel(result.residual)[0]), int(np.ravel(result.iters)[0]),
        int(np.ravel(result.index)[0]),
    )


def solve_riemann_newton(g, N: int = constants.DEFAULT_N, tol: float = constants.NEWTON_TOL,
                         sigma0: CircleFunction | None = None,
                         sigma_minus0: CircleFunction | None = None,
                         max_iters: int = constants.NEWTON_MAX_ITERS) -> RiemannSolution:
    """Solve one Riemann problem by Newton's method from ``sigma0``.

    The default start is 0, or the linearized solution for a scaffolded gluing.
    """
    if sigma0 is not None:
        sp0 = sigma0.samples
        sm0 = None if sigma_minus0 is None else sigma_minus0.samples
    elif isinstance(g, ScaffoldedGluing):
        sp0, sm0 = linearized_start(g, N)
        sp0, sm0 = sp0.reshape(-1, 2 * N)[0], sm0.reshape(-1, 2 * N)[0]
    else:
        sp0, sm0 = np.zeros(2 * N, dtype=complex), None
    lam = circle_points(N)
    n, near_zero, coarse = _winding(g.dt(lam, sp0))
    if near_zero:
        raise errors.NearZeroOnCircle("dg/dt vanishes at a sample of the initial guess")
    if coarse:
        raise errors.PhaseJumpTooLarge("dg/dt is undersampled at the initial guess")
    if n != 1:
        raise errors.IndexNotOne(f"ind dg/dt(., sigma0) = {int(n)}, need 1")
    return _single(newton_batch(g, N, sp0, sm0, tol, max_iters))


def homotopy_batch(path, N: int, steps: int = constants.HOMOTOPY_STEPS, sp0=None, sm0=None,
                   tol: float = constants.NEWTON_TOL,
                   max_iters: int = constants.NEWTON_MAX_ITERS) -> BatchResult:
    """Integrate the solution along ``kappa in [0, 1]`` with classical RK4, then polish."""
    lam = circle_points(N)
    g0 = path.at(0.0)
    shape = np.shape(getattr(g0, "inner_values", np.zeros(1)))[:-1]
    sp = np.zeros(shape + (2 * N,), dtype=complex) if sp0 is None else np.array(sp0, dtype=complex)
    sm = np.zeros_like(sp) if sm0 is None else np.array(sm0, dtype=complex)
    codes = np.full(sp.shape[:-1], "", dtype=object)

    def velocity(kappa, sp):
        g = path.at(kappa)
        bad = ~np.all(g.t_ok(lam, sp), axis=-1)
        dp, dm, n, near_zero, coarse = _linear_step(g.dt(lam, sp), path.dkappa(kappa, lam, sp))
        bad |= near_zero | coarse | (n != 1)
        codes[bad & (codes == "")] = "PathLeftValidityRegion"
        return dp, dm

    h = 1.0 / steps
    with np.errstate(all="ignore"):
        for i in range(steps):
            k0 = i * h
            a1 = velocity(k0, sp)
            a2 = velocity(k0 + h / 2, sp + h / 2 * a1[0])
            a3 = velocity(k0 + h / 2, sp + h / 2 * a2[0])
            a4 = velocity(k0 + h, sp + h * a3[0])
            sp = sp + h / 6 * (a1[0] + 2 * a2[0] + 2 * a3[0] + a4[0])
            sm = sm + h / 6 * (a1[1] + 2 * a2[1] + 2 * a3[1] + a4[1])
    polished = newton_batch(path.at(1.0), N, sp, sm, tol, max_iters)
    polished.codes = np.where(codes != "", codes, polished.codes)
    return polished


def solve_riemann_homotopy(g_path, N: int = constants.DEFAULT_N,
                           steps: int = constants.HOMOTOPY_STEPS,
                           tol: float = constants.NEWTON_TOL,
                           max_iters: int = constants.NEWTON_MAX_ITERS) -> RiemannSolution:
    """Continuation from kappa = 0 (solution 0) to kappa = 1 plus one Newton polish.

    ``g_path`` needs ``at(kappa)`` returning a gluing function and
    ``dkappa(kappa, lam, t)``; a :class:`ScaffoldedGluing` is promoted to the path
    that scales its node values.
    """
    if isinstance(g_path, ScaffoldedGluing):
        g_path = ScaffoldPath(g_path)
    return _single(homotopy_batch(g_path, N, steps, tol=tol, max_iters=max_iters))


def riemann_transform(g, method: str = "newton", N: int = constants.DEFAULT_N,
                      tol: float = constants.NEWTON_TOL, **kwargs) -> complex:
    """The nonlinear Riemann transform ``sigma_+(0)``."""
    if method == "newton":
        return solve_riemann_newton(g, N, tol, **kwargs).value
    if method == "homotopy":
        return solve_riemann_homotopy(g, N, tol=tol, **kwargs).value
    raise ValueError(f"unknown method {method!r}")


class MobiusComposed:
    """``g(M(lam), t)`` with ``M(lam) = (lam - mu)/(mu*lam - 1)``, so that
    the transform of the composed gluing is ``sigma_+(mu)``."""

    def __init__(self, g, mu):
        self.g, self.mu = g, complex(mu)
        self.delta, self.epsilon = g.delta, g.epsilon

    def _m(self, lam):
        return (lam - self.mu) / (self.mu * lam - 1)

    def eval(self, lam, t):
        return self.g.eval(self._m(np.asarray(lam)), t)

    def dt(self, lam, t):
        return self.g.dt(self._m(np.asarray(lam)), t)

    def t_ok(self, lam, t):
        return self.g.t_ok(self._m(np.asarray(lam)), t)


def sigma_plus_by_mobius(g, mu, N: int = constants.DEFAULT_N, tol: float = constants.NEWTON_TOL):
    """Cross-check of interior values: ``sigma_+(mu)`` as a transform of a recomposed gluing."""
    return riemann_transform(MobiusComposed(g, mu), "newton", N, tol)


def gluing_index_at_zero(g, N: int = constants.DEFAULT_N) -> int:
    lam = circle_points(N)
    n, near_zero, coarse = _winding(g.dt(lam, np.zeros_like(lam)))
    if near_zero:
        raise errors.NearZeroOnCircle("dg/dt(., 0) vanishes on the circle")
    if coarse:
        raise errors.PhaseJumpTooLarge("dg/dt(., 0) is undersampled")
    return int(n)


def wave_values(g, lam1, lam2, lam3, x, y, z, N: int = constants.DEFAULT_N,
                tol: float = constants.NEWTON_TOL, max_iters: int = constants.NEWTON_MAX_ITERS,
                method: str = "newton", warm: BatchResult | None = None,
                steps: int = constants.HOMOTOPY_STEPS) -> BatchResult:
    """``w = R(g_{x,y,z})`` for a batch of points (1-D arrays of equal length)."""
    x, y, z = (np.atleast_1d(np.asarray(v, dtype=complex)) for v in (x, y, z))
    sg = wave_scaffold(g, lam1, lam2, lam3, x, y, z, N=N, check=False)
    if method == "homotopy":
        return homotopy_batch(ScaffoldPath(sg), N, steps, tol=tol, max_iters=max_iters)
    lp, lm = linearized_start(sg, N)
    sp0, sm0 = lp, lm
    if warm is not None and warm.start is not None:
        # carry over the neighbour's nonlinear correction, not its scaffolded unknowns:
        # those include the neighbour's amplified node shift
        # points with all node values 0 keep the exact zero start
        ok = (warm.ok & ((x != 0) | (y != 0) | (z != 0)))[..., None]
        sp0 = lp + np.where(ok, warm.sigma_plus - warm.start[0], 0.0)
        sm0 = lm + np.where(ok, warm.sigma_minus - warm.start[1], 0.0)
    res = newton_batch(sg, N, sp0, sm0, tol, max_iters, batch_shape=x.shape)
    res.start = (lp, lm)
    return res


def check_wave_gluing(g, lam1, lam2, lam3, N):
    if not (abs(lam1) < 1 and abs(lam2) < 1 and abs(lam3) > 1):
        raise errors.NodePlacement(f"need |lam1|, |lam2| < 1 < |lam3|, got {lam1}, {lam2}, {lam3}")
    wave_scaffold(g, lam1, lam2, lam3, 0.0, 0.0, 0.0, N=N)  # node clearance
    lam = circle_points(N)
    if np.max(np.abs(g.eval(lam, np.zeros_like(lam)))) > 1e-14:
        raise errors.TwistorError("gluing function must satisfy g(lam, 0) = 0")
    n = gluing_index_at_zero(g, N)
    if n != -2:
        raise errors.GluingIndexMismatch(f"ind dg/dt(., 0) = {n}, need -2")


def sweep_axes(g, lam1, lam2, lam3, xs, ys, zs, N: int = constants.DEFAULT_N,
               tol: float = constants.NEWTON_TOL, max_iters: int = constants.NEWTON_MAX_ITERS,
               method: str = "newton", jobs: int = 1):
    """Values and failure codes of ``R(g_{x,y,z})`` on the tensor grid ``xs x ys x zs``.

    The grid is cut into x-slabs (fixed, independent of ``jobs``).  Inside a slab
    each y-row is solved as one batch over z, warm-started from the previous row.
    """
    xs, ys, zs = (np.atleast_1d(np.asarray(a, dtype=complex)) for a in (xs, ys, zs))

    def slab(i):
        vals = np.empty((ys.size, zs.size), dtype=complex)
        codes = np.empty((ys.size, zs.size), dtype=object)
        warm = None
        for j, yv in enumerate(ys):
            res = wave_values(g, lam1, lam2, lam3, np.full(zs.size, xs[i]),
                              np.full(zs.size, yv), zs, N, tol, max_iters, method, warm)
            vals[j] = res.values
            codes[j] = res.codes
            warm = res
        return vals, codes

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(slab, range(xs.size)))
    else:
        parts = [slab(i) for i in range(xs.size)]
    return np.stack([p[0] for p in parts]), np.stack([p[1] for p in parts])


def holes_from_codes(codes) -> dict:
    return {tuple(int(v) for v in idx): str(codes[idx]) for idx in zip(*np.nonzero(codes != ""))}


def wave_solution(g, lam1, lam2, lam3, grid: Grid3, N: int = constants.DEFAULT_N,
                  tol: float = constants.NEWTON_TOL, max_iters: int = constants.NEWTON_MAX_ITERS,
                  method: str = "newton", jobs: int = 1) -> ScalarField3:
    """Sample ``w(x, y, z) = R(g_{x,y,z})`` on a grid.

    Failed points become NaN holes with their error code in ``field.holes``.
    """
    check_wave_gluing(g, lam1, lam2, lam3, N)
    values, codes = sweep_axes(g, lam1, lam2, lam3, *grid.axes(), N=N, tol=tol,
                               max_iters=max_iters, method=method, jobs=jobs)
    holes = holes_from_codes(codes)
    if holes:
        log.warning("%d grid points failed to solve", len(holes))
    return ScalarField3(values, grid, holes=holes,
                        meta={"lambdas": [repr(complex(v)) for v in (lam1, lam2, lam3)], "N": N})
