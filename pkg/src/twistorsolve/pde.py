"""The (A,B,C)-equation ``A wx wyz + B wy wxz + C wz wxy = 0``.

Coefficient algebra, the spectral-parameter maps relating (A, B, C) to points
of the projective line, and finite-difference residual operators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CoincidentPoints,
    DegenerateLambdas,
    GridTooSmall,
    InvalidTriple,
    LambdaContainsZeroOrInfinity,
    RatioDegenerate,
)
from .fields import Grid3, ScalarField3


class _Infinity:
    """The point at infinity of the projective line."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def is_infinite(p) -> bool:
    return p is INFINITY


def _homog(p):
    """Homogeneous coordinates ``[p : 1]`` or ``[1 : 0]``."""
    return (1.0 + 0j, 0j) if p is INFINITY else (complex(p), 1.0 + 0j)


def _bracket(p, q):
    (pu, pv), (qu, qv) = _homog(p), _homog(q)
    return pu * qv - qu * pv


def _from_homog(u, v, scale=1.0):
    if abs(v) <= 1e-15 * max(abs(u), scale):
        return INFINITY
    return u / v


@dataclass(frozen=True)
class ABCTriple:
    A: complex
    B: complex
    C: complex

    def __post_init__(self):
        A, B, C = complex(self.A), complex(self.B), complex(self.C)
        for name, v in zip("ABC", (A, B, C)):
            if v == 0:
                raise InvalidTriple(f"{name} = 0")
        scale = max(abs(A), abs(B), abs(C))
        if abs(A + B + C) > 1e-14 * scale:
            raise InvalidTriple(f"A + B + C = {A + B + C:.3g}, need 0")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    def as_tuple(self):
        return self.A, self.B, self.C

    def scaled(self, c) -> "ABCTriple":
        return ABCTriple(c * self.A, c * self.B, c * self.C)

    def proportional_to(self, other: "ABCTriple", tol: float = 1e-12) -> bool:
        a, b = np.array(self.as_tuple()), np.array(other.as_tuple())
        k = b[0] / a[0]
        return bool(np.all(np.abs(b - k * a) <= tol * np.max(np.abs(b))))


def abc_from_lambda_triple(lam1, lam2, lam3) -> ABCTriple:
    """``A = l1(l2 - l3)``, ``B = l2(l3 - l1)``, ``C = l3(l1 - l2)``."""
    lams = [complex(v) for v in (lam1, lam2, lam3)]
    if any(v == 0 for v in lams) or not all(np.isfinite(v) for v in lams):
        raise DegenerateLambdas("the lambdas must be finite and nonzero")
    l1, l2, l3 = lams
    if l1 == l2 or l2 == l3 or l1 == l3:
        raise DegenerateLambdas(f"the lambdas must be distinct: {lams}")
    A = l1 * (l2 - l3)
    B = l2 * (l3 - l1)
    C = -(A + B)  # equals l3 (l1 - l2); written this way A + B + C = 0 holds exactly
    return ABCTriple(A, B, C)


def _check_distinct(*pts):
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if _bracket(pts[i], pts[j]) == 0:
                raise CoincidentPoints(f"points {i} and {j} coincide: {pts[i]!r}")


def cross_ratio(a, b, c, d) -> complex:
    """``(a:b:c:d) = ((d-a)/(d-c)) * ((b-c)/(b-a))``; any one point may be INFINITY."""
    _check_distinct(a, b, c, d)
    return (_bracket(d, a) / _bracket(d, c)) * (_bracket(b, c) / _bracket(b, a))


def lambda4_from_abc(lam1, lam2, lam3, abc: ABCTriple):
    """The point ``l4`` with ``(l1:l2:l3:l4) = -A/C``."""
    _check_distinct(lam1, lam2, lam3)
    r = -abc.A / abc.C
    scale = max(1.0, abs(r))
    if abs(r) < 1e-14 or abs(r - 1) < 1e-14 * scale:
        raise RatioDegenerate(f"-A/C = {r} is 0, 1 or infinite")
    # (d-a)(b-c) = r (d-c)(b-a) in homogeneous brackets, linear in d
    X, Y = _bracket(lam2, lam3), _bracket(lam2, lam1)
    (au, av), (cu, cv) = _homog(lam1), _homog(lam3)
    u = au * X - r * cu * Y
    v = av * X - r * cv * Y
    return _from_homog(u, v, abs(u))


@dataclass(frozen=True)
class LambdaQuadruple:
    lam1: complex
    lam2: complex
    lam3: complex
    lam4: complex

    def __post_init__(self):
        _check_distinct(self.lam1, self.lam2, self.lam3, self.lam4)

    @property
    def lams(self):
        return (self.lam1, self.lam2, self.lam3, self.lam4)

    def _finite_nonzero(self):
        if any(p is INFINITY or p == 0 for p in self.lams):
            raise LambdaContainsZeroOrInfinity("needs 0 and infinity outside the quadruple")

    def mu(self, k: int) -> complex:
        """``mu_k = l4/l_k - 1`` (k = 1, 2, 3)."""
        self._finite_nonzero()
        return self.lam4 / self.lams[k - 1] - 1

    def nu(self, k: int, l: int) -> complex:
        """``nu_kl = l_k/(l4 - l_k) - l_l/(l4 - l_l)``."""
        self._finite_nonzero()
        lk, ll, l4 = self.lams[k - 1], self.lams[l - 1], self.lam4
        return lk / (l4 - lk) - ll / (l4 - ll)

    def nus(self):
        return self.nu(2, 3), self.nu(3, 1), self.nu(1, 2)


def veronese_p(lam, quad: LambdaQuadruple):
    """``p_i(lam) = (l4 - l_i)(lam - l_j)(lam - l_k)`` for (ijk) a permutation of (123)."""
    l1, l2, l3, l4 = quad.lams
    if l4 is INFINITY or lam is INFINITY:
        raise LambdaContainsZeroOrInfinity("lambda and l4 must be finite")
    lam = np.asarray(lam, dtype=complex)
    return (
        (l4 - l1) * (lam - l2) * (lam - l3),
        (l4 - l2) * (lam - l1) * (lam - l3),
        (l4 - l3) * (lam - l1) * (lam - l2),
    )


# derivatives ----------------------------------------------------------------

@dataclass(frozen=True)
class Derivs:
    """First and mixed second partials on a grid or at points."""

    wx: np.ndarray
    wy: np.ndarray
    wz: np.ndarray
    wxy: np.ndarray
    wxz: np.ndarray
    wyz: np.ndarray


def fd_derivatives(field: ScalarField3) -> Derivs:
    """Second-order central differences; the boundary layer is NaN."""
    g = field.grid
    if min(g.shape) < 3:
        raise GridTooSmall(f"need at least 3 points per axis, got {g.shape}")
    w = field.values
    hx, hy, hz = g.spacing
    c = (slice(1, -1),) * 3

    def shift(di, dj, dk):
        return w[1 + di: w.shape[0] - 1 + di or None,
                 1 + dj: w.shape[1] - 1 + dj or None,
                 1 + dk: w.shape[2] - 1 + dk or None]

    out = {}
    out["wx"] = (shift(1, 0, 0) - shift(-1, 0, 0)) / (2 * hx)
    out["wy"] = (shift(0, 1, 0) - shift(0, -1, 0)) / (2 * hy)
    out["wz"] = (shift(0, 0, 1) - shift(0, 0, -1)) / (2 * hz)
    out["wxy"] = (shift(1, 1, 0) - shift(1, -1, 0) - shift(-1, 1, 0) + shift(-1, -1, 0)) / (4 * hx * hy)
    out["wxz"] = (shift(1, 0, 1) - shift(1, 0, -1) - shift(-1, 0, 1) + shift(-1, 0, -1)) / (4 * hx * hz)
    out["wyz"] = (shift(0, 1, 1) - shift(0, 1, -1) - shift(0, -1, 1) + shift(0, -1, -1)) / (4 * hy * hz)
    full = {}
    for k, v in out.items():
        a = np.full(w.shape, np.nan + 1j * np.nan)
        a[c] = v
        full[k] = a
    return Derivs(**full)


def oracle_derivatives(oracle, grid: Grid3) -> Derivs:
    X, Y, Z = grid.mesh()
    wx, wy, wz = oracle.grad(X, Y, Z)
    H = oracle.hessian(X, Y, Z)
    return Derivs(wx, wy, wz, H["xy"], H["xz"], H["yz"])


def derivatives(w, grid: Grid3 | None = None, method: str = "auto") -> tuple[Derivs, Grid3]:
    """Partials of a field (always FD) or an oracle (analytic if available, else FD on ``grid``)."""
    if isinstance(w, ScalarField3):
        return fd_derivatives(w), w.grid
    if grid is None:
        raise ValueError("an oracle needs a grid")
    if method == "analytic" or (method == "auto" and getattr(w, "has_hessian", False)):
        return oracle_derivatives(w, grid), grid
    return fd_derivatives(w.sample(grid)), grid


@dataclass(frozen=True)
class ResidualReport:
    residual: ScalarField3
    max_abs: float
    scale: float

    @property
    def scaled(self) -> float:
        return self.max_abs / self.scale if self.scale > 0 else float(self.max_abs)

    def to_dict(self) -> dict:
        return {"max_abs": self.max_abs, "scale": self.scale, "scaled": self.scaled}


def _terms(d: Derivs, abc: ABCTriple):
    return abc.A * d.wx * d.wyz, abc.B * d.wy * d.wxz, abc.C * d.wz * d.wxy


def _report(res, terms, grid) -> ResidualReport:
    ok = np.isfinite(res)
    max_abs = float(np.max(np.abs(res[ok]))) if ok.any() else float("nan")
    scale = max(float(np.max(np.abs(t[ok]))) for t in terms) if ok.any() else float("nan")
    return ResidualReport(ScalarField3(res, grid), max_abs, scale)


def equation_residual(w, abc: ABCTriple, grid: Grid3 | None = None, method: str = "auto") -> ScalarField3:
    """``A wx wyz + B wy wxz + C wz wxy`` pointwise (NaN on the FD boundary ring)."""
    return residual_report(w, abc, grid, method).residual


def residual_report(w, abc: ABCTriple, grid: Grid3 | None = None, method: str = "auto") -> ResidualReport:
    """Residual with its max-norm scaled by ``max(|A wx wyz|, |B wy wxz|, |C wz wxy|)``."""
    d, grid = derivatives(w, grid, method)
    terms = _terms(d, abc)
    return _report(sum(terms), terms, grid)


def frobenius_residual(w, quad: LambdaQuadruple, point) -> complex:
    """``nu23 wx wyz + nu31 wy wxz + nu12 wz wxy`` at a point, from analytic derivatives."""
    x, y, z = point
    wx, wy, wz = w.grad(x, y, z)
    H = w.hessian(x, y, z)
    n23, n31, n12 = quad.nus()
    return complex(n23 * wx * H["yz"] + n31 * wy * H["xz"] + n12 * wz * H["xy"])


def omega_wedge_domega(w, quad: LambdaQuadruple, lam, point) -> complex:
    """``omega_lam ^ d omega_lam / (dx dy dz)`` with ``omega_lam = p1 wx dx + p2 wy dy + p3 wz dz``."""
    p1, p2, p3 = veronese_p(lam, quad)
    x, y, z = point
    wx, wy, wz = w.grad(x, y, z)
    H = w.hessian(x, y, z)
    return complex(p1 * (p3 - p2) * wx * H["yz"] + p2 * (p1 - p3) * wy * H["xz"]
                   + p3 * (p2 - p1) * wz * H["xy"])


def linearization_residual(wbar, w, abc: ABCTriple, grid: Grid3 | None = None,
                           method: str = "auto") -> ScalarField3:
    """The linearized operator ``l_wbar`` applied to ``w``."""
    return linearization_report(wbar, w, abc, grid, method).residual


def linearization_report(wbar, w, abc: ABCTriple, grid: Grid3 | None = None,
                         method: str = "auto") -> ResidualReport:
    db, grid = derivatives(wbar, grid, method)
    d, _ = derivatives(w, grid, method)
    A, B, C = abc.as_tuple()
    terms = (A * db.wx * d.wyz, B * db.wy * d.wxz, C * db.wz * d.wxy,
             A * db.wyz * d.wx, B * db.wxz * d.wy, C * db.wxy * d.wz)
    return _report(sum(terms), terms, grid)


def principal_symbol(grad_wbar, covector, abc: ABCTriple):
    """``A wbar_x eta zeta + B wbar_y xi zeta + C wbar_z xi eta`` (arrays broadcast).

    ``grad_wbar`` is ``(wx, wy, wz)``; pass ``oracle.grad(*point)`` for a single point.
    """
    wx, wy, wz = grad_wbar
    xi, eta, zeta = covector
    return abc.A * wx * eta * zeta + abc.B * wy * xi * zeta + abc.C * wz * xi * eta


def symbol_report(grad_wbar, covector, abc: ABCTriple, grid: Grid3) -> ResidualReport:
    wx, wy, wz = grad_wbar
    xi, eta, zeta = covector
    terms = (abc.A * wx * eta * zeta, abc.B * wy * xi * zeta, abc.C * wz * xi * eta)
    return _report(sum(terms), terms, grid)


def observed_orders(hs, errs) -> np.ndarray:
    """Pairwise orders ``log(e_i/e_{i+1}) / log(h_i/h_{i+1})`` along a refinement sequence."""
    hs, errs = np.asarray(hs, dtype=float), np.asarray(errs, dtype=float)
    return np.log(errs[:-1] / errs[1:]) / np.log(hs[:-1] / hs[1:])
