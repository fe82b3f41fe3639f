"""Lagrange factors and the scaffolded gluing function.

Prescribing ``sigma_+(lam_l) = a_l`` at inner nodes and ``sigma_-(mu_l) = b_l``
at outer nodes turns a Riemann problem of index ``1 - k - m`` into an
unconstrained one of index 1.  The substitution is

    sigma_+ = s_+ F_+ + sum_l a_l F_{+,l}
    sigma_- = s_- F_- + sum_l b_l F_{-,l}

and the new unknowns ``(s_+, s_-)`` solve ``s_- = G(lam, s_+)`` with the
scaffolded gluing ``G`` built here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constants
from .annulus import circle_points
from .errors import (
    DuplicateNodes,
    FMinusNearZero,
    LambdaZero,
    NodePlacement,
    TArgumentOutOfDisk,
)


def _check_distinct(nodes):
    nodes = np.asarray(nodes, dtype=complex)
    diff = np.abs(nodes[:, None] - nodes[None, :]) + np.eye(nodes.size)
    if nodes.size and np.min(diff) == 0.0:
        raise DuplicateNodes(f"nodes are not distinct: {nodes}")
    return nodes


def lagrange_basis(nodes, l: int, lam):
    """``prod_{j != l} (lam - n_j) / prod_{j != l} (n_l - n_j)``."""
    nodes = _check_distinct(nodes)
    if not 0 <= l < nodes.size:
        raise IndexError(f"node index {l} out of range")
    lam = np.asarray(lam, dtype=complex)
    others = np.delete(nodes, l)
    num = np.prod(lam[..., None] - others, axis=-1)
    den = np.prod(nodes[l] - others)
    return num / den


@dataclass(frozen=True)
class NodeSet:
    inner: tuple = ()
    outer: tuple = ()

    def __post_init__(self):
        inner = tuple(complex(v) for v in self.inner)
        outer = tuple(complex(v) for v in self.outer)
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "outer", outer)
        _check_distinct(inner + outer)
        if any(v == 0 for v in inner + outer):
            raise NodePlacement("nodes must be nonzero")
        if any(abs(v) >= 1 for v in inner):
            raise NodePlacement(f"inner nodes must satisfy 0 < |lam| < 1: {inner}")
        if any(abs(v) <= 1 for v in outer):
            raise NodePlacement(f"outer nodes must satisfy |mu| > 1: {outer}")

    @property
    def k(self) -> int:
        return len(self.inner)

    @property
    def m(self) -> int:
        return len(self.outer)

    def clearance(self) -> float:
        """Smallest distance from a node to the unit circle."""
        d = [abs(abs(v) - 1) for v in self.inner + self.outer]
        return min(d) if d else np.inf


def scaffold_factors(nodes: NodeSet, lam):
    """``(F_+, [F_{+,l}], F_-, [F_{-,l}])`` at ``lam`` (arrays broadcast over lam)."""
    lam = np.asarray(lam, dtype=complex)
    if nodes.m and np.any(lam == 0):
        # F_- has a pole of order m at 0; without outer nodes every factor is a polynomial
        raise LambdaZero("with outer nodes the factors need nonzero lam")
    inner0 = (0j,) + nodes.inner
    f_plus = lagrange_basis(inner0, 0, lam)
    f_plus_l = [lagrange_basis(inner0, l, lam) for l in range(1, len(inner0))]
    m = nodes.m
    outer = np.asarray(nodes.outer, dtype=complex)
    f_minus = np.prod(lam[..., None] - outer, axis=-1) / lam**m
    f_minus_l = [
        lagrange_basis(outer, l, lam) * outer[l] ** (m - 1) / lam ** (m - 1) for l in range(m)
    ]
    return f_plus, f_plus_l, f_minus, f_minus_l


class ScaffoldedGluing:
    """The scaffolded gluing ``G(lam, t)`` for a base gluing, nodes and values.

    ``inner_values`` has shape ``(k,)`` for one problem or ``(P, k)`` for a batch of
    P problems sharing base and nodes (same for ``outer_values`` with m).
    """

    def __init__(self, base, nodes: NodeSet, inner_values=(), outer_values=(),
                 N: int = constants.DEFAULT_N, clearance: float = constants.NODE_CLEARANCE,
                 budget: float = constants.INNER_BUDGET, check: bool = True):
        self.base = base
        self.nodes = nodes
        self.inner_values = np.asarray(inner_values, dtype=complex)
        self.outer_values = np.asarray(outer_values, dtype=complex)
        if self.inner_values.shape[-1:] != (nodes.k,) and not (nodes.k == 0 and self.inner_values.size == 0):
            raise ValueError(f"expected {nodes.k} inner values")
        if self.outer_values.shape[-1:] != (nodes.m,) and not (nodes.m == 0 and self.outer_values.size == 0):
            raise ValueError(f"expected {nodes.m} outer values")
        self._cache = {}
        if check:
            if nodes.clearance() < clearance:
                raise NodePlacement(
                    f"a node lies within {clearance:g} of the unit circle (clearance {nodes.clearance():.3g})"
                )
            lam = circle_points(N)
            shift = self._shift(lam)
            if np.any(np.abs(shift) >= budget * base.delta):
                raise TArgumentOutOfDisk(
                    "inner values push t~ outside the base t-disk on the circle"
                )

    # factors are cached per lam array (the solver always passes the same samples)
    def _factors(self, lam):
        key = (lam.shape, lam.tobytes()) if isinstance(lam, np.ndarray) else None
        if key is not None and key in self._cache:
            return self._cache[key]
        f = scaffold_factors(self.nodes, lam)
        if key is not None:
            self._cache = {key: f}
        return f

    def _shift(self, lam):
        _, fpl, _, _ = self._factors(lam)
        out = 0j
        for l, f in enumerate(fpl):
            out = out + self.inner_values[..., l, None] * f
        return out

    def _outer_sum(self, lam):
        _, _, _, fml = self._factors(lam)
        out = 0j
        for l, f in enumerate(fml):
            out = out + self.outer_values[..., l, None] * f
        return out

    def t_tilde(self, lam, t):
        fp, _, _, _ = self._factors(lam)
        return t * fp + self._shift(lam)

    def _f_minus(self, lam):
        fm = self._factors(lam)[2]
        if np.any(np.abs(fm) < constants.F_MINUS_FLOOR):
            raise FMinusNearZero("an outer node touches the evaluation contour")
        return fm

    @property
    def delta(self) -> float:
        return self.base.delta

    @property
    def epsilon(self) -> float:
        return self.base.epsilon

    zero_preserving = False
    kind = "scaffold"

    def t_ok(self, lam, t):
        return self.base.t_ok(lam, self.t_tilde(lam, t))

    def eval(self, lam, t):
        lam = np.asarray(lam, dtype=complex)
        fm = self._f_minus(lam)
        return (self.base.eval(lam, self.t_tilde(lam, t)) - self._outer_sum(lam)) / fm

    def dt(self, lam, t):
        lam = np.asarray(lam, dtype=complex)
        fp, _, _, _ = self._factors(lam)
        fm = self._f_minus(lam)
        return self.base.dt(lam, self.t_tilde(lam, t)) * fp / fm

    def dkappa(self, lam, t):
        """Derivative along the path that scales all node values by kappa (at kappa=1)."""
        lam = np.asarray(lam, dtype=complex)
        fm = self._f_minus(lam)
        return (self.base.dt(lam, self.t_tilde(lam, t)) * self._shift(lam)
                - self._outer_sum(lam)) / fm

    def scaled(self, kappa) -> "ScaffoldedGluing":
        return ScaffoldedGluing(self.base, self.nodes, kappa * self.inner_values,
                                kappa * self.outer_values, check=False)

    # reassembly of the original (unscaffolded) pair
    def sigma_plus_at(self, s_plus_taylor, lam):
        """``sigma_+(lam)`` from the scaffolded ``s_+`` evaluated at ``lam`` (inside)."""
        fp, fpl, _, _ = scaffold_factors(self.nodes, lam)
        out = s_plus_taylor * fp
        for l, f in enumerate(fpl):
            out = out + self.inner_values[..., l] * f
        return out

    def sigma_minus_at(self, s_minus_laurent, mu):
        """``sigma_-(mu)`` from the scaffolded ``s_-`` evaluated at ``mu`` (outside)."""
        _, _, fm, fml = scaffold_factors(self.nodes, mu)
        out = s_minus_laurent * fm
        for l, f in enumerate(fml):
            out = out + self.outer_values[..., l] * f
        return out


class ScaffoldPath:
    """The homotopy ``kappa -> G`` with all node values scaled by ``kappa``."""

    def __init__(self, scaffold: ScaffoldedGluing):
        self.scaffold = scaffold

    def at(self, kappa) -> ScaffoldedGluing:
        return self.scaffold.scaled(kappa)

    def dkappa(self, kappa, lam, t):
        # d/dkappa of G_kappa: F_-^{-1} (g_t(lam, t~) * shift - outer_sum); shift, outer_sum linear in kappa
        g = self.at(kappa)
        lam = np.asarray(lam, dtype=complex)
        fm = g._f_minus(lam)
        s = self.scaffold
        return (g.base.dt(lam, g.t_tilde(lam, t)) * s._shift(lam) - s._outer_sum(lam)) / fm


def wave_scaffold(g, lam1, lam2, lam3, x, y, z, **kwargs) -> ScaffoldedGluing:
    """``g_{x,y,z}``: nodes ``{lam1, lam2}`` inside, ``{lam3}`` outside, values (x, y) and z.

    ``x, y, z`` may be arrays of equal shape ``(P,)`` to build a batch.
    """
    if not (abs(lam1) < 1 and abs(lam2) < 1 and abs(lam3) > 1):
        raise NodePlacement(f"need |lam1|, |lam2| < 1 < |lam3|, got {lam1}, {lam2}, {lam3}")
    nodes = NodeSet((lam1, lam2), (lam3,))
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (x, y, z)))
    inner = np.stack([x, y], axis=-1)
    outer = z[..., None]
    return ScaffoldedGluing(g, nodes, inner, outer, **kwargs)
