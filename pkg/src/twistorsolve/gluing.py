"""Gluing functions g(lam, t) on an annulus times a t-disk.

Anything with ``eval(lam, t)``, ``dt(lam, t)``, ``delta``, ``epsilon`` and
``t_ok(lam, t)`` works as a gluing function; :class:`GluingFunction` wraps a
pair of closed-form callables and :class:`~twistorsolve.inverse.SampledGluing`
is the interpolated kind.  ``lam`` is broadcast against ``t`` so a batch of
problems ``t.shape == (P, 2N)`` can be evaluated in one call.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class GluingFunction:
    func: Callable
    dfunc: Callable
    epsilon: float = 0.5
    delta: float = np.inf
    zero_preserving: bool = False
    kind: str = "closed-form"
    name: str = ""
    params: dict = field(default_factory=dict)

    def eval(self, lam, t):
        return self.func(lam, t)

    def dt(self, lam, t):
        return self.dfunc(lam, t)

    def t_ok(self, lam, t):
        return np.abs(t) < self.delta

    def check_derivative(self, **kwargs) -> float:
        return check_derivative(self, **kwargs)


def check_derivative(g, n_probes: int = 16, h: float = 1e-5, seed: int = 0) -> float:
    """Largest relative mismatch between ``g.dt`` and a central difference of ``g.eval``."""
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.8, 1.25, n_probes)
    lam = r * np.exp(2j * np.pi * rng.random(n_probes))
    rad = min(g.delta, 1.0) * 0.5
    t = rad * rng.random(n_probes) * np.exp(2j * np.pi * rng.random(n_probes))
    fd = (g.eval(lam, t + h) - g.eval(lam, t - h)) / (2 * h)
    exact = g.dt(lam, t)
    return float(np.max(np.abs(fd - exact) / np.maximum(np.abs(exact), 1e-300)))


def power_gluing(power: int = -2, quadratic: complex = 0.0, cubic: complex = 0.0,
                 epsilon: float = 0.5) -> GluingFunction:
    """``g(lam, t) = lam**power * (t + quadratic*t**2 + cubic*t**3)``.

    ``power=-2`` gives the index ``-2`` family used for wave solutions; the
    polynomial in t stays invertible on ``|t| < delta`` (first critical point).
    """
    q, c = complex(quadratic), complex(cubic)

    def g(lam, t):
        return lam**power * (t + q * t**2 + c * t**3)

    def gt(lam, t):
        return lam**power * (1 + 2 * q * t + 3 * c * t**2)

    crit = np.roots([3 * c, 2 * q, 1]) if (q or c) else np.array([])
    delta = float(np.min(np.abs(crit))) if crit.size else np.inf
    return GluingFunction(
        g, gt, epsilon=epsilon, delta=delta, zero_preserving=True,
        name="power", params={"power": power, "quadratic": q, "cubic": c},
    )


def gluing_from_config(spec: dict) -> GluingFunction:
    """Closed-form gluing functions addressable from a JSON config."""
    kind = spec.get("kind", "linear")
    if kind == "linear":
        return power_gluing(-2)
    if kind == "polynomial":
        return power_gluing(int(spec.get("power", -2)), spec.get("quadratic", 0.0),
                            spec.get("cubic", 0.0))
    if kind == "modulated":
        return ModulatedGluing(spec.get("a", 0.1), spec.get("b", 0.05))
    raise ValueError(f"unknown gluing kind {kind!r}")


@dataclass(frozen=True)
class ModulatedGluing:
    """Nonlinear test gluing ``g(lam, t) = lam**-2 * (t + (a + b*lam) * t**2)``.

    The t-nonlinearity depends on lam, so the resulting wave solution is not a
    gauge transform of a linear one.
    """

    a: complex = 0.1
    b: complex = 0.05
    epsilon: float = 0.5
    zero_preserving: bool = True
    kind: str = "closed-form"

    @property
    def delta(self) -> float:
        # keep 1 + 2 (a + b lam) t away from 0 on the annulus
        return 0.5 / (abs(self.a) + abs(self.b) / self.epsilon)

    def eval(self, lam, t):
        return lam**-2 * (t + (self.a + self.b * lam) * t**2)

    def dt(self, lam, t):
        return lam**-2 * (1 + 2 * (self.a + self.b * lam) * t)

    def t_ok(self, lam, t):
        return np.abs(t) < self.delta

    def check_derivative(self, **kwargs) -> float:
        return check_derivative(self, **kwargs)

