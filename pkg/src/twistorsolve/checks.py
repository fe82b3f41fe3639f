"""Invariant checks shared by ``twistorsolve verify`` and the test-suite helpers.

Each check returns a :class:`Check` record; none of them raise on failure.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .annulus import CircleFunction, _split_modes, _to_modes, mult_split, winding_index
from .fields import Grid3
from .gluing import power_gluing
from .oracles import TANH, fixture, gauge_transform
from .pde import abc_from_lambda_triple, observed_orders, residual_report
from .riemann import wave_values

LAMBDAS = (0.1, 0.2, 10.0)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def random_trig_poly(rng, N: int, degree: int | None = None, scale: float = 1.0) -> CircleFunction:
    """Random Laurent polynomial with modes |k| <= degree (default N/2)."""
    d = N // 2 if degree is None else degree
    c = {k: scale * complex(*rng.normal(size=2)) / (1 + abs(k)) ** 2 for k in range(-d, d + 1)}
    return CircleFunction.from_modes(c, N)


def random_index0(rng, N: int, amp: float = 0.3) -> CircleFunction:
    """``exp`` of a small random trigonometric polynomial: index 0, nowhere zero."""
    p = random_trig_poly(rng, N, degree=6, scale=amp)
    return CircleFunction(np.exp(p.samples))


def splitting_identities(samples: int = 200, N: int = 32, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    add_err, mult_err = 0.0, 0.0
    for _ in range(samples):
        phi = random_trig_poly(rng, N)
        modes = _to_modes(phi.samples)
        hp, hm = _split_modes(modes)
        add_err = max(add_err, float(np.max(np.abs(np.roll(hp, 1) + hm - modes))))
        psi = random_index0(rng, N)
        mp, mm = mult_split(psi)
        rel = np.max(np.abs(mp.samples / mm.samples - psi.samples)) / np.max(np.abs(psi.samples))
        mult_err = max(mult_err, float(rel))
    return [Check("additive_split_exact", add_err, 0.0, add_err == 0.0),
            Check("multiplicative_split_rel", mult_err, 1e-11, mult_err <= 1e-11)]


def index_laws(N: int = 32, samples: int = 100, seed: int = 0) -> list[Check]:
    bad = sum(winding_index(CircleFunction.monomial(k, N=N)) != k for k in range(-8, 9))
    rng = np.random.default_rng(seed)
    miss = 0
    for _ in range(samples):
        f, g = random_rational(rng, N), random_rational(rng, N)
        miss += winding_index(f * g) != winding_index(f) + winding_index(g)
    return [Check("monomial_index", float(bad), 0.0, bad == 0),
            Check("index_additivity_failures", float(miss), 0.0, miss == 0)]


def random_rational(rng, N: int) -> CircleFunction:
    """Product of linear factors ``(lam - a)^(+-1)`` with ``|a|`` kept away from 1."""
    factors = []
    for _ in range(rng.integers(1, 4)):
        r = rng.choice([rng.uniform(0.1, 0.6), rng.uniform(1.6, 4.0)])
        a = r * np.exp(2j * np.pi * rng.random())
        factors.append((a, rng.choice([-1, 1])))

    def f(lam):
        out = np.ones_like(lam)
        for a, e in factors:
            out = out * (lam - a) ** e
        return out

    return CircleFunction.from_function(f, N)


def linear_oracle_values(x, y, z, lams=LAMBDAS):
    """``p(0)`` for the quadratic ``p`` with ``p(l1) = x``, ``p(l2) = y``, ``p(l3)/l3^2 = z``."""
    l1, l2, l3 = lams
    x, y, z = np.broadcast_arrays(x, y, z)
    V = np.array([[1, l1, l1**2], [1, l2, l2**2], [1 / l3**2, 1 / l3, 1.0]], dtype=complex)
    rhs = np.stack([x.ravel(), y.ravel(), z.ravel()]).astype(complex)
    return np.linalg.solve(V, rhs)[0].reshape(x.shape)


def linear_oracle(points: int = 50, seed: int = 0, N: int = 32) -> list[Check]:
    rng = np.random.default_rng(seed)
    x, y, z = rng.uniform(-0.02, 0.02, (3, points))
    res = wave_values(power_gluing(-2), *LAMBDAS, x, y, z, N)
    err = float(np.max(np.abs(res.values - linear_oracle_values(x, y, z))))
    iters = int(np.max(res.iters))
    return [Check("linear_oracle_err", err, 1e-10, err <= 1e-10),
            Check("linear_newton_iters", float(iters), 3.0, iters <= 3)]


def cross_method(points: int = 20, seed: int = 0, N: int = 32) -> list[Check]:
    rng = np.random.default_rng(seed)
    x, y, z = rng.uniform(-0.02, 0.02, (3, points))
    g = power_gluing(-2, quadratic=0.1)
    a = wave_values(g, *LAMBDAS, x, y, z, N)
    b = wave_values(g, *LAMBDAS, x, y, z, N, method="homotopy")
    err = float(np.max(np.abs(a.values - b.values)))
    return [Check("newton_vs_homotopy", err, 1e-8, err <= 1e-8)]


def fixture_convergence(radius: float = 0.05) -> list[Check]:
    abc = abc_from_lambda_triple(*LAMBDAS)
    w = gauge_transform(fixture("exp_reparam"), TANH)
    hs, errs = [], []
    for n in (9, 17, 33):
        g = Grid3.box(radius, n)
        hs.append(g.spacing[0])
        errs.append(residual_report(w, abc, g, method="fd").scaled)
    order = float(np.min(observed_orders(hs, errs)))
    return [Check("fixture_fd_order", order, 1.8, order >= 1.8)]


def run_all(seed: int = 0, samples: int = 20) -> list[Check]:
    out = []
    out += splitting_identities(samples=max(samples, 1), seed=seed)
    out += index_laws(samples=max(samples, 1), seed=seed)
    out += linear_oracle(seed=seed)
    out += cross_method(seed=seed)
    out += fixture_convergence()
    return out
