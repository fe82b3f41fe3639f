import numpy as np
import pytest

from twistorsolve.annulus import CircleFunction, circle_points, winding_index
from twistorsolve.checks import linear_oracle_values
from twistorsolve.errors import GluingIndexMismatch, IndexNotOne, MaxItersExceeded
from twistorsolve.fields import Grid3
from twistorsolve.gluing import GluingFunction, ModulatedGluing, power_gluing
from twistorsolve.riemann import (ScaffoldPath, riemann_transform, sigma_plus_by_mobius,
                                  solve_riemann_homotopy, solve_riemann_newton, wave_solution,
                                  wave_values)
from twistorsolve.scaffold import wave_scaffold

from conftest import LAMBDAS

N = 32


def points(rng, n, r=0.02):
    return rng.uniform(-r, r, (3, n))


def test_linear_oracle_batch(rng):
    x, y, z = points(rng, 50)
    res = wave_values(power_gluing(-2), *LAMBDAS, x, y, z, N)
    assert np.all(res.ok)
    assert np.max(np.abs(res.values - linear_oracle_values(x, y, z))) < 1e-10


def test_linear_newton_from_zero(rng):
    for x, y, z in points(rng, 10).T:
        sg = wave_scaffold(power_gluing(-2), *LAMBDAS, x, y, z, N=N)
        sol = solve_riemann_newton(sg, N, sigma0=CircleFunction.constant(0.0, N))
        assert sol.newton_iters <= 3
        assert abs(sol.value - linear_oracle_values(x, y, z)) < 1e-10


def test_zero_values_no_iterations():
    sg = wave_scaffold(power_gluing(-2, quadratic=0.1), *LAMBDAS, 0.0, 0.0, 0.0, N=N)
    sol = solve_riemann_newton(sg, N)
    assert sol.newton_iters == 0
    assert sol.sigma_plus.max_abs() == 0 and sol.sigma_minus.max_abs() == 0


def test_unscaffolded_transform_is_zero():
    g = GluingFunction(lambda l, t: l * (t + 0.2 * t**2), lambda l, t: l * (1 + 0.4 * t))
    assert riemann_transform(g, N=N) == 0


def test_solution_invariants():
    g = power_gluing(-2, quadratic=0.1)
    sg = wave_scaffold(g, *LAMBDAS, 0.01, -0.015, 0.02, N=N, check=False)
    sol = solve_riemann_newton(sg, N)
    lam = circle_points(N)
    sp, sm = sol.sigma_plus, sol.sigma_minus
    assert np.max(np.abs(sm.samples - sg.eval(lam, sp.samples))) <= 1e-12
    assert np.max(np.abs(sp.modes[sp.ks < 0])) < 1e-15 * max(1, sp.max_abs())
    assert np.max(np.abs(sm.modes[sm.ks > 0])) < 1e-15 * max(1, sm.max_abs())
    assert winding_index(CircleFunction(sg.dt(lam, sp.samples))) == 1
    assert sp.check_tail()


def test_newton_vs_homotopy(rng):
    g = power_gluing(-2, quadratic=0.1)
    x, y, z = points(rng, 5)
    for p in zip(x, y, z):
        sg = wave_scaffold(g, *LAMBDAS, *p, N=N, check=False)
        a = solve_riemann_newton(sg, N).value
        b = solve_riemann_homotopy(sg, N).value
        assert abs(a - b) < 1e-8


def test_homotopy_linear_oracle():
    sg = wave_scaffold(power_gluing(-2), *LAMBDAS, 0.01, 0.02, -0.02, N=N)
    val = solve_riemann_homotopy(ScaffoldPath(sg), N).value
    assert abs(val - linear_oracle_values(0.01, 0.02, -0.02)) < 1e-9


def test_homotopy_constant_path():
    sg = wave_scaffold(power_gluing(-2, quadratic=0.1), *LAMBDAS, 0.0, 0.0, 0.0, N=N)
    sol = solve_riemann_homotopy(sg, N)
    assert sol.sigma_plus.max_abs() == 0


def test_truncation_independence():
    g = ModulatedGluing(0.1, 0.05)
    a = riemann_transform(wave_scaffold(g, *LAMBDAS, 0.02, -0.02, 0.02, N=32, check=False), N=32)
    b = riemann_transform(wave_scaffold(g, *LAMBDAS, 0.02, -0.02, 0.02, N=64, check=False), N=64)
    assert abs(a - b) < 1e-9


@pytest.mark.parametrize("mu", [0.1, 0.3 + 0.1j, -0.4j])
def test_mobius_cross_check(mu):
    # the recomposed gluing is less smooth on the circle, so both sides use 128 samples
    g = power_gluing(-2, quadratic=0.1)
    sg = wave_scaffold(g, *LAMBDAS, 0.002, -0.001, 0.002, N=64)
    sol = solve_riemann_newton(sg, 64)
    assert abs(sigma_plus_by_mobius(sg, mu, 64) - sol.sigma_plus.taylor(mu)) < 1e-12


def test_index_not_one():
    with pytest.raises(IndexNotOne):
        solve_riemann_newton(power_gluing(-2), N)


def test_max_iters():
    sg = wave_scaffold(power_gluing(-2, quadratic=0.1), *LAMBDAS, 0.02, 0.02, 0.02, N=N, check=False)
    with pytest.raises(MaxItersExceeded):
        solve_riemann_newton(sg, N, max_iters=1, sigma0=CircleFunction.constant(0.0, N))


def test_wave_solution_single_point():
    f = wave_solution(power_gluing(-2, quadratic=0.1), *LAMBDAS, Grid3.box(0.02, 1), N)
    assert f.values.shape == (1, 1, 1) and f.values[0, 0, 0] == 0


def test_wave_solution_linear_field():
    grid = Grid3.box(0.02, 5)
    f = wave_solution(power_gluing(-2), *LAMBDAS, grid, N)
    X, Y, Z = grid.mesh()
    assert not f.holes
    assert np.max(np.abs(f.values - linear_oracle_values(X, Y, Z))) < 1e-12


def test_wave_solution_origin_exact():
    f = wave_solution(ModulatedGluing(0.1, 0.05), *LAMBDAS, Grid3.box(0.02, 3), N)
    assert f.values[1, 1, 1] == 0


def test_wave_solution_rejects_wrong_index():
    with pytest.raises(GluingIndexMismatch):
        wave_solution(power_gluing(-1), *LAMBDAS, Grid3.box(0.02, 3), N)


def test_wave_solution_jobs_deterministic():
    g = ModulatedGluing(0.1, 0.05)
    a = wave_solution(g, *LAMBDAS, Grid3.box(0.02, 5), N, jobs=1)
    b = wave_solution(g, *LAMBDAS, Grid3.box(0.02, 5), N, jobs=3)
    assert np.array_equal(a.values, b.values)


def test_holes_are_recorded():
    # far outside the validity region: t~ leaves the disk of the quadratic gluing
    f = wave_solution(power_gluing(-2, quadratic=1.0), *LAMBDAS, Grid3.box(0.5, 3), N)
    assert f.holes
    for idx, code in f.holes.items():
        assert np.isnan(f.values[idx]) and code
