import numpy as np
import pytest
from scipy.integrate import solve_ivp

from twistorsolve.annulus import circle_points
from twistorsolve.errors import (DerivativeBlowup, InverseOutOfRange, MuTooCloseToPole,
                                 QEqualsOne)
from twistorsolve.fields import Grid3
from twistorsolve.inverse import (SampledGluing, TransversalCurve, boundary_values, canonical_Y,
                                  check_condition_10760, glue_sample, mu_on_circle, reconstruct,
                                  suggest_t_max)
from twistorsolve.oracles import fixture
from twistorsolve.pde import abc_from_lambda_triple

from conftest import LAMBDAS

ABC = abc_from_lambda_triple(*LAMBDAS)
N = 32


@pytest.fixture(scope="module")
def linear_glue():
    w = fixture("linear", {"a": 1.0, "b": -0.5, "c": 2.0})
    Y = canonical_Y(w, ABC, 10.0)
    # the solver visits sections far larger than the grid values: size t_max for a 0.02 box
    t_max = suggest_t_max(w, *LAMBDAS, Y, Grid3.box(0.02, 3), N)
    return w, Y, glue_sample(w, *LAMBDAS, Y, t_max=t_max, N=N)


def test_canonical_linear_closed_form():
    w = fixture("linear", {"a": 1.0, "b": -0.5, "c": 2.0})
    Y = canonical_Y(w, ABC, 0.5)
    x = np.linspace(-0.5, 0.5, 11)
    assert np.max(np.abs(Y.Y(x) - ABC.A * 1.0 / (ABC.B * -0.5) * x)) < 1e-14
    assert Y.Y(0.0) == 0


def test_canonical_exp_is_linear():
    Y = canonical_Y(fixture("exp"), ABC, 0.5)
    x = np.linspace(-0.5, 0.5, 7)
    assert np.allclose(Y.Y(x), ABC.A / (2 * ABC.B) * x, atol=1e-13)


def test_canonical_derivative_blowup():
    with pytest.raises(DerivativeBlowup):
        canonical_Y(fixture("linear", {"b": 0.0}), ABC, 0.1)


def test_curve_inverse():
    Y = canonical_Y(fixture("exp_reparam"), ABC, 0.3)
    x = np.linspace(-0.2, 0.2, 9)
    assert np.allclose(Y.inverse(Y.Y(x)), x, atol=1e-13)
    with pytest.raises(InverseOutOfRange):
        Y.inverse(np.array([10.0]))


def test_linear_gluing_slope(linear_glue):
    w, Y, sg = linear_glue
    lam = circle_points(N)
    mu = mu_on_circle(*LAMBDAS, lam)
    slope = ABC.A * 1.0 / (ABC.C * 2.0 * mu * (mu - 1))
    for t in (-0.3, 0.11, 1.25):
        got = sg.eval(lam, np.full(lam.shape, t))
        assert np.max(np.abs(got - slope * t)) <= 1e-9 * np.max(np.abs(slope * t))


def test_zero_at_zero(linear_glue):
    _, _, sg = linear_glue
    assert np.all(sg.eval(sg.lambda_samples, np.zeros(2 * N)) == 0)


def test_index_minus_two(linear_glue):
    assert linear_glue[2].index_at_zero() == -2
    w = fixture("exp")
    sg = glue_sample(w, *LAMBDAS, canonical_Y(w, ABC, 0.1), t_max=0.05, N=N)
    assert sg.index_at_zero() == -2
    assert sg.fit_residual < 1e-8


def test_shot_reversibility():
    # forward from (0, g) back to x = t recovers z = 0
    w = fixture("exp_reparam")
    Y = canonical_Y(w, ABC, 0.1)
    sg = glue_sample(w, *LAMBDAS, Y, t_max=0.05, N=N)
    lam = circle_points(N)
    mu = mu_on_circle(*LAMBDAS, lam)
    t = 0.04
    g = sg.eval(lam, np.full(lam.shape, t))
    for j in (0, 7, 40):
        def rhs(x, z):
            wx, wy, wz = w.grad(x, Y.Y(x), z[0])
            return [ABC.A * wx / (mu[j] * ABC.C * wz) - ABC.B * wy * Y.dY(x) / ((mu[j] - 1) * ABC.C * wz)]
        sol = solve_ivp(rhs, (0.0, t), [complex(g[j])], rtol=1e-12, atol=1e-15)
        assert abs(sol.y[0, -1]) < 1e-9


def test_json_round_trip(tmp_path, linear_glue):
    sg = linear_glue[2]
    sg.save(tmp_path / "g.json")
    back = SampledGluing.load(tmp_path / "g.json")
    t = np.full(2 * N, 0.1 - 0.05j)
    assert np.array_equal(back.eval(back.lambda_samples, t), sg.eval(sg.lambda_samples, t))
    assert back.provenance == sg.provenance


def test_sampled_only_at_samples(linear_glue):
    sg = linear_glue[2]
    with pytest.raises(ValueError):
        sg.eval(circle_points(16), np.zeros(32))


def test_t_max_rejected():
    w = fixture("exp")
    with pytest.raises(ValueError):
        glue_sample(w, *LAMBDAS, canonical_Y(w, ABC, 0.1), t_max=0.0)


def test_mu_pole_guard():
    with pytest.raises(MuTooCloseToPole):
        mu_on_circle(*LAMBDAS, circle_points(N), eps1=1e3)


def test_condition_canonical_is_infinite_pass():
    w = fixture("exp")
    rep = check_condition_10760(w, 0.1, 0.2, canonical_Y(w, ABC, 0.1), lam3=10.0)
    assert rep.ok and rep.lhs == np.inf and abs(rep.Q - 1) < 1e-12
    with pytest.raises(QEqualsOne):
        check_condition_10760(w, 0.1, 0.2, canonical_Y(w, ABC, 0.1), lam3=10.0, strict=True)


def test_condition_flat_curve_fails():
    rep = check_condition_10760(fixture("exp"), 0.1, 0.2, TransversalCurve.linear(0.0, 0.1), lam3=10.0)
    assert not rep.ok and rep.lhs == pytest.approx(0.2)


def test_condition_crossing_by_bisection():
    w = fixture("exp")
    s_can = complex(ABC.A / (2 * ABC.B))

    def lhs(f):
        return check_condition_10760(w, 0.1, 0.2, TransversalCurve.linear(f * s_can, 0.1), lam3=10.0).lhs

    fs = np.linspace(0.0, 0.95, 40)
    vals = np.array([lhs(f) for f in fs])
    assert np.all(np.diff(vals) > 0)  # monotone towards the pole at Q = 1
    lo, hi = 0.0, 0.95
    for _ in range(60):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if lhs(mid) <= 1 else (lo, mid)
    # closed form: |(f l1 - l2)/(f - 1)| = 1 at f = 0.8 / 0.9
    assert hi == pytest.approx((1 - 0.2) / (1 - 0.1), abs=1e-12)


def test_reconstruct_linear_small(linear_glue):
    w, Y, sg = linear_glue
    grid = Grid3.box(0.02, 3)
    rec = reconstruct(sg, *LAMBDAS, Y, boundary_values(w, Y), grid)
    X, Yg, Z = grid.mesh()
    assert not rec.holes
    assert np.max(np.abs(rec.values - w.w(X, Yg, Z))) < 1e-12
