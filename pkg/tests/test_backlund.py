import numpy as np
import pytest

from twistorsolve.backlund import (classify, coefficients, eikonal_residual, leaf_trace, transform,
                                   verify_system)
from twistorsolve.errors import ProportionalTriples
from twistorsolve.fields import Grid3
from twistorsolve.oracles import CUBIC, fixture, gauge_transform
from twistorsolve.pde import ABCTriple, abc_from_lambda_triple, fd_derivatives, residual_report

from conftest import LAMBDAS

SRC = abc_from_lambda_triple(*LAMBDAS)
TGT = abc_from_lambda_triple(0.15, 0.3, 5.0)


def test_identity_target_rejected():
    with pytest.raises(ProportionalTriples):
        coefficients(SRC, SRC)
    with pytest.raises(ProportionalTriples):
        coefficients(SRC, SRC.scaled(2.5 - 1j))


def test_example_coefficients_distinct():
    c = coefficients(SRC, TGT)
    assert c.distinct
    assert c.alpha == pytest.approx(SRC.A / TGT.A)
    assert c.gamma == pytest.approx(SRC.C / TGT.C)


def test_trichotomy(rng):
    for _ in range(100):
        a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert classify(ABCTriple(a, b, -a - b), ABCTriple(c, d, -c - d)) != "mixed"
    assert classify(SRC, SRC.scaled(3.0)) == "equal"


def test_trace_on_axis():
    c = coefficients(SRC, TGT)
    assert leaf_trace(fixture("exp"), c, 0.013, 0.0, 0.0) == 0.013


def test_trace_linear_closed_form(rng):
    c = coefficients(SRC, TGT)
    x, y, z = rng.uniform(-0.1, 0.1, (3, 10))
    v = leaf_trace(fixture("linear"), c, x, y, z)
    assert np.max(np.abs(v - (x + c.beta / c.alpha * y + c.gamma / c.alpha * z))) < 1e-13


def test_path_order_independence(rng):
    c = coefficients(SRC, TGT)
    w = fixture("exp_reparam")
    x, y, z = rng.uniform(-0.05, 0.05, (3, 20))
    a = leaf_trace(w, c, x, y, z, order="zy")
    b = leaf_trace(w, c, x, y, z, order="yz")
    assert np.max(np.abs(a - b)) < 1e-8


def test_transform_closed_form(pair):
    # w = exp(phi1(x) + 2 phi2(y) + 3 phi3(z)) with phi(s) = s + q s^2 has leaves of
    # alpha phi1(x) + 2 beta phi2(y) + 3 gamma phi3(z); the x-axis gauge then fixes v
    _, v = pair
    c = coefficients(SRC, TGT)
    q1, q2, q3 = 0.3, -0.2, 0.25
    X, Y, Z = v.grid.mesh()
    s = (c.alpha * (X + q1 * X**2) + 2 * c.beta * (Y + q2 * Y**2)
         + 3 * c.gamma * (Z + q3 * Z**2)) / c.alpha
    exact = (-1 + np.sqrt(1 + 4 * q1 * s)) / (2 * q1)
    assert np.max(np.abs(v.values - exact)) < 1e-11


def test_gauge_covariance():
    grid = Grid3.box(0.02, 5)
    w = fixture("exp_reparam")
    v1 = transform(w, SRC, TGT, grid)
    v2 = transform(gauge_transform(w, CUBIC), SRC, TGT, grid)
    d1, d2 = fd_derivatives(v1), fd_derivatives(v2)
    m = grid.interior()
    g1 = np.stack([d1.wx[m], d1.wy[m], d1.wz[m]])
    g2 = np.stack([d2.wx[m], d2.wy[m], d2.wz[m]])
    cross = np.cross(g1.T, g2.T)
    assert np.max(np.abs(cross)) / np.max(np.abs(g1)) ** 2 < 1e-8


@pytest.fixture(scope="module")
def pair():
    grid = Grid3.box(0.02, 9)
    w = fixture("exp_reparam")
    return w, transform(w, SRC, TGT, grid)


def test_transform_nondegenerate(pair):
    _, v = pair
    d = fd_derivatives(v)
    m = v.grid.interior()
    assert not v.holes
    assert min(np.min(np.abs(d.wx[m])), np.min(np.abs(d.wy[m])), np.min(np.abs(d.wz[m]))) > 0.1


def test_transform_jobs_deterministic(pair):
    w, v = pair
    v3 = transform(w, SRC, TGT, v.grid, jobs=3)
    assert np.array_equal(v.values, v3.values)


def test_verify_same_field_exact():
    grid = Grid3.box(0.02, 5)
    w = fixture("exp_reparam")
    rep = verify_system(w.sample(grid), w.sample(grid), SRC, SRC)
    # the two sides differ only in the order of the products
    assert rep["system_residual_1"] < 1e-15 and rep["system_residual_2"] < 1e-15
    assert rep["max_minor_ratio"] < 1e-15 and rep["ok"]


def test_minors_and_residuals_agree(pair):
    # both indicators are small on a transform and O(1) on an unrelated field
    w, v = pair
    good = verify_system(w, v, SRC, TGT)
    bad = verify_system(w, fixture("sin", {"a": 3.0, "b": -1.0, "c": 0.5}).sample(v.grid), SRC, TGT)
    assert max(good["system_residual_1"], good["system_residual_2"]) < 1e-3
    assert good["max_minor_ratio"] < 1e-3
    assert min(bad["system_residual_1"], bad["system_residual_2"]) > 0.1
    assert bad["max_minor_ratio"] > 0.1 and not bad["ok"]


def test_target_equation_and_eikonal(pair):
    w, v = pair
    assert residual_report(v, TGT).scaled < 1e-3
    assert eikonal_residual(w, v, SRC).scaled < 1e-3


def test_limit_direction():
    # as A~ -> 0 the coefficient alpha blows up and grad v turns towards dx
    grid = Grid3.box(0.02, 3)
    w = fixture("exp_reparam")
    angles = []
    for eps in (1e-1, 1e-2, 1e-3):
        v = transform(w, SRC, ABCTriple(eps, 1.0, -1.0 - eps), grid)
        d = fd_derivatives(v)
        g = np.array([d.wx[1, 1, 1], d.wy[1, 1, 1], d.wz[1, 1, 1]])
        angles.append(np.sqrt(abs(g[1]) ** 2 + abs(g[2]) ** 2) / np.linalg.norm(g))
    assert angles[0] > angles[1] > angles[2] and angles[2] < 1e-2


def test_failures_become_holes():
    # leaves from the corners of this box run into x = -1/(2 q1), where wx = 0
    grid = Grid3.box(0.2, 5)
    v = transform(fixture("exp_reparam"), SRC, TGT, grid)
    assert v.holes and len(v.holes) < grid.size
    for idx, code in v.holes.items():
        assert np.isnan(v.values[idx]) and code in ("NondegeneracyLost", "LeftDomain")
