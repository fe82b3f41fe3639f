import numpy as np
import pytest

from twistorsolve.annulus import (CircleFunction, _split_modes, birkhoff_factor, compose_gluing, h_split,
                                  mult_split, winding_index)
from twistorsolve.checks import random_index0, random_rational, random_trig_poly
from twistorsolve.errors import (NearZeroOnCircle, NonzeroIndex, PhaseJumpTooLarge,
                                 TArgumentOutOfDisk)
from twistorsolve.gluing import GluingFunction, power_gluing

N = 32


def cf(f):
    return CircleFunction.from_function(f, N)


def close(a, b, tol=1e-13):
    return np.max(np.abs(a.samples - b.samples)) <= tol * max(1.0, b.max_abs())


def test_fft_round_trip(rng):
    f = random_trig_poly(rng, N)
    g = CircleFunction.from_modes(f.modes)
    assert close(f, g)


def test_modes_of_monomial():
    m = CircleFunction.monomial(3, N=N)
    assert abs(m.mode(3) - 1) < 1e-14
    assert np.sum(np.abs(m.modes)) == pytest.approx(1.0, abs=1e-13)


def test_product_has_no_aliasing_below_nyquist(rng):
    a = random_trig_poly(rng, N, degree=7)
    b = random_trig_poly(rng, N, degree=7)
    prod = a * b
    # the exact product has degree 14 < N, so evaluation off the samples agrees too
    lam = np.exp(0.3j)  # between samples
    assert abs(prod(lam) - a(lam) * b(lam)) < 1e-12


@pytest.mark.parametrize("f, hp, hm", [
    (lambda l: l**3, lambda l: l**2, lambda l: 0 * l),
    (lambda l: 5 + 0 * l, lambda l: 0 * l, lambda l: 5 + 0 * l),
    (lambda l: 2 * l + 3 + 1 / l, lambda l: 2 + 0 * l, lambda l: 3 + 1 / l),
])
def test_h_split_examples(f, hp, hm):
    p, m = h_split(cf(f))
    assert close(p, cf(hp))
    assert close(m, cf(hm))


def test_h_split_reconstructs_in_coefficients(rng):
    phi = random_trig_poly(rng, N)
    p, m = h_split(phi)
    hp, hm = _split_modes(phi.fft_modes)
    assert np.all(hp[N:] == 0) and np.all(hm[1:N] == 0)
    assert np.array_equal(np.roll(hp, 1) + hm, phi.fft_modes)
    assert close(p.times_lambda_power(1) + m, phi, 1e-14)


def test_h_split_projections_idempotent(rng):
    phi = random_trig_poly(rng, N)
    _, m = h_split(phi)
    _, m2 = h_split(m)
    assert close(m, m2, 1e-15)


@pytest.mark.parametrize("k", [-3, 0, 4])
def test_winding_monomials(k):
    assert winding_index(CircleFunction.monomial(k, N=N)) == k


def test_winding_examples():
    assert winding_index(cf(np.exp)) == 0
    assert winding_index(cf(lambda l: l - 0.5)) == 1


def test_winding_errors():
    with pytest.raises(NearZeroOnCircle):
        winding_index(cf(lambda l: l - 1))
    with pytest.raises(PhaseJumpTooLarge):
        winding_index(CircleFunction.monomial(20, N=N))


def test_winding_additive(rng):
    for _ in range(30):
        f, g = random_rational(rng, N), random_rational(rng, N)
        assert winding_index(f * g) == winding_index(f) + winding_index(g)


def test_mult_split_constant():
    p, m = mult_split(CircleFunction.constant(4.0, N))
    assert close(p, CircleFunction.constant(1.0, N))
    assert close(m, CircleFunction.constant(0.25, N))


def test_mult_split_rational():
    # log of this has modes decaying like 2^-k: 64 samples alias at 1e-10
    f = CircleFunction.from_function(lambda l: (l - 2) / (l - 3), 64)
    p, m = mult_split(f)
    assert close(p, CircleFunction.from_function(lambda l: 1.5 * (l - 2) / (l - 3), 64), 1e-12)
    assert close(m, CircleFunction.constant(1.5, 64), 1e-12)


def test_mult_split_exponential():
    p, m = mult_split(cf(lambda l: np.exp(l + 1 / l)))
    assert close(p, cf(np.exp), 1e-12)
    assert close(m, cf(lambda l: np.exp(-1 / l)), 1e-12)


def test_mult_split_normalization_and_support(rng):
    psi = random_index0(rng, N)
    p, m = mult_split(psi)
    assert abs(p(0.0) - 1) < 1e-12
    assert np.max(np.abs(p.modes[p.ks < 0])) < 1e-12
    assert np.max(np.abs(m.modes[m.ks > 0])) < 1e-12
    assert close(p / m, psi, 1e-11)


def test_mult_split_rejects_index():
    with pytest.raises(NonzeroIndex):
        mult_split(cf(lambda l: l))


@pytest.mark.parametrize("f, n, ap, am", [
    (lambda l: l, 1, lambda l: 1 + 0 * l, lambda l: 1 + 0 * l),
    (lambda l: 2 * l**-2, -2, lambda l: 1 + 0 * l, lambda l: 0.5 + 0 * l),
    (lambda l: l * (l - 2) / (l - 3), 1, lambda l: 1.5 * (l - 2) / (l - 3), lambda l: 1.5 + 0 * l),
])
def test_birkhoff_examples(f, n, ap, am):
    k, p, m = birkhoff_factor(CircleFunction.from_function(f, 64))
    assert k == n
    assert close(p, CircleFunction.from_function(ap, 64), 1e-12)
    assert close(m, CircleFunction.from_function(am, 64), 1e-12)


def test_birkhoff_factorization_consistency(rng):
    for _ in range(20):
        phi = random_rational(rng, 64) * random_index0(rng, 64)
        n, p, m = birkhoff_factor(phi)
        assert close(p.times_lambda_power(n) / m, phi, 1e-10)


def test_compose_gluing_examples():
    lin = power_gluing(-2)
    assert close(compose_gluing(lin, CircleFunction.constant(0.0, N)), CircleFunction.constant(0.0, N))
    assert close(compose_gluing(lin, cf(lambda l: l)), cf(lambda l: 1 / l))
    sq = GluingFunction(lambda l, t: t**2, lambda l, t: 2 * t, delta=10.0)
    assert close(compose_gluing(sq, cf(lambda l: l + 1)), cf(lambda l: l**2 + 2 * l + 1), 1e-12)
    assert close(compose_gluing(sq, cf(lambda l: l + 1), derivative=True), cf(lambda l: 2 * l + 2))


def test_compose_gluing_disk():
    g = power_gluing(-2, quadratic=1.0)  # delta = 0.5
    with pytest.raises(TArgumentOutOfDisk):
        compose_gluing(g, CircleFunction.constant(1.0, N))


def test_tail_check_warns():
    with pytest.warns(UserWarning):
        assert not CircleFunction.monomial(30, N=N).check_tail()
    assert CircleFunction.monomial(3, N=N).check_tail()
