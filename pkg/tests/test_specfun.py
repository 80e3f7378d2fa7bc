"""Special functions against closed forms and mpmath oracles."""

import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfrac.errors import ConvergenceError, DomainError, PoleError
from hfrac.hfunction import eval_h, lambda_template
from hfrac.specfun import (
    LambdaParams,
    beta,
    digamma,
    gamma,
    gauss_2f1,
    lambda_fn,
    ln_gamma,
    mittag_leffler,
    rgamma,
)

mpmath.mp.dps = 30


def rel(a, b):
    return abs(complex(a) - complex(b)) / abs(complex(b))


# ------------------------------------------------------------ ln_gamma


def test_ln_gamma_normalisation():
    assert abs(ln_gamma(1.0)) < 1e-15
    assert abs(ln_gamma(0.5) - 0.5 * math.log(math.pi)) < 1e-14


def test_ln_gamma_complex_oracle():
    ref = complex(mpmath.loggamma(mpmath.mpc(1, 1)))
    assert rel(ln_gamma(1 + 1j), ref) < 1e-13


@pytest.mark.parametrize("z", [0.5, 0.75 + 3j, 2.5 - 7j, 11.0, 24.5 + 0.5j, 49.9 + 2j])
def test_gamma_matches_oracle_right_half(z):
    ref = complex(mpmath.gamma(mpmath.mpc(z)))
    assert rel(np.exp(ln_gamma(z)), ref) < 1e-13
    assert rel(gamma(z), ref) < 1e-13


@pytest.mark.parametrize("z", [-0.5, -3.25 + 0.5j, 0.1 - 2j, -7.9])
def test_gamma_reflection(z):
    ref = complex(mpmath.gamma(mpmath.mpc(z)))
    assert rel(np.exp(ln_gamma(z)), ref) < 1e-12
    assert rel(rgamma(z), 1 / ref) < 1e-12


@pytest.mark.parametrize("z", [0, -1, -4])
def test_gamma_poles(z):
    with pytest.raises(PoleError):
        ln_gamma(z)
    with pytest.raises(PoleError):
        gamma(z)
    assert rgamma(z) == 0


def test_recurrence_on_random_points():
    rng = np.random.default_rng(7)
    z = rng.uniform(0.5, 20, 100) + 1j * rng.uniform(-10, 10, 100)
    lhs = np.exp(ln_gamma(z + 1))
    rhs = z * np.exp(ln_gamma(z))
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-12


def test_digamma_oracle():
    for z in (0.3, 2.0 + 1j, -1.5):
        assert rel(digamma(z), complex(mpmath.digamma(mpmath.mpc(z)))) < 1e-12


# ---------------------------------------------------------------- beta


def test_beta_trivial():
    assert abs(beta(1, 1) - 1) < 1e-13
    assert abs(beta(0.5, 0.5) - math.pi) < 1e-13


def test_beta_quadrature_oracle():
    ref = mpmath.quad(lambda t: t * (1 - t) ** 2.5, [0, 1])
    assert rel(beta(2, 3.5), complex(ref)) < 1e-13


@given(
    st.floats(0.1, 30), st.floats(-5, 5), st.floats(0.1, 30), st.floats(-5, 5)
)
def test_beta_symmetric(ar, ai, br, bi):
    a, b = complex(ar, ai), complex(br, bi)
    assert beta(a, b) == beta(b, a)


def test_beta_pole():
    with pytest.raises(PoleError):
        beta(-1, 2.5)


# ----------------------------------------------------------------- 2F1


def test_2f1_trivial():
    assert gauss_2f1(0.3, 1.7, 2.2, 0.0) == 1
    assert abs(gauss_2f1(0.5, 3, 3, 0.36) - 1.25) < 1e-14
    assert abs(gauss_2f1(1, 1, 2, 0.5) - 2 * math.log(2)) < 1e-13


@pytest.mark.parametrize(
    "a, b, c, z",
    [
        (0.3, 1.2, 2.5, -0.99),
        (1.5, 0.7, 1.2 + 0.5j, -0.6),
        (0.8, 1.8, 3.1, -12.0),
        (0.5, 1.5, 2.0, 0.95),
        (1.0, 0.4, 2.4, 0.7 + 0.2j),
        (2.0, 0.5, 2.5, 0.999),
    ],
)
def test_2f1_oracle(a, b, c, z):
    ref = complex(mpmath.hyp2f1(a, b, c, z))
    assert rel(gauss_2f1(a, b, c, z), ref) < 1e-10


@given(st.floats(-2, 3), st.floats(-2, 3), st.floats(0.2, 4), st.floats(-0.95, 0.79))
def test_2f1_symmetric(a, b, c, z):
    f1 = complex(gauss_2f1(a, b, c, z))
    f2 = complex(gauss_2f1(b, a, c, z))
    assert abs(f1 - f2) <= 1e-12 * max(1.0, abs(f1))


def test_2f1_errors():
    with pytest.raises(PoleError):
        gauss_2f1(1, 1, -2, 0.3)
    with pytest.raises(ConvergenceError):
        gauss_2f1(1, 1, 2.5, 3.0 + 3j)


# ------------------------------------------------------ Mittag-Leffler


def test_ml_trivial():
    assert abs(mittag_leffler(1, 1, 1) - math.e) < 1e-14
    assert abs(mittag_leffler(0.7, 2.5, 0) - 1 / math.gamma(2.5)) < 1e-15
    assert abs(mittag_leffler(2, 1, -1) - math.cos(1)) < 1e-14


@pytest.mark.parametrize("z", [3.0, -3.0, 2j, -2 + 2j, 0.1])
def test_ml_is_exp(z):
    assert rel(mittag_leffler(1, 1, z), cmath.exp(z)) < 1e-10


@pytest.mark.parametrize("alpha, beta_, z", [(0.5, 1, -2.0), (0.5, 1, 1.5), (1.5, 0.8, 4.0 - 1j)])
def test_ml_oracle(alpha, beta_, z):
    ref = mpmath.nsum(lambda k: mpmath.mpc(z) ** k / mpmath.gamma(alpha * k + beta_), [0, mpmath.inf])
    assert rel(mittag_leffler(alpha, beta_, z), complex(ref)) < 1e-12


def test_ml_range_and_alpha():
    with pytest.raises(DomainError):
        mittag_leffler(0.5, 1, 6.0)
    with pytest.raises(DomainError):
        mittag_leffler(0.0, 1, 1.0)


# ------------------------------------------------------------- lambda


def _lambda_oracle(eta, mu, nu, z):
    f = lambda t: (t**eta - 1) ** (mu - 1 / eta) * t**nu * mpmath.exp(-z * t)
    return complex(eta / mpmath.gamma(mu + 1 - 1 / eta) * mpmath.quad(f, [1, 2, mpmath.inf]))


def test_lambda_collapses_to_exponential():
    assert abs(lambda_fn(LambdaParams(1, 1, 0, 1)) - math.exp(-1)) < 1e-12


def test_lambda_closed_form():
    assert abs(lambda_fn(LambdaParams(1, 2, 0, 2)) - math.exp(-2) / 4) < 1e-12


@pytest.mark.parametrize("p", [(2, 1, 0, 1), (1.5, 0.5, 0.3, 2 + 1j), (0.8, 0.6, -0.5, 0.7)])
def test_lambda_quadrature_oracle(p):
    assert rel(lambda_fn(LambdaParams(*p)), _lambda_oracle(*p)) < 1e-9


@pytest.mark.parametrize("eta, mu, nu", [(2, 1, 0), (1.5, 0.5, 0.3)])
def test_lambda_h_representation(eta, mu, nu):
    for z in (0.5, 1, 2, 3, 1 + 1j):
        direct = lambda_fn(LambdaParams(eta, mu, nu, z))
        assert rel(eval_h(lambda_template(eta, mu, nu), z), direct) < 1e-6


@pytest.mark.parametrize("p", [(0, 1, 0, 1), (2, -0.6, 0, 1), (1, 1, 0, -1)])
def test_lambda_invariants(p):
    with pytest.raises(DomainError):
        LambdaParams(*p)


@settings(max_examples=30)
@given(st.floats(-1, 1))
def test_lambda_real_for_real_z(nu):
    v = lambda_fn(LambdaParams(2, 1, nu, 1.3))
    assert abs(v.imag) < 1e-14 and v.real > 0
