"""Fox H-function: Mellin integrand, classification, evaluation and reductions."""

import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfrac.errors import DivergentError, DomainError, PoleCollisionError, PoleError
from hfrac.hfunction import (
    Convergence,
    HParams,
    cancel_pairs,
    check_convergence,
    eval_h,
    eval_h_contour,
    exponential_template,
    lambda_template,
    mellin_theta,
    mittag_leffler_template,
    reduce_to_known,
    residue_series,
)
from hfrac.specfun import LambdaParams, lambda_fn, mittag_leffler

mpmath.mp.dps = 30

TEMPLATES = {
    "exp": exponential_template(),
    "ml": mittag_leffler_template(0.5, 1.0),
    "ml2": mittag_leffler_template(1.5, 2.0),
    "lambda": lambda_template(1.5, 0.5, 0.3),
}


def rel(a, b):
    return abs(complex(a) - complex(b)) / abs(complex(b))


# -------------------------------------------------------------- HParams


@pytest.mark.parametrize(
    "m, n, upper, lower",
    [
        (0, 0, (), ((0, 1),)),  # m >= 1
        (2, 0, (), ((0, 1),)),  # m <= q
        (1, 1, (), ((0, 1),)),  # n <= p
        (1, 0, (), ((0, -1),)),  # beta > 0
        (1, 1, ((0, 0),), ((0, 1),)),  # alpha > 0
    ],
)
def test_hparams_invariants(m, n, upper, lower):
    with pytest.raises(DomainError):
        HParams(m, n, upper, lower)


def test_hparams_orders_and_json():
    p = TEMPLATES["ml"]
    assert p.orders == (1, 1, 1, 2)
    doc = json.loads(json.dumps(p.to_json()))
    assert set(doc) == {"m", "n", "upper", "lower"}
    assert HParams.from_json(doc) == p


# ---------------------------------------------------------- mellin_theta


def test_theta_trivial():
    assert abs(mellin_theta(exponential_template(), 2.0) - 1.0) < 1e-14


def test_theta_ml_oracle():
    s = mpmath.mpc(0.5, 0.5)
    a, b = 0.5, 1.0
    ref = mpmath.gamma(s) * mpmath.gamma(1 - s) / mpmath.gamma(1 - (1 - b) - a * s)
    assert rel(mellin_theta(mittag_leffler_template(a, b), complex(s)), complex(ref)) < 1e-13


def test_theta_empty_products():
    p = HParams(1, 0, (), ((0.3, 0.7),))
    s = 0.4 + 1j
    assert rel(mellin_theta(p, s), complex(mpmath.gamma(0.3 + 0.7 * mpmath.mpc(s)))) < 1e-13


@pytest.mark.parametrize("name", ["exp", "ml", "lambda"])
def test_theta_pole_bookkeeping(name):
    p = TEMPLATES[name]
    for b, beta in p.lower[: p.m]:
        for k in range(3):
            s = -(b + k) / beta + 1e-9
            assert abs(mellin_theta(p, s)) > 1e8


def test_theta_exact_pole():
    with pytest.raises(PoleError):
        mellin_theta(exponential_template(), -1.0)


# ------------------------------------------------------- classification


def test_classification_examples():
    assert check_convergence(exponential_template(), 3.0 + 1j) is Convergence.RESIDUE_LEFT
    for z in (0.1, -2.0, 5.0, 3j):
        assert check_convergence(TEMPLATES["ml"], z) is Convergence.RESIDUE_LEFT
    boundary = HParams(1, 1, ((0.0, 1.0),), ((0.0, 1.0),))
    assert check_convergence(boundary, 1.0) is Convergence.CONTOUR_ONLY


def test_classification_divergent():
    p = HParams(1, 0, ((0.5, 3.0),), ((0.0, 1.0),))
    assert check_convergence(p, 1.0) is Convergence.DIVERGENT
    with pytest.raises(DivergentError):
        eval_h(p, 1.0)


def test_delta_zero_both_sides():
    # H^{1,1}_{1,1}[z | (0,1); (0,1)] = 1/(1+z)
    p = HParams(1, 1, ((0.0, 1.0),), ((0.0, 1.0),))
    assert check_convergence(p, 0.5) is Convergence.RESIDUE_LEFT
    assert check_convergence(p, 2.0) is Convergence.RESIDUE_RIGHT
    for z in (0.5, 0.99, 1.0, 2.0, 0.3 + 0.4j):
        assert rel(eval_h(p, z), 1 / (1 + z)) < 1e-10


# ---------------------------------------------------------- evaluation


def test_eval_exponential():
    assert abs(eval_h(exponential_template(), 1.0) - math.exp(-1)) < 1e-14


@pytest.mark.parametrize("z", [0.2, 1.0, 2.5, -1.5, 3.0, 1 + 2j])
def test_eval_mittag_leffler(z):
    assert rel(eval_h(TEMPLATES["ml"], z), mittag_leffler(0.5, 1.0, -z)) < 1e-7


@pytest.mark.parametrize("z", [0.4, 1.0, 2.0, 3.5, 1 - 1j])
def test_eval_lambda(z):
    direct = lambda_fn(LambdaParams(1.5, 0.5, 0.3, z))
    assert rel(eval_h(TEMPLATES["lambda"], z), direct) < 1e-6


@pytest.mark.parametrize("name", sorted(TEMPLATES))
def test_residue_contour_agree(name):
    p = TEMPLATES[name]
    z = np.array([0.3, 0.8, 1.5, 2.2, 3.0])
    series = residue_series(p, z, "left")
    contour = eval_h_contour(p, z)
    assert np.max(np.abs(series - contour) / np.abs(series)) < 1e-7


def test_eval_vectorised_shape():
    z = np.array([[0.5, 1.0], [1.5, 2.0]])
    v = eval_h(TEMPLATES["ml"], z)
    assert v.shape == (2, 2)
    assert rel(v[1, 0], eval_h(TEMPLATES["ml"], 1.5)) < 1e-13


def test_eval_zero_argument():
    with pytest.raises(DomainError):
        eval_h(exponential_template(), 0.0)


def test_coincident_poles_fall_back_to_contour():
    # Gamma(s)^2 = Mellin transform of 2 K_0(2 sqrt z)
    p = HParams(2, 0, (), ((0.0, 1.0), (0.0, 1.0)))
    ref = complex(2 * mpmath.besselk(0, 2 * mpmath.sqrt(0.7)))
    assert rel(eval_h(p, 0.7), ref) < 1e-8


def test_coincident_poles_without_contour():
    p = HParams(2, 0, ((0.5, 0.5),), ((0.0, 1.0), (0.0, 1.0), (0.3, 2.0)))
    with pytest.raises(PoleCollisionError):
        eval_h(p, 0.5)


def test_cancel_pairs():
    # the numerator Gamma(0.75 - s) cancels the denominator Gamma(0.75 - s)
    p = HParams(1, 1, ((0.25, 1.0),), ((0.0, 1.0), (0.25, 1.0)))
    assert cancel_pairs(p).orders == (1, 0, 0, 1)
    assert rel(eval_h(p, 1.3), math.exp(-1.3)) < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 1.7), st.floats(0.5, 2.5), st.floats(-3.0, 3.0))
def test_ml_template_property(alpha, beta, z):
    if abs(z) < 1e-3:
        z = 1e-3
    v = eval_h(mittag_leffler_template(alpha, beta), z)
    assert abs(v - mittag_leffler(alpha, beta, -z)) <= 1e-7 * max(1.0, abs(v))


# ---------------------------------------------------------- reductions


def test_reduce_templates():
    r = reduce_to_known(exponential_template())
    assert r.kind == "exponential"
    r = reduce_to_known(lambda_template(2.0, 1.0, 0.5))
    assert r.kind == "lambda" and np.allclose(r.args, (2.0, 1.0, 0.5))
    r = reduce_to_known(mittag_leffler_template(0.5, 1.0))
    assert r.kind == "mittag_leffler" and np.allclose(r.args, (0.5, 1.0))


def test_reduce_none():
    rng = np.random.default_rng(3)
    up = tuple((float(a), float(b)) for a, b in rng.uniform(0.1, 1, (3, 2)))
    lo = tuple((float(a), float(b)) for a, b in rng.uniform(0.1, 1, (3, 2)))
    assert reduce_to_known(HParams(2, 2, up, lo)) is None


@pytest.mark.parametrize(
    "params",
    [
        HParams(1, 0, (), ((0.4, 2.0),)),
        HParams(1, 1, ((0.5, 1.0),), ((0.5, 1.0), (-0.3, 0.5))),
        HParams(2, 0, ((0.2, 0.5),), ((0.0, 1.0), (-0.4, 0.5))),
    ],
)
def test_reduction_values(params):
    r = reduce_to_known(params)
    assert r is not None
    for z in (0.3, 1.0, 2.0):
        assert rel(eval_h(params, z), r.evaluate(z)) < 1e-7
