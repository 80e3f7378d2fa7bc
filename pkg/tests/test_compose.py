"""Composition rules, theorem kernels and the identity verifier."""

import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfrac.compose import (
    CSV_COLUMNS,
    SHIFT_RULES,
    Orders,
    VerificationReport,
    VerificationRow,
    kernel_integral,
    mellin_ratio,
    reports_to_csv,
    reports_to_json,
    shift_D_after_H,
    shift_H_after_D,
    shift_H_after_I,
    shift_Hilfer_after_H,
    shift_I_after_H,
    theorem1_kernel,
    theorem2_kernel,
    verify_identity,
)
from hfrac.errors import DomainError
from hfrac.fracops import HKernelOp, Kernel, TestFunction, apply_chain
from hfrac.hfunction import exponential_template

GRID = (0.5, 1.0, 1.5)


def rel(a, b):
    return abs(complex(a) - complex(b)) / abs(complex(b))


# ---------------------------------------------------------- order shifts


def test_integral_shift_orders(ops):
    ml, lam = ops["ml"], ops["lam"]
    out = shift_H_after_I(ml, 0.5)
    assert out.h.orders == (1, 2, 2, 3) and out.beta == ml.beta + 0.5
    assert shift_I_after_H(lam, 0.5).h.orders == (2, 1, 2, 3)
    assert shift_H_after_I(lam, 0.5).h.orders == (2, 1, 2, 3)


def test_integral_shifts_share_contract(ops):
    for op in ops.values():
        assert shift_I_after_H(op, 0.7) == shift_H_after_I(op, 0.7)


def test_derivative_shift_orders(ops):
    ml, lam = ops["ml"], ops["lam"]
    assert shift_D_after_H(lam, 0.5).h.orders == (2, 2, 3, 4)
    assert shift_H_after_D(lam, 0.5).h.orders == (2, 2, 3, 4)
    out = shift_D_after_H(ml, 0.5)
    assert out.h.orders == (1, 3, 3, 4) and out.beta == ml.beta - 0.5


def test_hilfer_shift_orders(ops):
    ml = ops["ml"]
    out = shift_Hilfer_after_H(ml, 0.5, 0.5)
    assert out.h.orders == (1, 4, 4, 5) and out.beta == ml.beta - 0.5


def test_canonical_placement(ops):
    ml = ops["ml"]
    out = shift_H_after_I(ml, 0.5)
    # new upper pair closes the first n block, new lower pair is appended
    assert out.h.upper[: ml.h.n] == ml.h.upper[: ml.h.n]
    assert out.h.upper[ml.h.n] == (1 - ml.beta, ml.alpha)
    assert out.h.lower[:-1] == ml.h.lower


def test_derivative_shift_condition():
    op = HKernelOp(0.0, 1.0, 1.0, 0.4, exponential_template())
    with pytest.raises(DomainError):
        shift_D_after_H(op, 0.5)


def test_integral_shift_small_order(ops):
    ml = ops["ml"]
    out = shift_H_after_I(ml, 1e-6)
    r = np.array([0.3, 0.8, 1.4])
    assert np.allclose(out.kernel(r), ml.kernel(r), rtol=1e-5, atol=0)


@pytest.mark.parametrize("rule", sorted(SHIFT_RULES))
@pytest.mark.parametrize("name", ["exp", "ml", "lam"])
def test_mellin_ratio_contract(ops, rule, name):
    op = ops[name]
    r = SHIFT_RULES[rule]
    mu = 0.35
    args = (op, mu, 0.5) if rule == "Hilfer_after_H" else (op, mu)
    shifted = r.apply(*args)
    assert shifted.h.orders[1:] == tuple(
        o + d for o, d in zip(op.h.orders[1:], r.order_delta)
    )
    assert shifted.beta == op.beta + r.beta_sign * mu
    rng = np.random.default_rng(11)
    s = rng.uniform(-0.4, 0.4, 20) + 1j * rng.uniform(-6, 6, 20)
    got = mellin_ratio(op, shifted, s)
    want = r.ratio(op, s, mu)
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-10


def test_hilfer_nu0_kernel_matches_derivative_kernel(ops):
    r = np.linspace(0.05, 2.0, 15)
    for op in (ops["ml"], ops["exp"]):
        k_h = shift_Hilfer_after_H(op, 0.5, 0.0).kernel(r)
        k_d = shift_D_after_H(op, 0.5).kernel(r)
        assert np.max(np.abs(k_h - k_d) / np.abs(k_d)) < 1e-7


# ------------------------------------------------------ theorem kernels


@pytest.mark.parametrize("which", [1, 2])
@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0])
def test_kernel_residue_matches_contour(ops, which, gamma):
    fn = theorem1_kernel if which == 1 else theorem2_kernel
    op = ops["ml"]
    for u in (0.1, 0.6, 1.1):
        a = fn(op, gamma, 0.5, 1.3, u)
        b = fn(op, gamma, 0.5, 1.3, u, method="contour")
        assert rel(a, b) < 1e-9


def test_kernel_vanishes_at_diagonal(ops):
    op = ops["ml"]
    for fn in (theorem1_kernel, theorem2_kernel):
        near = abs(fn(op, 0.5, 0.5, 1.0, 1.0 - 1e-10))
        assert near < 1e-8


def test_theorem2_gamma0_is_corollary2_kernel(ops):
    op = ops["ml"]
    mu, x = 0.5, 1.2
    shifted = shift_I_after_H(op, mu)
    for u in (0.2, 0.7, 1.0):
        k = theorem2_kernel(op, 0.0, mu, x, u)
        ref = x ** (-mu) * shifted.kernel(np.array([x - u]))[0]
        assert rel(k, ref) < 1e-6


def test_theorem_kernel_domain(ops):
    op = ops["ml"]
    with pytest.raises(DomainError):
        theorem1_kernel(op, 0.5, 0.5, 1.0, 1.5)
    with pytest.raises(DomainError):
        theorem1_kernel(op, -1.5, 0.5, 1.0, 0.5)


@pytest.mark.parametrize("which", [1, 2])
def test_theorem_examples(ops, which):
    op = ops["ml"] if which == 1 else ops["exp"]
    gamma = 1.0 if which == 1 else 0.5
    one = TestFunction.constant(1.0)
    rep = verify_identity(f"thm{which}", op, Orders(mu=0.5, gamma=gamma), one, [1.0])
    assert rep.passed, rep.max_rel_err
    direct = kernel_integral(which, op, gamma, 0.5, one, 1.0)
    assert rel(direct, rep.rows[0].rhs) < 1e-12


def test_theorem1_gamma0_against_corollary(ops):
    # recorded discrepancy: the gamma = 0 kernel is not the corollary operator
    op = ops["exp"]
    one = TestFunction.constant(1.0)
    rep = verify_identity("thm1-gamma0", op, Orders(mu=0.5), one, [1.0])
    assert not rep.passed


def test_theorem2_gamma0_against_corollary(ops):
    op = ops["exp"]
    rep = verify_identity("thm2-gamma0", op, Orders(mu=0.5), TestFunction.constant(1.0), GRID)
    assert rep.passed


# ----------------------------------------------------------- verifier


def test_corollary1_example(ops, corpus):
    rep = verify_identity("cor1", ops["ml"], Orders(mu=0.5), corpus["const1"], GRID, tol=1e-5)
    assert rep.passed and rep.grid == GRID


def test_theorem3_example(ops):
    t = TestFunction.power(1.0)
    rep = verify_identity("thm3", ops["exp"], Orders(mu=0.5), t, GRID)
    assert rep.passed


def test_zero_function(ops):
    rep = verify_identity("thm4", ops["ml"], Orders(), TestFunction.constant(0.0), GRID)
    assert rep.max_rel_err == 0 and rep.passed


def test_hilfer_type_one_matches_caputo_composition(ops, corpus):
    # nu = 1: the shifted kernel equals I^{1-mu} applied to d/dx of H phi
    rep = verify_identity("thm4", ops["exp"], Orders(mu=0.5, nu=1.0), corpus["exp"], [1.0])
    assert rep.max_rel_err < 1e-6


def test_hilfer_reduction_rows(corpus):
    rep = verify_identity("hilfer-reductions", None, Orders(mu=0.3), corpus["sqrt"], GRID)
    assert [r.identity for r in rep.rows[:1]] == ["hilfer-reductions/nu0"]
    assert len(rep.rows) == 6 and rep.max_rel_err < 1e-6


def test_unknown_identity(ops, corpus):
    with pytest.raises(DomainError):
        verify_identity("cor9", ops["ml"], Orders(), corpus["exp"], GRID)


def test_mismatch_never_raises(ops, corpus):
    # a wrong order on the right-hand side shows up as a failed report
    op = ops["ml"]
    lhs = apply_chain([Kernel(shift_H_after_I(op, 0.5))], corpus["exp"], 0.0, 1.0)
    row = VerificationRow("x", 1.0, lhs, 2 * lhs)
    rep = VerificationReport("x", (row,), 1e-4)
    assert not rep.passed and abs(rep.max_rel_err - 0.5) < 1e-12


@settings(max_examples=50)
@given(
    st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=1, max_size=5),
    st.floats(1e-8, 1.0),
)
def test_pass_flag_iff_max_rel_err(pairs, tol):
    rows = tuple(VerificationRow("p", float(i), l, r) for i, (l, r) in enumerate(pairs))
    rep = VerificationReport("p", rows, tol)
    assert rep.passed == (rep.max_rel_err <= tol)


def test_serialisation(ops, corpus):
    rep = verify_identity("cor2", ops["ml"], Orders(mu=0.5), corpus["poly"], GRID, label="poly")
    text = reports_to_csv([rep])
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + len(GRID)
    assert rows[1][0] == "cor2/poly"
    assert reports_to_csv([rep]) == text
    doc = json.loads(reports_to_json([rep]))
    assert doc[0]["identity"] == "cor2/poly" and doc[0]["pass"] is True
