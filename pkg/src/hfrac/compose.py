r"""Composition rules for the H-kernel operator and a numerical identity verifier.

Each shift map returns a new :class:`HKernelOp` whose Mellin integrand is the
original one multiplied by a fixed ratio of gamma functions. In the
convention :math:`H(z) = \frac{1}{2\pi i}\int \theta(s) z^{-s} ds` used by
:mod:`hfrac.hfunction` the ratios read

* integral of order ``mu`` on either side: ``Gamma(beta - alpha s) / Gamma(beta + mu - alpha s)``
* derivative (RL or Hilfer) of order ``mu``: ``Gamma(beta - alpha s) / Gamma(beta - mu - alpha s)``

Inserted upper pairs go to the end of the first ``n`` block and inserted
lower pairs are appended, so results compare equal field by field.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from hfrac import specfun
from hfrac.errors import DomainError
from hfrac.fracops import (
    Derivative,
    Hilfer,
    HKernelOp,
    Integral,
    KIntegral,
    Kernel,
    TestFunction,
    apply_chain,
    as_local,
)
from hfrac.hfunction import HParams, mellin_theta, residue_terms
from hfrac.quadrature import OPERATOR_TOL, integrate_endpoints

# ----------------------------------------------------------------- shifts


def _extend(op: HKernelOp, upper: Sequence, lower: Sequence, beta) -> HKernelOp:
    h = op.h
    new_upper = h.upper[: h.n] + tuple(upper) + h.upper[h.n :]
    new_lower = h.lower + tuple(lower)
    params = HParams(h.m, h.n + len(upper), new_upper, new_lower)
    return HKernelOp(op.a, op.w, op.alpha, beta, params)


def _integral_shift(op: HKernelOp, mu: float) -> HKernelOp:
    if not complex(mu).real > 0:
        raise DomainError("integral order must be positive")
    b, al = op.beta, op.alpha
    return _extend(op, [(1 - b, al)], [(1 - b - mu, al)], b + mu)


def shift_H_after_I(op: HKernelOp, mu: float) -> HKernelOp:
    """Operator equal to ``H o I^mu``: orders ``(m, n+1, p+1, q+1)`` and ``beta + mu``."""
    return _integral_shift(op, mu)


def shift_I_after_H(op: HKernelOp, mu: float) -> HKernelOp:
    """Operator equal to ``I^mu o H``; identical to :func:`shift_H_after_I`."""
    return _integral_shift(op, mu)


def _derivative_shift(op: HKernelOp, mu: float) -> HKernelOp:
    if not complex(mu).real > 0:
        raise DomainError("derivative order must be positive")
    n = math.floor(complex(mu).real) + 1
    b, al = op.beta, op.alpha
    # I^{n-mu} raises beta by n - mu, then n derivatives lower it by n
    upper = [(1 - b, al), (1 - b - n + mu, al)]
    lower = [(1 - b - n + mu, al), (1 - b + mu, al)]
    return _extend(op, upper, lower, b - mu)


def shift_D_after_H(op: HKernelOp, mu: float) -> HKernelOp:
    """Operator equal to ``D^mu o H``: orders ``(m, n+2, p+2, q+2)`` and ``beta - mu``."""
    return _derivative_shift(op, mu)


def shift_H_after_D(op: HKernelOp, mu: float) -> HKernelOp:
    """Operator equal to ``H o D^mu`` (for functions whose ``I^{n-mu}`` vanishes at ``a``)."""
    return _derivative_shift(op, mu)


def shift_Hilfer_after_H(op: HKernelOp, mu: float, nu: float) -> HKernelOp:
    """Operator equal to ``D^{mu,nu} o H``: orders ``(m, n+3, p+3, q+3)`` and ``beta - mu``.

    Follows the factorisation ``I^{nu(1-mu)} o D^{mu+nu-mu nu}``.
    """
    if not 0 < mu < 1:
        raise DomainError("Hilfer order must lie in (0, 1)")
    if not 0 <= nu <= 1:
        raise DomainError("Hilfer type must lie in [0, 1]")
    mp = mu + nu - mu * nu
    n = math.floor(mp) + 1
    b, al = op.beta, op.alpha
    upper = [(1 - b, al), (1 - b - n + mp, al), (1 - b + mp, al)]
    lower = [(1 - b - n + mp, al), (1 - b + mp, al), (1 - b + mu, al)]
    return _extend(op, upper, lower, b - mu)


@dataclass(frozen=True)
class ShiftRule:
    """Metadata of a composition rule.

    ``order_delta`` is the increment of ``(n, p, q)``; ``beta_sign`` is the
    sign with which the order ``mu`` enters ``beta``.
    """

    name: str
    order_delta: tuple[int, int, int]
    beta_sign: int
    gamma_ratio: str
    apply: Callable[..., HKernelOp] = field(compare=False, repr=False)

    def ratio(self, op: HKernelOp, s, mu: float) -> np.ndarray:
        """Declared Mellin factor at the points ``s``."""
        arg = op.beta - op.alpha * np.asarray(s, dtype=np.complex128)
        return specfun.gamma(arg) * specfun.rgamma(arg + self.beta_sign * mu)


_INTEGRAL_RATIO = "Gamma(beta - alpha s) / Gamma(beta + mu - alpha s)"
_DERIVATIVE_RATIO = "Gamma(beta - alpha s) / Gamma(beta - mu - alpha s)"

SHIFT_RULES: dict[str, ShiftRule] = {
    "H_after_I": ShiftRule("H_after_I", (1, 1, 1), 1, _INTEGRAL_RATIO, shift_H_after_I),
    "I_after_H": ShiftRule("I_after_H", (1, 1, 1), 1, _INTEGRAL_RATIO, shift_I_after_H),
    "D_after_H": ShiftRule("D_after_H", (2, 2, 2), -1, _DERIVATIVE_RATIO, shift_D_after_H),
    "H_after_D": ShiftRule("H_after_D", (2, 2, 2), -1, _DERIVATIVE_RATIO, shift_H_after_D),
    "Hilfer_after_H": ShiftRule(
        "Hilfer_after_H", (3, 3, 3), -1, _DERIVATIVE_RATIO, shift_Hilfer_after_H
    ),
}


def mellin_ratio(original: HKernelOp, shifted: HKernelOp, s) -> np.ndarray:
    """``theta_shifted(s) / theta_original(s)``."""
    return mellin_theta(shifted.h, s) / mellin_theta(original.h, s)


# ------------------------------------------------------- theorem kernels


def _series_kernel(op: HKernelOp, mu, dr: np.ndarray, factor) -> np.ndarray:
    """``(x-u)^{mu+beta-1} sum_k Res_k Z^{-s_k} B(mu, beta - alpha s_k) F(c_k) / Gamma(mu)``.

    ``Z = w (x-u)^alpha`` and ``F`` receives ``c_k = beta - alpha s_k`` with
    shape ``(1, K)``. The beta function and ``1/Gamma(mu)`` are absorbed by
    the residues of the ``H o I^mu`` shifted kernel.
    """
    shifted = shift_H_after_I(op, mu).h
    zmax = abs(op.w) * float(np.max(dr)) ** op.alpha
    e, c = residue_terms(shifted, max(zmax, 1e-300))
    logz = np.log(op.w * dr**op.alpha + 0j)
    ck = op.beta + op.alpha * e
    F = factor(ck[None, :])
    terms = c[None, :] * np.exp(logz[:, None] * e[None, :]) * F
    return dr ** (mu + op.beta - 1) * terms.sum(axis=1)


def _k1(op: HKernelOp, gamma, mu, xi, dl, dr) -> np.ndarray:
    dl = np.asarray(dl, dtype=float)
    dr = np.asarray(dr, dtype=float)
    xi = np.broadcast_to(np.asarray(xi, dtype=float), dl.shape)
    a = op.a
    u = a + dl
    one_minus_y = (dl / xi)[:, None]
    if complex(gamma).real > 0:
        # Euler form keeps the factor finite as u -> a
        y = 1.0 - one_minus_y

        def factor(ck):
            return specfun.gauss_2f1(ck - gamma, mu, ck + mu, y)

        if a == 0:
            pre = xi**gamma * xi ** (-mu - gamma)
        else:
            pre = u**gamma * (xi / dl) ** gamma * xi ** (-mu - gamma)
    else:
        y = np.minimum(1.0 - one_minus_y, 1.0 - 2.0**-53)

        def factor(ck):
            return specfun.gauss_2f1(mu + gamma, ck, ck + mu, y)

        pre = u**gamma * xi ** (-mu - gamma)
    return pre * _series_kernel(op, mu, dr, factor)


def _k2(op: HKernelOp, gamma, mu, xi, dl, dr) -> np.ndarray:
    dl = np.asarray(dl, dtype=float)
    dr = np.asarray(dr, dtype=float)
    xi = np.broadcast_to(np.asarray(xi, dtype=float), dl.shape)
    x = op.a + xi
    if np.any(x <= 0):
        raise DomainError("the second composition kernel needs x > 0")
    y = (dr / x)[:, None]

    def factor(ck):
        return specfun.gauss_2f1(-gamma, mu, ck + mu, y)

    pre = xi ** (-mu - gamma) * x**gamma
    return pre * _series_kernel(op, mu, dr, factor)


def _check_kernel_args(op, gamma, mu, x, u):
    if not complex(gamma).real > -1:
        raise DomainError("Re(gamma) must exceed -1")
    if not complex(mu).real > 0:
        raise DomainError("Re(mu) must be positive")
    if not op.a < u < x:
        raise DomainError("kernel needs a < u < x")


def theorem1_kernel(
    op: HKernelOp, gamma, mu, x: float, u: float, method: str = "residue"
) -> complex:
    r"""Kernel ``K(x, u)`` with ``(H o I^{gamma,mu}) phi (x) = int_a^x K(x,u) phi(u) du``.

    .. math::
        K = \frac{u^\gamma (x-a)^{-\mu-\gamma}}{\Gamma(\mu)} \frac{1}{2\pi i}\int
        \theta(s) w^{-s} (x-u)^{\mu+\beta-\alpha s-1} B(\mu, \beta-\alpha s)\,
        {}_2F_1\!\left(\mu+\gamma, \beta-\alpha s; \mu+\beta-\alpha s; \tfrac{x-u}{x-a}\right) ds

    ``method`` selects the residue series over the left poles (default) or
    numerical integration along a vertical line.
    """
    _check_kernel_args(op, gamma, mu, x, u)
    dl, dr, xi = u - op.a, x - u, x - op.a
    if method == "contour":
        y = dr / xi
        pre = u**gamma * xi ** (-mu - gamma)
        return pre * _contour_kernel(op, mu, dr, lambda c: specfun.gauss_2f1(mu + gamma, c, c + mu, y))
    return complex(_k1(op, gamma, mu, xi, np.array([dl]), np.array([dr]))[0])


def theorem2_kernel(
    op: HKernelOp, gamma, mu, x: float, u: float, method: str = "residue"
) -> complex:
    r"""Kernel ``K(x, u)`` with ``(I^{gamma,mu} o H) phi (x) = int_a^x K(x,u) phi(u) du``.

    .. math::
        K = \frac{x^\gamma (x-a)^{-\mu-\gamma}}{\Gamma(\mu)} \frac{1}{2\pi i}\int
        \theta(s) w^{-s} (x-u)^{\mu+\beta-\alpha s-1} B(\mu, \beta-\alpha s)\,
        {}_2F_1\!\left(-\gamma, \mu; \mu+\beta-\alpha s; \tfrac{x-u}{x}\right) ds
    """
    _check_kernel_args(op, gamma, mu, x, u)
    if x <= 0:
        raise DomainError("the second composition kernel needs x > 0")
    dl, dr, xi = u - op.a, x - u, x - op.a
    if method == "contour":
        y = dr / x
        pre = x**gamma * xi ** (-mu - gamma)
        return pre * _contour_kernel(op, mu, dr, lambda c: specfun.gauss_2f1(-gamma, mu, c + mu, y))
    return complex(_k2(op, gamma, mu, xi, np.array([dl]), np.array([dr]))[0])


def _contour_kernel(op: HKernelOp, mu, dr: float, factor) -> complex:
    from hfrac.hfunction import contour_abscissa
    from hfrac.quadrature import integrate_contour

    h = op.h
    logz = np.log(op.w * dr**op.alpha + 0j)

    def g(s):
        c = op.beta - op.alpha * s
        return (
            mellin_theta(h, s)
            * np.exp(-s * logz)
            * specfun.gamma(c)
            * specfun.rgamma(c + mu)
            * factor(c)
        )

    shifted = shift_H_after_I(op, mu)
    val = integrate_contour(g, contour_abscissa(shifted.h), tol=1e-10)
    return dr ** (mu + op.beta - 1) * val


def kernel_integral(
    which: int, op: HKernelOp, gamma, mu, f, x, tol: float = OPERATOR_TOL
):
    """``int_a^x K(x,u) f(u) du`` for the kernel of the first or second theorem."""
    kern = _k1 if which == 1 else _k2
    g = as_local(f, op.a)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    xi = xs - op.a
    out = np.empty(xs.shape, dtype=np.complex128)
    for i, xv in enumerate(xi):

        def integrand(dl, dr, _x=xv):
            shape = dl.shape
            k = kern(op, gamma, mu, _x, dl.ravel(), dr.ravel())
            return (k * np.asarray(g(dl.ravel()), dtype=np.complex128)).reshape(shape)

        out[i] = integrate_endpoints(integrand, xv, tol)
    return complex(out[0]) if np.ndim(x) == 0 else out


# ---------------------------------------------------------- verification


ZERO_SCALE = 1e-6


@dataclass(frozen=True)
class VerificationRow:
    identity: str
    x: float
    lhs: complex
    rhs: complex

    @property
    def abs_err(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def rel_err(self) -> float:
        # exact zeros occur (Caputo of constants), so the scale is floored
        return self.abs_err / max(abs(self.rhs), ZERO_SCALE)


@dataclass(frozen=True)
class VerificationReport:
    """Pointwise comparison of the two sides of an identity."""

    identity: str
    rows: tuple[VerificationRow, ...]
    tol: float

    @property
    def grid(self) -> tuple[float, ...]:
        return tuple(r.x for r in self.rows)

    @property
    def max_rel_err(self) -> float:
        return max((r.rel_err for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= self.tol

    def csv_rows(self) -> list[list[str]]:
        return [
            [
                r.identity,
                f"{r.x:.16e}",
                f"{r.lhs.real:.16e}",
                f"{r.lhs.imag:.16e}",
                f"{r.rhs.real:.16e}",
                f"{r.rhs.imag:.16e}",
                f"{r.abs_err:.16e}",
                f"{r.rel_err:.16e}",
            ]
            for r in self.rows
        ]

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "tol": self.tol,
            "max_rel_err": self.max_rel_err,
            "pass": self.passed,
            "rows": [
                {
                    "identity": r.identity,
                    "x": r.x,
                    "lhs": [r.lhs.real, r.lhs.imag],
                    "rhs": [r.rhs.real, r.rhs.imag],
                    "abs_err": r.abs_err,
                    "rel_err": r.rel_err,
                }
                for r in self.rows
            ],
        }


CSV_COLUMNS = ("identity", "x", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_err", "rel_err")


def reports_to_csv(reports: Sequence[VerificationReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        writer.writerows(rep.csv_rows())
    return buf.getvalue()


def reports_to_json(reports: Sequence[VerificationReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class Orders:
    """Orders used by an identity sweep."""

    mu: float = 0.5
    nu: float = 0.5
    gamma: float = 0.5


def _chains(name: str, op: HKernelOp, o: Orders):
    """``(lhs_chain, rhs_chain)`` for the shift-based identities."""
    K = Kernel(op)
    table = {
        "cor1": ([K, Integral(o.mu)], shift_H_after_I),
        "cor2": ([Integral(o.mu), K], shift_I_after_H),
        "cor3": ([Integral(o.mu), K], shift_I_after_H),
        "cor4": ([K, Integral(o.mu)], shift_H_after_I),
        "cor5": ([K, Derivative(o.mu)], shift_H_after_D),
        "cor6": ([Derivative(o.mu), K], shift_D_after_H),
        "thm3": ([Derivative(o.mu), K], shift_D_after_H),
        "remark2": ([K, Derivative(o.mu)], shift_H_after_D),
    }
    if name == "thm4":
        return [Hilfer(o.mu, o.nu), K], [Kernel(shift_Hilfer_after_H(op, o.mu, o.nu))]
    lhs, shift = table[name]
    return lhs, [Kernel(shift(op, o.mu))]


SHIFT_IDENTITIES = ("cor1", "cor2", "cor3", "cor4", "cor5", "cor6", "thm3", "remark2", "thm4")
IDENTITIES = SHIFT_IDENTITIES[:6] + ("thm1", "thm2", "thm3", "thm4", "remark2", "hilfer-reductions")
# checks that compare the theorem kernels at gamma = 0 with the corollary operators
GAMMA0_CHECKS = ("thm1-gamma0", "thm2-gamma0")


def _pairs(name: str, op: HKernelOp | None, o: Orders, f, grid, tol):
    a = op.a if op is not None else 0.0
    if name in SHIFT_IDENTITIES:
        lhs, rhs = _chains(name, op, o)
        return [(name, apply_chain(lhs, f, a, grid, tol), apply_chain(rhs, f, a, grid, tol))]
    if name in ("thm1", "thm2"):
        which = int(name[-1])
        chain = [Kernel(op), KIntegral(o.gamma, o.mu)]
        if which == 2:
            chain.reverse()
        lhs = apply_chain(chain, f, a, grid, tol)
        return [(name, lhs, kernel_integral(which, op, o.gamma, o.mu, f, grid, tol))]
    if name == "thm1-gamma0":
        lhs = apply_chain([Kernel(op), KIntegral(0.0, o.mu)], f, a, grid, tol)
        rhs = apply_chain([Kernel(shift_H_after_I(op, o.mu))], f, a, grid, tol)
        return [(name, lhs, rhs)]
    if name == "thm2-gamma0":
        lhs = apply_chain([KIntegral(0.0, o.mu), Kernel(op)], f, a, grid, tol)
        rhs = apply_chain([Kernel(shift_I_after_H(op, o.mu))], f, a, grid, tol)
        return [(name, lhs, rhs * (np.asarray(grid, dtype=float) - a) ** (-o.mu))]
    if name == "hilfer-reductions":
        rl = apply_chain([Hilfer(o.mu, 0.0)], f, a, grid, tol)
        rl_ref = apply_chain([Derivative(o.mu)], f, a, grid, tol)
        cap = apply_chain([Hilfer(o.mu, 1.0)], f, a, grid, tol)
        if not hasattr(f, "derivative"):
            raise DomainError("the Caputo oracle needs a test function with a known derivative")
        cap_ref = apply_chain([Integral(1.0 - o.mu)], f.derivative(), a, grid, tol)
        return [(f"{name}/nu0", rl, rl_ref), (f"{name}/nu1", cap, cap_ref)]
    raise DomainError(f"unknown identity {name!r}")


def verify_identity(
    name: str,
    op: HKernelOp | None,
    orders: Orders,
    f,
    grid: Sequence[float],
    tol: float = 1e-4,
    label: str = "",
    quad_tol: float = OPERATOR_TOL,
) -> VerificationReport:
    """Evaluate both sides of identity ``name`` on ``grid`` and compare.

    ``label`` (typically the test function name) is appended to the identity
    column. Mismatches never raise; the report's pass flag carries the verdict.
    """
    grid = [float(x) for x in grid]
    if isinstance(f, TestFunction) and f.tag == "constant" and f.c == 0:
        zero = np.zeros(len(grid), dtype=np.complex128)
        pairs = [(name, zero, zero)]
    else:
        pairs = _pairs(name, op, orders, f, grid, quad_tol)
    suffix = f"/{label}" if label else ""
    rows = tuple(
        VerificationRow(ident + suffix, x, complex(l), complex(r))
        for ident, lhs, rhs in pairs
        for x, l, r in zip(grid, np.atleast_1d(lhs), np.atleast_1d(rhs))
    )
    return VerificationReport(name + suffix, rows, tol)
