r"""Fractional operators with base point ``a``.

* :math:`I^\mu_{a+}` Riemann-Liouville integral
* :math:`D^\mu_{a+}` Riemann-Liouville derivative
* :math:`D^{\mu,\nu}_{a+}` Hilfer derivative
* :math:`I^{\gamma,\mu}_{a+}` power-weighted integral
  :math:`\frac{(x-a)^{-\mu-\gamma}}{\Gamma(\mu)}\int_a^x t^\gamma (x-t)^{\mu-1} f(t)\,dt`
* :math:`\mathcal{H}` convolution with the kernel
  :math:`(x-t)^{\beta-1} H^{m,n}_{p,q}[w (x-t)^\alpha]`

Internally every function is evaluated in the local coordinate
``tau = t - a`` so that endpoint offsets produced by the quadrature stay
exact through nested applications. A *local function* is a vectorised
callable ``g(tau) -> values``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as cheb

from hfrac import specfun
from hfrac.errors import DomainError, InterpolationError
from hfrac.hfunction import HParams, eval_h
from hfrac.quadrature import (
    NODE_FLOOR,
    OPERATOR_TOL,
    UNCHECKED_LENGTH,
    integrate_endpoints,
)

LocalFn = Callable[[np.ndarray], np.ndarray]

CHEB_DEGREE = 20
CHEB_RESIDUAL = 1e-7
_CHEB_NODES = np.cos(np.pi * (np.arange(CHEB_DEGREE + 1) + 0.5) / (CHEB_DEGREE + 1))


# ------------------------------------------------------------ test functions


@dataclass(frozen=True)
class TestFunction:
    """Closed-form functions the identities are exercised on.

    ``tag`` is one of ``constant`` (value ``c``), ``power`` (``(t - center)**lam``),
    ``exponential`` (``exp(k t)``) or ``polynomial`` (``sum coeffs[i] t**i``).
    """

    __test__ = False  # keep pytest from collecting this class

    tag: str
    c: float = 1.0
    lam: float = 0.0
    center: float = 0.0
    k: float = 1.0
    coeffs: tuple[float, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.tag not in ("constant", "power", "exponential", "polynomial"):
            raise DomainError(f"unknown test function tag {self.tag!r}")
        if self.tag == "power" and not self.lam > -1:
            raise DomainError("power exponent must exceed -1")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in self.coeffs))

    @classmethod
    def constant(cls, c: float = 1.0, name: str = "") -> "TestFunction":
        return cls("constant", c=c, name=name)

    @classmethod
    def power(cls, lam: float, center: float = 0.0, name: str = "") -> "TestFunction":
        return cls("power", lam=lam, center=center, name=name)

    @classmethod
    def exponential(cls, k: float = 1.0, name: str = "") -> "TestFunction":
        return cls("exponential", k=k, name=name)

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], name: str = "") -> "TestFunction":
        return cls("polynomial", coeffs=tuple(coeffs), name=name)

    def local(self, a: float) -> LocalFn:
        """The function ``tau -> f(a + tau)``."""
        if self.tag == "power" and self.center == a:
            lam = self.lam
            return lambda tau: np.asarray(tau, dtype=float) ** lam + 0j
        return lambda tau: self(a + np.asarray(tau, dtype=float))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.tag == "constant":
            out = np.full(t.shape, self.c, dtype=np.complex128)
        elif self.tag == "power":
            out = (t - self.center) ** self.lam + 0j
        elif self.tag == "exponential":
            out = np.exp(self.k * t) + 0j
        else:
            out = np.polynomial.polynomial.polyval(t, self.coeffs) + 0j
        return complex(out) if out.ndim == 0 else out

    def derivative(self) -> "TestFunction":
        """Exact first derivative (a constant multiple is folded into ``coeffs``/``c``)."""
        if self.tag == "constant":
            return TestFunction.constant(0.0)
        if self.tag == "exponential":
            return _Scaled(self.k, self)
        if self.tag == "polynomial":
            d = np.polynomial.polynomial.polyder(self.coeffs) if len(self.coeffs) > 1 else [0.0]
            return TestFunction.polynomial(tuple(d))
        if self.lam == 0:
            return TestFunction.constant(0.0)
        return _Scaled(self.lam, TestFunction.power(self.lam - 1, self.center))

    def to_json(self) -> dict:
        doc: dict = {"tag": self.tag}
        if self.name:
            doc["name"] = self.name
        if self.tag == "constant":
            doc["c"] = self.c
        elif self.tag == "power":
            doc["lambda"] = self.lam
            if self.center:
                doc["center"] = self.center
        elif self.tag == "exponential":
            doc["k"] = self.k
        else:
            doc["coeffs"] = list(self.coeffs)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "TestFunction":
        tag = doc.get("tag")
        name = doc.get("name", "")
        if tag == "constant":
            return cls.constant(float(doc.get("c", 1.0)), name)
        if tag == "power":
            return cls.power(float(doc["lambda"]), float(doc.get("center", 0.0)), name)
        if tag == "exponential":
            return cls.exponential(float(doc.get("k", 1.0)), name)
        if tag == "polynomial":
            return cls.polynomial([float(v) for v in doc["coeffs"]], name)
        raise DomainError(f"unknown test function tag {tag!r}")


class _Scaled:
    """``factor * f``; only used for exact derivatives of corpus functions."""

    def __init__(self, factor: float, f) -> None:
        self.factor = factor
        self.f = f

    def local(self, a: float) -> LocalFn:
        g = self.f.local(a)
        return lambda tau: self.factor * g(tau)

    def __call__(self, t):
        return self.factor * self.f(t)


def default_corpus() -> dict[str, TestFunction]:
    """The four-function corpus used by identity sweeps."""
    return {
        "const1": TestFunction.constant(1.0, name="const1"),
        "sqrt": TestFunction.power(0.5, name="sqrt"),
        "exp": TestFunction.exponential(1.0, name="exp"),
        "poly": TestFunction.polynomial((1.0, -2.0, 3.0), name="poly"),
    }


def as_local(f, a: float) -> LocalFn:
    """Wrap a test function or a plain callable of ``t`` as a local function."""
    if hasattr(f, "local"):
        return f.local(a)
    return lambda tau: np.asarray(f(a + np.asarray(tau, dtype=float)), dtype=np.complex128)


# ----------------------------------------------------------- H-kernel op


@dataclass(frozen=True)
class HKernelOp:
    r"""The operator :math:`\mathcal{H}^{w;m,n;\alpha}_{a+;p,q;\beta}`."""

    a: float
    w: complex
    alpha: float
    beta: complex
    h: HParams

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", _num(self.w))
        object.__setattr__(self, "beta", _num(self.beta))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "a", float(self.a))
        if self.w == 0:
            raise DomainError("w must be non-zero")
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        if not complex(self.beta).real > 0:
            raise DomainError("Re(beta) must be positive")
        if not self.kernel_exponent > -1:
            raise DomainError(
                "Re(beta) + min_j Re(alpha b_j / beta_j) must be positive"
            )

    @property
    def kernel_exponent(self) -> float:
        """Exponent of the kernel's leading algebraic behaviour at ``t = x``."""
        lead = min((self.alpha * complex(b) / be).real for b, be in self.h.lower[: self.h.m])
        return complex(self.beta).real + lead - 1.0

    def kernel(self, r: np.ndarray, strip: float = 0.0) -> np.ndarray:
        """``r**(beta-1-strip) H(w r**alpha)`` for distances ``r = x - t > 0``.

        ``strip`` removes a power of ``r`` that the caller integrates exactly.
        """
        r = np.maximum(np.asarray(r, dtype=float), 1e-300)
        z = self.w * r**self.alpha
        return r ** (self.beta - 1 - strip) * eval_h(self.h, z)

    def to_json(self) -> dict:
        doc = self.h.to_json()
        doc.update(a=self.a, w=_enc(self.w), alpha=self.alpha, beta=_enc(self.beta))
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "HKernelOp":
        try:
            return cls(
                float(doc.get("a", 0.0)),
                _dec(doc["w"]),
                float(doc["alpha"]),
                _dec(doc["beta"]),
                HParams.from_json(doc),
            )
        except KeyError as exc:
            raise DomainError(f"operator document lacks {exc}") from exc


def _num(x):
    c = complex(x)
    return c.real if c.imag == 0 else c


def _enc(x):
    c = complex(x)
    return c.real if c.imag == 0 else [c.real, c.imag]


def _dec(v):
    return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else float(v)


# ------------------------------------------------------------- local kernels


def _call_flat(g: LocalFn, tau: np.ndarray) -> np.ndarray:
    return np.asarray(g(tau.ravel()), dtype=np.complex128).reshape(tau.shape)


def _cpow(r: np.ndarray, e: complex) -> np.ndarray:
    """``r**e`` that stays finite where ``r`` underflows to 0 and ``Re(e) >= 0``."""
    if e.imag == 0:
        return r**e.real
    # the phase r**(i Im e) has modulus one; floor r so its log stays finite
    return r**e.real * np.exp(1j * e.imag * np.log(np.maximum(r, 1e-300)))


def _weight_exponent(mu) -> float:
    """Right-endpoint exponent ``Re(mu) - 1`` of the Abel kernel, capped at 0."""
    return min(complex(mu).real - 1.0, 0.0)


def _integral_local(g: LocalFn, mu, xi: np.ndarray, tol: float) -> np.ndarray:
    if mu == 0:
        return np.asarray(g(xi), dtype=np.complex128)

    pw = _weight_exponent(mu)
    e = complex(mu) - 1 - pw

    def integrand(dl, dr):
        return _cpow(dr, e) * _call_flat(g, dl)

    return integrate_endpoints(integrand, xi, tol, pw) * specfun.rgamma(mu)


def _derivative_local(G: LocalFn, order: int, xi: np.ndarray) -> np.ndarray:
    """``order``-th derivative of ``G`` at ``xi`` by Chebyshev interpolation.

    The bracket ``[xi/2, 3xi/2]`` keeps the base point, where ``G`` is
    generally not smooth, at a fixed relative distance.
    """
    xi = np.asarray(xi, dtype=float)
    # x = a is rejected by _finish; such points only arise as zero-weight
    # nodes of an outer integral
    at_base = xi <= NODE_FLOOR
    # closer than UNCHECKED_LENGTH the samples feel the inner node floor, so the
    # fit is not checked there; those nodes carry negligible outer weight
    checked = xi >= UNCHECKED_LENGTH
    xi = np.where(at_base, 1.0, xi)
    half = 0.5 * xi
    samples = xi[:, None] + half[:, None] * _CHEB_NODES[None, :]
    vals = _call_flat(G, samples)
    coef = cheb.chebfit(_CHEB_NODES, vals.T, CHEB_DEGREE)
    scale = np.maximum(np.max(np.abs(coef), axis=0), 1e-300)
    tail = (np.abs(coef[-1]) + np.abs(coef[-2])) / scale
    if np.any((tail > CHEB_RESIDUAL) & checked):
        raise InterpolationError(
            f"Chebyshev interpolant not resolved (tail {float(np.max(tail)):.2e})"
        )
    d = cheb.chebder(coef, order, axis=0)
    return np.where(at_base, 0.0, cheb.chebval(0.0, d) / half**order)


def _sample_tol(tol: float) -> float:
    return max(tol * 1e-3, 1e-13)


def _rl_derivative_local(g: LocalFn, mu, xi: np.ndarray, tol: float) -> np.ndarray:
    n = int(math.floor(complex(mu).real)) + 1
    inner = lambda tau: _integral_local(g, n - mu, tau, _sample_tol(tol))  # noqa: E731
    return _derivative_local(inner, n, xi)


def _hilfer_local(g: LocalFn, mu: float, nu: float, xi: np.ndarray, tol: float) -> np.ndarray:
    rho = (1.0 - nu) * (1.0 - mu)
    kappa = nu * (1.0 - mu)
    inner = lambda tau: _integral_local(g, rho, tau, _sample_tol(tol))  # noqa: E731
    first = lambda tau: _derivative_local(inner, 1, np.asarray(tau, dtype=float))  # noqa: E731
    return _integral_local(first, kappa, xi, tol)


def _ik_local(g: LocalFn, a: float, gamma, mu, xi: np.ndarray, tol: float) -> np.ndarray:
    pw = _weight_exponent(mu)

    def integrand(dl, dr):
        # scale-free form: every factor is O(1) even for tiny intervals
        length = dl + dr
        weight = (dl / length) ** gamma if a == 0 else ((a + dl) / length) ** gamma
        return weight * (dr / length) ** (mu - 1 - pw) * length ** (-1 - pw) * _call_flat(g, dl)

    return integrate_endpoints(integrand, xi, tol, pw) * specfun.rgamma(mu)


def _kernel_local(op: HKernelOp, g: LocalFn, xi: np.ndarray, tol: float) -> np.ndarray:
    pw = min(op.kernel_exponent, 0.0)

    def integrand(dl, dr):
        return op.kernel(dr, pw) * _call_flat(g, dl)

    return integrate_endpoints(integrand, xi, tol, pw)


# ------------------------------------------------------ operator objects


@dataclass(frozen=True)
class Integral:
    """Riemann-Liouville integral of order ``mu``."""

    mu: complex

    def local(self, g: LocalFn, a: float, tol: float = OPERATOR_TOL) -> LocalFn:
        return lambda xi: _integral_local(g, self.mu, np.asarray(xi, dtype=float), tol)


@dataclass(frozen=True)
class Derivative:
    """Riemann-Liouville derivative of order ``mu``."""

    mu: complex

    def local(self, g: LocalFn, a: float, tol: float = OPERATOR_TOL) -> LocalFn:
        return lambda xi: _rl_derivative_local(g, self.mu, np.asarray(xi, dtype=float), tol)


@dataclass(frozen=True)
class Hilfer:
    """Hilfer derivative of order ``0 < mu < 1`` and type ``0 <= nu <= 1``."""

    mu: float
    nu: float

    def local(self, g: LocalFn, a: float, tol: float = OPERATOR_TOL) -> LocalFn:
        return lambda xi: _hilfer_local(g, self.mu, self.nu, np.asarray(xi, dtype=float), tol)


@dataclass(frozen=True)
class KIntegral:
    """The power-weighted integral ``I^{gamma,mu}``."""

    gamma: complex
    mu: complex

    def local(self, g: LocalFn, a: float, tol: float = OPERATOR_TOL) -> LocalFn:
        return lambda xi: _ik_local(g, a, self.gamma, self.mu, np.asarray(xi, dtype=float), tol)


@dataclass(frozen=True)
class Kernel:
    """The H-kernel operator."""

    op: HKernelOp

    def local(self, g: LocalFn, a: float, tol: float = OPERATOR_TOL) -> LocalFn:
        if a != self.op.a:
            raise DomainError("operators in one chain must share the base point")
        return lambda xi: _kernel_local(self.op, g, np.asarray(xi, dtype=float), tol)


Operator = Integral | Derivative | Hilfer | KIntegral | Kernel


def apply_chain(ops: Sequence[Operator], f, a: float, x, tol: float = OPERATOR_TOL):
    """Evaluate ``(ops[0] ops[1] ... ops[-1] f)(x)``, innermost operator last."""
    g = as_local(f, a)
    for op in reversed(ops):
        g = op.local(g, a, tol)
    return _finish(g, a, x, derivative=any(isinstance(o, (Derivative, Hilfer)) for o in ops))


def _finish(g: LocalFn, a: float, x, derivative: bool):
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    xi = xs - a
    if np.any(xi < 0):
        raise DomainError("evaluation point must satisfy x >= a")
    out = np.zeros(xs.shape, dtype=np.complex128)
    live = xi > 0
    if derivative and not np.all(live):
        raise DomainError("derivatives are undefined at x = a")
    if np.any(live):
        out[live] = g(xi[live])
    return complex(out[0]) if np.ndim(x) == 0 else out


# ----------------------------------------------------------- public API


def _check_order(mu) -> None:
    if not complex(mu).real > 0:
        raise DomainError("order must have positive real part")


def rl_integral(f, a: float, mu, x, tol: float = OPERATOR_TOL):
    """Riemann-Liouville fractional integral ``(I^mu_{a+} f)(x)``.

    ``f`` is a :class:`TestFunction` or any vectorised callable of ``t``.
    Returns 0 at ``x == a``.
    """
    _check_order(mu)
    return apply_chain([Integral(mu)], f, a, x, tol)


def rl_derivative(f, a: float, mu, x, tol: float = OPERATOR_TOL):
    """Riemann-Liouville derivative ``(d/dx)^n I^{n-mu} f`` with ``n = floor(Re mu) + 1``.

    The fractional integral is sampled at Chebyshev points around ``x`` and
    the degree-20 interpolant is differentiated.
    """
    _check_order(mu)
    return apply_chain([Derivative(mu)], f, a, x, tol)


def hilfer_derivative(f, a: float, mu: float, nu: float, x, tol: float = OPERATOR_TOL):
    """Hilfer derivative ``I^{nu(1-mu)} d/dx I^{(1-nu)(1-mu)} f``."""
    if not 0 < mu < 1:
        raise DomainError("Hilfer order must lie in (0, 1)")
    if not 0 <= nu <= 1:
        raise DomainError("Hilfer type must lie in [0, 1]")
    return apply_chain([Hilfer(mu, nu)], f, a, x, tol)


def ik_integral(f, a: float, gamma, mu, x, tol: float = OPERATOR_TOL):
    """``(x-a)^{-mu-gamma} / Gamma(mu) * int_a^x t^gamma (x-t)^{mu-1} f(t) dt``."""
    _check_order(mu)
    if not complex(gamma).real > -1:
        raise DomainError("Re(gamma) must exceed -1")
    return apply_chain([KIntegral(gamma, mu)], f, a, x, tol)


def h_kernel_apply(op: HKernelOp, f, x, tol: float = OPERATOR_TOL):
    """Apply the H-kernel operator ``op`` to ``f`` at ``x``."""
    return apply_chain([Kernel(op)], f, op.a, x, tol)
