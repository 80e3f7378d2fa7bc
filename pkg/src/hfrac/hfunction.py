r"""The Fox H-function.

Convention used throughout the package:

.. math::

    H^{m,n}_{p,q}(z) = \frac{1}{2\pi i}\int_L \theta(s)\, z^{-s}\, ds,\qquad
    \theta(s) = \frac{\prod_{j\le m}\Gamma(b_j+\beta_j s)\prod_{j\le n}\Gamma(1-a_j-\alpha_j s)}
                     {\prod_{j>m}\Gamma(1-b_j-\beta_j s)\prod_{j>n}\Gamma(a_j+\alpha_j s)}.

Formulas written with :math:`\varphi(\xi) z^{+\xi}` translate through
:math:`\xi = -s`; that translation happens at the call sites in
:mod:`hfrac.compose` and nowhere else.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hfrac import specfun
from hfrac.errors import (
    ConvergenceError,
    DivergentError,
    DomainError,
    PoleCollisionError,
    PoleError,
)
from hfrac.quadrature import ContourSpec, integrate_contour

MAX_POLES = 500
RESIDUE_RTOL = 1e-14
COLLISION_TOL = 1e-9


def _num(x):
    c = complex(x)
    return c.real if c.imag == 0.0 else c


@dataclass(frozen=True)
class HParams:
    """Orders and parameter pairs of :math:`H^{m,n}_{p,q}`.

    ``upper`` holds the pairs ``(a_j, alpha_j)``, ``lower`` the pairs
    ``(b_j, beta_j)``; ``p`` and ``q`` are their lengths.
    """

    m: int
    n: int
    upper: tuple[tuple[complex | float, float], ...]
    lower: tuple[tuple[complex | float, float], ...]

    def __post_init__(self) -> None:
        up = tuple((_num(a), float(al)) for a, al in self.upper)
        lo = tuple((_num(b), float(be)) for b, be in self.lower)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "lower", lo)
        if not 1 <= self.m <= len(lo):
            raise DomainError(f"need 1 <= m <= q, got m={self.m}, q={len(lo)}")
        if not 0 <= self.n <= len(up):
            raise DomainError(f"need 0 <= n <= p, got n={self.n}, p={len(up)}")
        if any(al <= 0 for _, al in up) or any(be <= 0 for _, be in lo):
            raise DomainError("all alpha_j and beta_j must be positive")

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    @property
    def orders(self) -> tuple[int, int, int, int]:
        return (self.m, self.n, self.p, self.q)

    @property
    def Delta(self) -> float:
        return sum(be for _, be in self.lower) - sum(al for _, al in self.upper)

    @property
    def delta(self) -> float:
        return math.prod(al**-al for _, al in self.upper) * math.prod(
            be**be for _, be in self.lower
        )

    @property
    def a_star(self) -> float:
        up, lo = self.upper, self.lower
        return (
            sum(al for _, al in up[: self.n])
            - sum(al for _, al in up[self.n :])
            + sum(be for _, be in lo[: self.m])
            - sum(be for _, be in lo[self.m :])
        )

    def left_pole_max(self) -> float:
        """Largest real part among the poles of ``Gamma(b_j + beta_j s)``, j <= m."""
        return max((-complex(b) / be).real for b, be in self.lower[: self.m])

    def right_pole_min(self) -> float:
        """Smallest real part among the poles of ``Gamma(1 - a_j - alpha_j s)``, j <= n."""
        if self.n == 0:
            return math.inf
        return min(((1 - complex(a)) / al).real for a, al in self.upper[: self.n])

    def to_json(self) -> dict:
        def enc(v):
            c = complex(v)
            return c.real if c.imag == 0 else [c.real, c.imag]

        return {
            "m": self.m,
            "n": self.n,
            "upper": [[enc(a), al] for a, al in self.upper],
            "lower": [[enc(b), be] for b, be in self.lower],
        }

    @classmethod
    def from_json(cls, data: dict) -> "HParams":
        def dec(v):
            return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else float(v)

        try:
            return cls(
                int(data["m"]),
                int(data["n"]),
                tuple((dec(a), float(al)) for a, al in data.get("upper", [])),
                tuple((dec(b), float(be)) for b, be in data.get("lower", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed HParams document: {exc}") from exc


# ------------------------------------------------------------------- theta


def _theta_parts(params: HParams, s: np.ndarray):
    num = []
    den = []
    for j, (b, be) in enumerate(params.lower):
        (num if j < params.m else den).append(b + be * s if j < params.m else 1 - b - be * s)
    for j, (a, al) in enumerate(params.upper):
        (num if j < params.n else den).append(1 - a - al * s if j < params.n else a + al * s)
    return num, den


def mellin_theta(params: HParams, s):
    """Gamma-product integrand ``theta(s)`` of the Mellin-Barnes representation.

    Raises :class:`PoleError` when ``s`` hits a pole of a numerator factor.
    Empty products contribute 1.
    """
    ss = np.asarray(s, dtype=np.complex128)
    num, den = _theta_parts(params, ss)
    out = np.ones_like(ss)
    for arg in num:
        out = out * specfun.gamma(arg)
    for arg in den:
        out = out * specfun.rgamma(arg)
    return complex(out) if np.ndim(s) == 0 else out


# ------------------------------------------------------------ convergence


class Convergence(str, enum.Enum):
    RESIDUE_LEFT = "residue-series-left"
    RESIDUE_RIGHT = "residue-series-right"
    CONTOUR_ONLY = "contour-only"
    DIVERGENT = "divergent"


# Delta = 0 series slow down near |z| = delta; leave that band to the contour
_BOUNDARY_BAND = 0.05


def _contour_ok(params: HParams, z: complex) -> bool:
    a_star = params.a_star
    return a_star > 0 and abs(np.angle(z)) < a_star * math.pi / 2 and (
        params.left_pole_max() < params.right_pole_min()
    )


def check_convergence(params: HParams, z) -> Convergence:
    """Classify how ``H(z)`` can be evaluated.

    Uses ``Delta = sum(beta) - sum(alpha)``, ``delta = prod alpha^-alpha prod beta^beta``
    and the contour aperture ``a*``. The classification is conservative: near
    the ``|z| = delta`` boundary of the ``Delta = 0`` case it prefers the contour.
    """
    z = complex(z)
    if z == 0:
        return Convergence.DIVERGENT
    D = params.Delta
    if abs(D) < 1e-14:
        D = 0.0
    if D > 0:
        return Convergence.RESIDUE_LEFT
    if D < 0:
        if params.n >= 1:
            return Convergence.RESIDUE_RIGHT
        return Convergence.CONTOUR_ONLY if _contour_ok(params, z) else Convergence.DIVERGENT
    ratio = abs(z) / params.delta
    if ratio < 1 - _BOUNDARY_BAND:
        return Convergence.RESIDUE_LEFT
    if ratio > 1 + _BOUNDARY_BAND and params.n >= 1:
        return Convergence.RESIDUE_RIGHT
    return Convergence.CONTOUR_ONLY if _contour_ok(params, z) else Convergence.DIVERGENT


_KIND_ORDER = (
    Convergence.RESIDUE_LEFT,
    Convergence.RESIDUE_RIGHT,
    Convergence.CONTOUR_ONLY,
    Convergence.DIVERGENT,
)


def _classify(params: HParams, z: np.ndarray) -> np.ndarray:
    """Vectorised :func:`check_convergence`, returning indices into ``_KIND_ORDER``."""
    D = params.Delta
    if abs(D) < 1e-14:
        D = 0.0
    if D > 0:
        return np.zeros(z.shape, dtype=int)
    if D < 0 and params.n >= 1:
        return np.ones(z.shape, dtype=int)
    out = np.full(z.shape, 3, dtype=int)
    a_star = params.a_star
    if a_star > 0 and params.left_pole_max() < params.right_pole_min():
        out[np.abs(np.angle(z)) < a_star * math.pi / 2] = 2
    if D == 0:
        ratio = np.abs(z) / params.delta
        out[ratio < 1 - _BOUNDARY_BAND] = 0
        if params.n >= 1:
            out[ratio > 1 + _BOUNDARY_BAND] = 1
    return out


# -------------------------------------------------------- residue tables


@dataclass(frozen=True)
class _Family:
    """Residue coefficients of one pole family.

    ``H`` restricted to this family equals ``sum_k c_k z^(offset + step k)``.
    """

    offset: complex
    step: float
    log_coef: np.ndarray  # log |c_k| as complex logs, -inf for vanishing terms
    zero: np.ndarray  # c_k == 0 exactly (pole of a denominator gamma)
    collision: np.ndarray  # another numerator gamma is singular at this pole


def _near_pole(arg: np.ndarray) -> np.ndarray:
    r = np.round(arg.real)
    return (r <= 0) & (np.abs(arg - r) <= COLLISION_TOL * np.maximum(1.0, np.abs(arg)))


def _family_table(params: HParams, side: str, j: int) -> _Family:
    k = np.arange(MAX_POLES, dtype=float)
    if side == "left":
        b, be = params.lower[j]
        s = -(b + k) / be
        logc = -specfun._lngamma_raw((k + 1).astype(np.complex128)) - math.log(be)
        offset, step = complex(b) / be, 1.0 / be
    else:
        a, al = params.upper[j]
        s = (1 - a + k) / al
        logc = -specfun._lngamma_raw((k + 1).astype(np.complex128)) - math.log(al)
        offset, step = -(1 - complex(a)) / al, -1.0 / al
    s = np.asarray(s, dtype=np.complex128)
    logc = logc + 1j * math.pi * (k % 2)
    zero = np.zeros(k.shape, dtype=bool)
    collision = np.zeros(k.shape, dtype=bool)

    def add(arg: np.ndarray, numerator: bool) -> None:
        nonlocal logc
        pole = _near_pole(arg)
        safe = np.where(pole, 0.5, arg)
        if numerator:
            collision[:] |= pole
            logc = logc + specfun._lngamma_raw(safe)
        else:
            zero[:] |= pole
            logc = logc - specfun._lngamma_raw(safe)

    for i, (bi, bei) in enumerate(params.lower):
        if side == "left" and i == j:
            continue
        if i < params.m:
            add(bi + bei * s, True)
        else:
            add(1 - bi - bei * s, False)
    for i, (ai, ali) in enumerate(params.upper):
        if side == "right" and i == j:
            continue
        if i < params.n:
            add(1 - ai - ali * s, True)
        else:
            add(ai + ali * s, False)
    logc = np.where(zero, -np.inf + 0j, logc)
    return _Family(offset, step, logc, zero, collision)


@functools.lru_cache(maxsize=256)
def _tables(params: HParams, side: str) -> tuple[_Family, ...]:
    count = params.m if side == "left" else params.n
    return tuple(_family_table(params, side, j) for j in range(count))


def _sum_family(fam: _Family, z: np.ndarray) -> np.ndarray:
    logz = np.log(z)
    logy = fam.step * logz
    # Horner in y / R keeps every intermediate bounded
    log_r = float(np.max(logy.real))
    mags = fam.log_coef.real + np.arange(MAX_POLES) * log_r
    mags = np.where(fam.zero, -np.inf, mags)
    peak = np.max(mags)
    if not np.isfinite(peak):
        return np.zeros_like(z)
    significant = np.flatnonzero(mags > peak + math.log(RESIDUE_RTOL) - 2.0)
    last = int(significant[-1])
    if last >= MAX_POLES - 3:
        raise ConvergenceError(f"residue series needs more than {MAX_POLES} poles")
    K = last + 3
    if np.any(fam.collision[:K]):
        raise PoleCollisionError("coincident numerator poles (logarithmic case)")
    k = np.arange(K)
    scaled = np.exp(fam.log_coef[:K] + k * log_r)
    scaled = np.where(fam.zero[:K], 0.0, scaled)
    y = np.exp(logy - log_r)
    if (
        not np.any(z.imag)
        and np.all(z.real > 0)
        and np.all(np.abs(scaled.imag) <= 1e-13 * np.abs(scaled.real))
    ):
        # real data: the imaginary parts are rounding noise, and real
        # arithmetic is several times cheaper on this hot path
        yr = y.real
        acc_r = np.zeros(z.shape)
        for c in scaled.real[::-1]:
            acc_r = acc_r * yr + c
        return np.exp(fam.offset * logz) * acc_r
    acc = np.zeros_like(z)
    for c in scaled[::-1]:
        acc = acc * y + c
    return np.exp(fam.offset * logz) * acc


@functools.lru_cache(maxsize=256)
def cancel_pairs(params: HParams) -> HParams:
    """Drop gamma factors that appear identically in numerator and denominator.

    The Mellin integrand, ``Delta``, ``delta`` and the aperture are unchanged;
    evaluation becomes cheaper and spurious pole collisions disappear.
    """
    up_first = list(params.upper[: params.n])
    up_rest = list(params.upper[params.n :])
    lo_first = list(params.lower[: params.m])
    lo_rest = list(params.lower[params.m :])
    for pair in list(up_first):
        if pair in lo_rest:
            up_first.remove(pair)
            lo_rest.remove(pair)
    for pair in list(lo_first):
        if len(lo_first) > 1 and pair in up_rest:
            lo_first.remove(pair)
            up_rest.remove(pair)
    if len(up_first) + len(up_rest) == params.p:
        return params
    return HParams(
        len(lo_first), len(up_first), tuple(up_first + up_rest), tuple(lo_first + lo_rest)
    )


def residue_series(params: HParams, z, side: str = "left"):
    """Sum the residues of one side's numerator poles (``side`` is 'left' or 'right')."""
    zz = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if np.any(zz == 0):
        raise DomainError("H-function argument must be non-zero")
    out = np.zeros_like(zz)
    for fam in _tables(cancel_pairs(params), side):
        out = out + _sum_family(fam, zz)
    return complex(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))


def residue_terms(params: HParams, zmax: float, side: str = "left"):
    """Individual residue terms ``(e_k, c_k)`` with ``H(z) = sum_k c_k z**e_k``.

    Terms are truncated so that the tail is negligible for every ``|z| <= zmax``.
    Useful when each residue has to be multiplied by an extra factor that
    depends on the pole location ``s_k = -e_k``.
    """
    params = cancel_pairs(params)
    log_r = math.log(zmax)
    exps, coefs = [], []
    for fam in _tables(params, side):
        k = np.arange(MAX_POLES)
        e = fam.offset + fam.step * k
        mags = np.where(fam.zero, -np.inf, fam.log_coef.real + e.real * log_r)
        peak = np.max(mags)
        if not np.isfinite(peak):
            continue
        significant = np.flatnonzero(mags > peak + math.log(RESIDUE_RTOL) - 2.0)
        last = int(significant[-1])
        if last >= MAX_POLES - 3:
            raise ConvergenceError(f"residue series needs more than {MAX_POLES} poles")
        K = last + 3
        if np.any(fam.collision[:K]):
            raise PoleCollisionError("coincident numerator poles (logarithmic case)")
        keep = ~fam.zero[:K]
        exps.append(e[:K][keep])
        coefs.append(np.exp(fam.log_coef[:K][keep]))
    if not exps:
        return np.zeros(0, dtype=np.complex128), np.zeros(0, dtype=np.complex128)
    return (
        np.concatenate(exps).astype(np.complex128),
        np.concatenate(coefs).astype(np.complex128),
    )


def contour_abscissa(params: HParams) -> float:
    lo, hi = params.left_pole_max(), params.right_pole_min()
    if not lo < hi:
        raise DomainError("no vertical line separates the two pole families")
    if math.isinf(hi):
        return lo + 1.0
    return 0.5 * (lo + hi)


def eval_h_contour(params: HParams, z, tol: float = 1e-12, abscissa: float | None = None):
    """Evaluate ``H(z)`` by direct Mellin-Barnes integration along a vertical line."""
    c = contour_abscissa(params) if abscissa is None else abscissa
    zz = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    out = np.empty_like(zz)
    for i, zi in enumerate(zz):
        logz = np.log(zi)
        out[i] = integrate_contour(
            lambda s, _l=logz: mellin_theta(params, s) * np.exp(-s * _l), ContourSpec(c), tol
        )
    return complex(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))


def eval_h(params: HParams, z):
    r"""Evaluate :math:`H^{m,n}_{p,q}(z)`.

    Residue series are preferred whenever :func:`check_convergence` allows
    them; otherwise the Mellin-Barnes integral is computed numerically.
    Vectorised over ``z``; the classification is made per element.

    Raises
    ------
    DivergentError
        When no representation converges at ``z``.
    PoleCollisionError
        When numerator poles coincide and the contour integral does not
        converge either (logarithmic residues are not summed).
    """
    zz = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if np.any(zz == 0):
        raise DomainError("H-function argument must be non-zero")
    flat = zz.ravel()
    params = cancel_pairs(params)
    kinds = _classify(params, flat)
    out = np.empty(flat.size, dtype=np.complex128)
    for code, kind in enumerate(_KIND_ORDER):
        sel = kinds == code
        if not np.any(sel):
            continue
        if kind is Convergence.DIVERGENT:
            raise DivergentError(f"H-function diverges at z={flat[sel][0]}")
        if kind is Convergence.CONTOUR_ONLY:
            out[sel] = eval_h_contour(params, flat[sel])
            continue
        side = "left" if kind is Convergence.RESIDUE_LEFT else "right"
        try:
            out[sel] = residue_series(params, flat[sel], side)
        except PoleCollisionError:
            # logarithmic residues are not summed; the contour handles double poles
            if not all(_contour_ok(params, zi) for zi in flat[sel]):
                raise
            out[sel] = eval_h_contour(params, flat[sel])
    out = out.reshape(zz.shape)
    return complex(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))


# ------------------------------------------------------------- templates


def exponential_template() -> HParams:
    """``H^{1,0}_{0,1}[z | -; (0,1)] = exp(-z)``."""
    return HParams(1, 0, (), ((0.0, 1.0),))


def mittag_leffler_template(alpha: float, beta: float) -> HParams:
    """``E_{alpha,beta}(z) = H^{1,1}_{1,2}[-z | (0,1); (0,1), (1-beta, alpha)]``."""
    return HParams(1, 1, ((0.0, 1.0),), ((0.0, 1.0), (1.0 - beta, alpha)))


def lambda_template(eta: float, mu: float, nu: float) -> HParams:
    """H^{2,0}_{1,2} form of the generalised Macdonald function."""
    return HParams(
        2,
        0,
        ((1.0 - (nu + 1.0) / eta, 1.0 / eta),),
        ((0.0, 1.0), (-mu - nu / eta, 1.0 / eta)),
    )


@dataclass(frozen=True)
class Reduction:
    """Outcome of :func:`reduce_to_known`.

    The original function equals ``z**shift / scale * F(z**(1/scale))`` where
    ``F`` is the named special function with ``args``.
    """

    kind: str  # "exponential" | "mittag_leffler" | "lambda"
    args: tuple[float, ...]
    shift: complex = 0.0
    scale: float = 1.0

    def evaluate(self, z):
        zz = np.asarray(z, dtype=np.complex128)
        y = zz ** (1.0 / self.scale)
        if self.kind == "exponential":
            core = np.exp(-y)
        elif self.kind == "mittag_leffler":
            alpha, beta = self.args
            core = specfun.mittag_leffler(alpha, beta, -y)
        else:
            eta, mu, nu = self.args
            core = np.array(
                [specfun.lambda_fn(specfun.LambdaParams(eta, mu, nu, yi)) for yi in np.ravel(y)]
            ).reshape(np.shape(y))
        out = zz**self.shift / self.scale * core
        return complex(out) if np.ndim(z) == 0 else out


def _close(x, y, tol: float = 1e-12) -> bool:
    return abs(complex(x) - complex(y)) <= tol * max(1.0, abs(complex(y)))


def _normalise(params: HParams, first: int) -> tuple[HParams, complex, float]:
    b, k = params.lower[first]
    sigma = -complex(b) / k
    up = tuple((_num(a + sigma * al), al / k) for a, al in params.upper)
    lo = tuple((_num(bb + sigma * be), be / k) for bb, be in params.lower)
    return HParams(params.m, params.n, up, lo), -sigma, k


def reduce_to_known(params: HParams) -> Reduction | None:
    """Recognise the exponential, Mittag-Leffler and lambda templates.

    Matching is up to the translation ``(a_j, b_j) -> (a_j + c alpha_j, b_j + c beta_j)``
    and a common rescaling of all ``alpha_j, beta_j``.
    """
    orders = params.orders
    if orders == (1, 0, 0, 1):
        _, shift, scale = _normalise(params, 0)
        return Reduction("exponential", (), shift, scale)
    if orders == (1, 1, 1, 2):
        norm, shift, scale = _normalise(params, 0)
        (a1, al1), = norm.upper
        (b2, be2) = norm.lower[1]
        if _close(a1, 0.0) and _close(al1, 1.0) and complex(b2).imag == 0:
            return Reduction("mittag_leffler", (be2, 1.0 - complex(b2).real), shift, scale)
        return None
    if orders == (2, 0, 1, 2):
        for first in (0, 1):
            norm, shift, scale = _normalise(params, first)
            (a1, al1), = norm.upper
            b2, be2 = norm.lower[1 - first]
            if not _close(al1, be2):
                continue
            eta = 1.0 / al1
            nu = (1.0 - complex(a1).real) * eta - 1.0
            mu = -complex(b2).real - nu / eta
            if complex(a1).imag or complex(b2).imag or not mu > 1.0 / eta - 1.0:
                continue
            return Reduction("lambda", (eta, mu, nu), shift, scale)
    return None


def params_from_pairs(
    m: int, n: int, upper: Sequence[Sequence[float]], lower: Sequence[Sequence[float]]
) -> HParams:
    return HParams(m, n, tuple(tuple(p) for p in upper), tuple(tuple(p) for p in lower))
