r"""Complex special functions: log-gamma, beta, Gauss :math:`{}_2F_1`,
Mittag-Leffler and the generalised Macdonald function :math:`\lambda^{(\eta)}_{\mu,\nu}`.

Every routine accepts Python scalars or numpy arrays and broadcasts. Scalar
inputs give a Python ``complex`` back, array inputs a ``complex128`` array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hfrac.errors import ConvergenceError, DomainError, PoleError

MAX_TERMS = 10_000

# Lanczos coefficients, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)

# B_{2k} / (2k) for the digamma asymptotic series
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def _wrap(out: np.ndarray, scalar: bool):
    return complex(out) if scalar else out


def _as_complex(*args):
    arrs = np.broadcast_arrays(*[np.asarray(x, dtype=np.complex128) for x in args])
    scalar = all(np.ndim(x) == 0 for x in args)
    return [np.array(x, dtype=np.complex128) for x in arrs], scalar


def _is_nonpositive_integer(z: np.ndarray) -> np.ndarray:
    return (z.imag == 0.0) & (z.real <= 0.0) & (z.real == np.round(z.real))


def _sinpi(z: np.ndarray) -> np.ndarray:
    # reduce the real part so that sin(pi z) vanishes exactly at the integers
    k = np.round(z.real)
    sign = np.where(np.mod(k, 2.0) == 0.0, 1.0, -1.0)
    return sign * np.sin(np.pi * (z - k))


def _log_sinpi(z: np.ndarray) -> np.ndarray:
    k = np.round(z.real)
    r = z - k
    out = np.empty_like(z)
    big = np.abs(r.imag) > 20.0
    small = ~big
    out[small] = np.log(np.sin(np.pi * r[small]))
    if np.any(big):
        rb = r[big]
        s = np.sign(rb.imag)
        # sin(pi r) ~ s * exp(-i s pi r) / (2i) for large |Im r|
        out[big] = -1j * s * np.pi * rb + np.log(s / 2j) + np.log1p(-np.exp(2j * s * np.pi * rb))
    return out + 1j * np.pi * np.mod(k, 2.0)


def _lanczos_lngamma(z: np.ndarray) -> np.ndarray:
    zm = z - 1.0
    acc = np.full_like(zm, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        acc = acc + _LANCZOS[i] / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(acc)


def _lngamma_raw(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    right = z.real >= 0.5
    out[right] = _lanczos_lngamma(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = _LOG_PI - _log_sinpi(zl) - _lanczos_lngamma(1.0 - zl)
    return out


def ln_gamma(z):
    """Logarithm of the gamma function.

    For ``Re(z) >= 0.5`` the value is the principal branch. Left of that line
    the reflection formula is used, which agrees with the principal branch up
    to an integer multiple of ``2*pi*i``; ``exp(ln_gamma(z))`` is exact either way.

    Raises
    ------
    PoleError
        If any ``z`` is a non-positive integer.
    """
    (zz,), scalar = _as_complex(z)
    if np.any(_is_nonpositive_integer(zz)):
        raise PoleError("ln_gamma evaluated at a non-positive integer")
    return _wrap(_lngamma_raw(zz), scalar)


def gamma(z):
    """Gamma function; raises :class:`PoleError` at the poles."""
    (zz,), scalar = _as_complex(z)
    if np.any(_is_nonpositive_integer(zz)):
        raise PoleError("gamma evaluated at a non-positive integer")
    out = np.empty_like(zz)
    right = zz.real >= 0.5
    out[right] = np.exp(_lanczos_lngamma(zz[right]))
    left = ~right
    if np.any(left):
        zl = zz[left]
        out[left] = np.pi / (_sinpi(zl) * np.exp(_lanczos_lngamma(1.0 - zl)))
    return _wrap(out, scalar)


def rgamma(z):
    """Reciprocal gamma function, an entire function (zero at the poles of gamma)."""
    (zz,), scalar = _as_complex(z)
    out = np.empty_like(zz)
    right = zz.real >= 0.5
    out[right] = np.exp(-_lanczos_lngamma(zz[right]))
    left = ~right
    if np.any(left):
        zl = zz[left]
        out[left] = _sinpi(zl) * np.exp(_lanczos_lngamma(1.0 - zl)) / np.pi
    return _wrap(out, scalar)


def digamma(z):
    """Logarithmic derivative of the gamma function."""
    (zz,), scalar = _as_complex(z)
    if np.any(_is_nonpositive_integer(zz)):
        raise PoleError("digamma evaluated at a non-positive integer")
    out = np.zeros_like(zz)
    refl = zz.real < 0.5
    w = np.where(refl, 1.0 - zz, zz)
    # pi*cot(pi z) for the reflected entries
    corr = np.zeros_like(zz)
    if np.any(refl):
        zr = zz[refl]
        corr[refl] = np.pi * np.cos(np.pi * (zr - np.round(zr.real))) / _sinpi(zr) * np.where(
            np.mod(np.round(zr.real), 2.0) == 0.0, 1.0, -1.0
        )
    shift = np.zeros_like(zz)
    while True:
        small = w.real < 10.0
        if not np.any(small):
            break
        shift[small] -= 1.0 / w[small]
        w = np.where(small, w + 1.0, w)
    inv2 = 1.0 / (w * w)
    series = np.zeros_like(zz)
    p = inv2.copy()
    for c in _DIGAMMA_ASYMPTOTIC:
        series += c * p
        p = p * inv2
    out = np.log(w) - 0.5 / w - series + shift
    out = np.where(refl, out - corr, out)
    return _wrap(out, scalar)


def beta(a, b):
    """Euler beta function ``Gamma(a) Gamma(b) / Gamma(a + b)``.

    The formula is symmetric in its arguments by construction, so
    ``beta(a, b) == beta(b, a)`` holds bit for bit.
    """
    (aa, bb), scalar = _as_complex(a, b)
    if np.any(_is_nonpositive_integer(aa) | _is_nonpositive_integer(bb)):
        raise PoleError("beta evaluated at a pole of gamma")
    # gamma(a) * gamma(b) is commutative in floating point, the sum too
    out = gamma(aa) * gamma(bb) * rgamma(aa + bb)
    return _wrap(out, scalar)


# --------------------------------------------------------------------- 2F1


def _f21_series(a, b, c, z):
    s = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    small_run = np.zeros(z.shape, dtype=int)
    for k in range(MAX_TERMS):
        if not np.any(active):
            return s
        term = np.where(active, term * (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z, 0.0)
        s = s + term
        tiny = np.abs(term) <= 1e-17 * np.abs(s)
        small_run = np.where(tiny, small_run + 1, 0)
        active &= ~((small_run >= 2) | (term == 0.0))
    raise ConvergenceError(f"2F1 series did not converge within {MAX_TERMS} terms")


def _f21_near_one_generic(a, b, c, z):
    w = 1.0 - z
    s = c - a - b
    t1 = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b)
    t2 = gamma(c) * gamma(-s) * rgamma(a) * rgamma(b)
    f1 = _f21_series(a, b, 1.0 - s, w)
    f2 = _f21_series(c - a, c - b, 1.0 + s, w)
    return t1 * f1 + t2 * w**s * f2


def _f21_near_one_log(a, b, m: int, z):
    """Logarithmic case ``c = a + b + m`` with integer ``m >= 0``."""
    w = 1.0 - z
    lw = np.log(w)
    c = a + b + m
    pre = gamma(c)
    out = np.zeros_like(z)
    if m > 0:
        fin = np.zeros_like(z)
        term = np.ones_like(z)
        for n in range(m):
            fin = fin + term
            if n + 1 < m:
                term = term * (a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n)) * w
        out = out + math.gamma(m) * pre * rgamma(a + m) * rgamma(b + m) * fin
    # infinite logarithmic series
    coef = np.ones_like(z) / math.factorial(m)
    psi1 = digamma(np.complex128(1.0))
    psim = digamma(np.complex128(m + 1.0))
    psia = digamma(a + m)
    psib = digamma(b + m)
    acc = np.zeros_like(z)
    small_run = np.zeros(z.shape, dtype=int)
    for n in range(MAX_TERMS):
        term = coef * (lw - psi1 - psim + psia + psib)
        acc = acc + term
        tiny = np.abs(term) <= 1e-17 * np.abs(acc)
        small_run = np.where(tiny | (coef == 0.0), small_run + 1, 0)
        if np.all(small_run >= 2):
            break
        coef = coef * (a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * w
        psi1 = psi1 + 1.0 / (n + 1.0)
        psim = psim + 1.0 / (n + m + 1.0)
        psia = psia + 1.0 / (a + m + n)
        psib = psib + 1.0 / (b + m + n)
    else:
        raise ConvergenceError("logarithmic 2F1 series did not converge")
    sign = -((-1.0) ** m)
    # -(z - 1)^m = -(-1)^m w^m
    out = out + sign * w**m * pre * rgamma(a) * rgamma(b) * acc
    return out


def _f21_near_one(a, b, c, z):
    s = c - a - b
    m = np.round(s.real)
    degenerate = (np.abs(s.imag) < 1e-12) & (np.abs(s.real - m) < 1e-10)
    out = np.empty_like(z)
    gen = ~degenerate
    if np.any(gen):
        out[gen] = _f21_near_one_generic(a[gen], b[gen], c[gen], z[gen])
    for mv in np.unique(m[degenerate]):
        sel = degenerate & (m == mv)
        mi = int(mv)
        if mi >= 0:
            out[sel] = _f21_near_one_log(a[sel], b[sel], mi, z[sel])
        else:
            # Euler transformation moves c - a - b to -m > 0
            aa, bb, cc, zz = a[sel], b[sel], c[sel], z[sel]
            out[sel] = (1.0 - zz) ** mi * _f21_near_one_log(cc - aa, cc - bb, -mi, zz)
    return out


def _f21(a, b, c, z, depth: int = 0):
    out = np.empty_like(z)
    todo = np.ones(z.shape, dtype=bool)
    term = (_is_nonpositive_integer(a) & (a.real > -MAX_TERMS)) | (
        _is_nonpositive_integer(b) & (b.real > -MAX_TERMS)
    )
    direct = todo & (term | (np.abs(z) <= 0.8))
    if np.any(direct):
        out[direct] = _f21_series(a[direct], b[direct], c[direct], z[direct])
    todo &= ~direct
    near = todo & (np.abs(1.0 - z) <= 0.5) & (z != 1.0)
    if np.any(near):
        out[near] = _f21_near_one(a[near], b[near], c[near], z[near])
    todo &= ~near
    at_one = todo & (z == 1.0)
    if np.any(at_one):
        aa, bb, cc = a[at_one], b[at_one], c[at_one]
        if np.any((cc - aa - bb).real <= 0):
            raise ConvergenceError("2F1 diverges at z = 1 when Re(c - a - b) <= 0")
        out[at_one] = gamma(cc) * gamma(cc - aa - bb) * rgamma(cc - aa) * rgamma(cc - bb)
    todo &= ~at_one
    if np.any(todo):
        zz = z[todo]
        w = zz / (zz - 1.0)
        pfaff = np.abs(w) <= 0.8
        pfaff |= (zz.imag == 0.0) & (zz.real < 0.0)
        if not np.all(pfaff) or depth > 0:
            raise ConvergenceError("2F1 argument outside the supported region")
        aa, bb, cc = a[todo], b[todo], c[todo]
        out[todo] = (1.0 - zz) ** (-aa) * _f21(aa, cc - bb, cc, w, depth + 1)
    return out


def gauss_2f1(a, b, c, z):
    r"""Gauss hypergeometric function :math:`{}_2F_1(a, b; c; z)`.

    Supported region: the disc ``|z| <= 0.8`` (direct series), a disc of
    radius 0.5 around ``z = 1`` (connection formula, including the
    logarithmic cases where ``c - a - b`` is an integer), and the negative
    real axis together with ``|z/(z-1)| <= 0.8`` (Pfaff transformation).

    Raises
    ------
    PoleError
        If ``c`` is a non-positive integer.
    ConvergenceError
        If the argument lies outside the supported region or a series needs
        more than ``MAX_TERMS`` terms.
    """
    (aa, bb, cc, zz), scalar = _as_complex(a, b, c, z)
    if np.any(_is_nonpositive_integer(cc)):
        raise PoleError("2F1 parameter c is a non-positive integer")
    return _wrap(_f21(aa, bb, cc, zz), scalar)


# ------------------------------------------------------------ Mittag-Leffler

ML_MAX_ARGUMENT = 5.0


def mittag_leffler(alpha: float, beta, z):
    r"""Two-parameter Mittag-Leffler function :math:`E_{\alpha,\beta}(z)`.

    Summed from its power series, which is only used for ``|z| <= 5``.
    """
    if not alpha > 0:
        raise DomainError("Mittag-Leffler requires alpha > 0")
    (bb, zz), scalar = _as_complex(beta, z)
    if np.any(np.abs(zz) > ML_MAX_ARGUMENT):
        raise DomainError(f"|z| > {ML_MAX_ARGUMENT} is outside the series-stable range")
    out = np.asarray(rgamma(bb), dtype=np.complex128)
    nz = zz != 0.0
    logz = np.log(np.where(nz, zz, 1.0))
    small_run = np.zeros(zz.shape, dtype=int)
    peak = np.abs(out)
    for k in range(1, MAX_TERMS):
        arg = alpha * k + bb
        poles = _is_nonpositive_integer(arg)
        safe = np.where(poles, 1.0, arg)
        term = np.where(poles | ~nz, 0.0, np.exp(k * logz - _lngamma_raw(safe)))
        out = out + term
        peak = np.maximum(peak, np.abs(term))
        tiny = np.abs(term) <= 1e-17 * np.maximum(peak, 1e-300)
        # a tail term is only small for good once the gamma growth dominates
        dominated = (alpha * k + bb.real) > 2.0 * np.abs(zz) ** (1.0 / alpha) + 2.0
        small_run = np.where(tiny & dominated, small_run + 1, 0)
        if np.all(small_run >= 3):
            return _wrap(out, scalar)
    raise ConvergenceError("Mittag-Leffler series did not converge")


# --------------------------------------------------------------- lambda fn


@dataclass(frozen=True)
class LambdaParams:
    """Parameters of :func:`lambda_fn`; validated on construction."""

    eta: float
    mu: float
    nu: float
    z: complex

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise DomainError("eta must be positive")
        if not self.mu > 1.0 / self.eta - 1.0:
            raise DomainError("mu must exceed 1/eta - 1")
        if not complex(self.z).real > 0:
            raise DomainError("Re(z) must be positive")


def lambda_fn(p: LambdaParams, tol: float = 1e-12) -> complex:
    r"""Generalised Macdonald function by direct quadrature.

    .. math::

        \lambda^{(\eta)}_{\mu,\nu}(z) = \frac{\eta}{\Gamma(\mu + 1 - 1/\eta)}
            \int_1^\infty (t^\eta - 1)^{\mu - 1/\eta} t^\nu e^{-z t}\, dt

    The algebraic endpoint behaviour at ``t = 1`` is handled by the
    double-exponential rule, which receives the exact offset ``t - 1``.
    """
    from hfrac.quadrature import integrate_endpoints

    eta, mu, nu = float(p.eta), float(p.mu), float(p.nu)
    z = complex(p.z)
    expo = mu - 1.0 / eta
    rz = z.real
    # e^{-Re z (t-1)} t^{power} is negligible past t_max
    power = max(eta * expo + nu, 0.0)
    span = 40.0 / rz
    for _ in range(60):
        if -rz * span + power * math.log1p(span) < math.log(1e-18):
            break
        span *= 1.5
    breaks = [0.0, min(1.0 / rz, span)]
    while breaks[-1] < span:
        breaks.append(min(breaks[-1] * 4.0, span))

    def piece(lo: float, hi: float) -> complex:
        def g(dl, dr):
            d = lo + dl
            base = np.expm1(eta * np.log1p(d))
            return base**expo * (1.0 + d) ** nu * np.exp(-z * d)

        return complex(integrate_endpoints(g, hi - lo, tol=tol))

    total = sum(piece(lo, hi) for lo, hi in zip(breaks[:-1], breaks[1:]))
    return complex(eta * rgamma(mu + 1.0 - 1.0 / eta) * np.exp(-z) * total)
