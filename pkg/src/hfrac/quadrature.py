"""Integration engines: adaptive Gauss-Kronrod, endpoint-singular
double-exponential (tanh-sinh) rules, and Mellin-Barnes line integrals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _sp_integrate

from hfrac.errors import ConvergenceError, DomainError

DEFAULT_TOL = 1e-10
OPERATOR_TOL = 1e-8

# at |k h| = 6 the endpoint offsets reach ~1e-300, so weights as singular as
# r**-0.95 lose less than 1e-15 of their mass to the truncation
KH_MAX = 6.0
MIN_LEVEL = 3
# an endpoint whose level-0 sample at |k h| = TAIL_PROBE is negligible is
# regular enough that |k h| <= KH_SHORT (offsets ~1e-23) suffices there
TAIL_PROBE = 4.0
KH_SHORT = 3.5
# nodes closer than this to an endpoint are dropped: their share of an
# integrable r**-0.95 singularity is below 1e-14, and nested integrands
# could otherwise overflow there
NODE_FLOOR = 1e-290
MAX_LEVEL = 10
# rows this short only occur as nodes of an outer integral; they feel NODE_FLOOR
# and need not converge, since their outer weight is below UNCHECKED_LENGTH**(1+p)
UNCHECKED_LENGTH = 1e-100
# bound on the number of integrand samples evaluated in one numpy call
MAX_BATCH = 1 << 18


@dataclass(frozen=True)
class SingularWeight:
    """Algebraic endpoint weight ``(t - a)**left_exponent * (b - t)**right_exponent``."""

    left_exponent: float = 0.0
    right_exponent: float = 0.0

    def __post_init__(self) -> None:
        if not (self.left_exponent > -1 and self.right_exponent > -1):
            raise DomainError("endpoint exponents must exceed -1 to be integrable")


@dataclass(frozen=True)
class ContourSpec:
    """Vertical line ``Re(s) = abscissa`` truncated to ``|Im(s)| <= half_height``."""

    abscissa: float
    half_height: float = 40.0
    nodes: int = 257

    def __post_init__(self) -> None:
        if not self.half_height > 0:
            raise DomainError("half_height must be positive")
        if self.nodes < 33 or self.nodes % 2 == 0:
            raise DomainError("nodes must be odd and at least 33")


# ------------------------------------------------------------------ adaptive


def integrate_adaptive(
    f: Callable[[float], complex], a: float, b: float, tol: float = DEFAULT_TOL
) -> complex:
    """Adaptive Gauss-Kronrod quadrature of a (possibly complex) scalar integrand.

    Backed by QUADPACK through :func:`scipy.integrate.quad`; the real and
    imaginary parts are integrated separately.
    """
    if not a < b:
        raise DomainError("integrate_adaptive requires a < b")

    parts = []
    for take in (lambda v: complex(v).real, lambda v: complex(v).imag):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            val, err, info = _sp_integrate.quad(
                lambda t: take(f(t)), a, b, epsabs=tol, epsrel=0.0, limit=500, full_output=1
            )[:3]
        if err > tol:
            raise ConvergenceError(f"adaptive quadrature stalled with error estimate {err:.3g}")
        parts.append(val)
    return complex(parts[0], parts[1])


# ----------------------------------------------------------------- tanh-sinh


def _ts_nodes(level: int, lo: float = -KH_MAX, hi: float = KH_MAX):
    """Parameter values ``k h`` in ``[lo, hi]`` new at ``level`` (all of them at level 0)."""
    h = 2.0**-level
    k = np.arange(int(math.ceil(lo / h)), int(math.floor(hi / h)) + 1)
    if level > 0:
        k = k[k % 2 != 0]
    return k * h


def _ts_map(tau: np.ndarray):
    u = 0.5 * math.pi * np.sinh(tau)
    # unit-interval offsets from the left and right endpoints, both exact
    with np.errstate(over="ignore"):
        right = 1.0 / (np.exp(2.0 * u) + 1.0)
        left = 1.0 / (np.exp(-2.0 * u) + 1.0)
        w = 0.5 * math.pi * np.cosh(tau) / np.cosh(u) ** 2
    return left, right, w


def _ts_rows(g, lengths: np.ndarray, tol: float, q: float = 1.0) -> np.ndarray:
    """Integrate ``g(dl, dr)`` over rows of ``[0, L]``.

    With ``q < 1`` the integrand is ``dr**(q - 1) * g(dl, dr)``; the
    variable ``v = dr**q`` absorbs the power exactly.
    """
    total = np.zeros(lengths.shape, dtype=np.complex128)
    history: list[np.ndarray] = []
    L = lengths[:, None]
    V = L**q
    lo, hi = -KH_MAX, KH_MAX
    for level in range(MAX_LEVEL + 1):
        kh = _ts_nodes(level, lo, hi)
        left, right, w = _ts_map(kh)
        if q == 1.0:
            dl = L * left[None, :]
            dr = L * right[None, :]
            # whichever offset is below one half is the accurate one
            dl = np.where(left[None, :] <= 0.5, dl, L - dr)
            dr = np.where(right[None, :] <= 0.5, dr, L - dl)
            scale = 0.5 * L * w[None, :]
        else:
            # left/right are offsets in v measured from dr = 0 and dr = L
            v0 = V * right[None, :]
            v1 = V * left[None, :]
            with np.errstate(all="ignore"):
                dr = v0 ** (1.0 / q)
                dl_far = -L * np.expm1(np.log1p(-v1 / V) / q)
                dl = np.where(left[None, :] <= 0.5, dl_far, L - dr)
            scale = (0.5 / q) * V * w[None, :]
        with np.errstate(all="ignore"):
            vals = np.asarray(g(dl, dr), dtype=np.complex128)
            contrib = vals * scale
        if q == 1.0:
            degenerate = (dl <= NODE_FLOOR) | (dr <= NODE_FLOOR)
        else:
            degenerate = (dl <= NODE_FLOOR) | (v0 <= 0.0)
        contrib = np.where(degenerate, 0.0, contrib)
        if not np.all(np.isfinite(contrib)):
            raise ConvergenceError("integrand is not finite at a quadrature node")
        total = total + contrib.sum(axis=1)
        estimate = total * 2.0**-level
        history.append(estimate)
        if level == 0:
            lo, hi = _trim(kh, contrib, total, tol)
        if level >= MIN_LEVEL:
            d1 = np.abs(history[-1] - history[-2])
            d2 = np.abs(history[-2] - history[-3])
            with np.errstate(all="ignore"):
                err = np.where(d2 > 0, np.minimum(d1, d1 * d1 / d2), d1)
            err = np.maximum(err, 1e-15 * np.abs(estimate))
            settled = err <= tol * np.maximum(1.0, np.abs(estimate))
            settled |= lengths < UNCHECKED_LENGTH
            if np.all(settled):
                return estimate
    raise ConvergenceError("tanh-sinh quadrature did not converge")


def _trim(kh: np.ndarray, contrib: np.ndarray, total: np.ndarray, tol: float):
    """Shorten the node range at endpoints where the integrand is regular.

    The truncation error beyond ``KH_SHORT`` scales like the probe
    contribution to the power 23/37 (ratio of the log offsets), hence the
    stricter threshold.
    """
    scale = np.maximum(1.0, np.abs(total))
    eps = (1e-3 * tol) ** (37.0 / 23.0)
    bounds = []
    for side in (-1.0, 1.0):
        probe = np.abs(contrib[:, kh == side * TAIL_PROBE]).max(axis=1)
        bounds.append(KH_SHORT if np.all(probe <= eps * scale) else KH_MAX)
    return -bounds[0], bounds[1]


def integrate_endpoints(g, length, tol: float = DEFAULT_TOL, right_exponent: float = 0.0):
    """Double-exponential quadrature of ``g`` over ``[0, length]``.

    ``g(dl, dr)`` receives the exact distances of each node from the left and
    right endpoint (``dl + dr == length``), so integrands with algebraic or
    logarithmic endpoint behaviour can be written without cancellation.
    ``length`` may be an array, one interval per entry, in which case ``g``
    is called with 2-D arrays of shape ``(len(length), nodes)``.

    A right-endpoint factor ``dr**p`` with ``-1 < p < 0`` can be declared as
    ``right_exponent``; ``g`` must then *exclude* it. The substitution
    ``v = dr**(1 + p)`` integrates the factor exactly, so even ``p`` close
    to -1 costs nothing extra. ``right_exponent >= 0`` is ignored.
    """
    if not -1.0 < right_exponent:
        raise DomainError("right_exponent must exceed -1")
    q = 1.0 + min(right_exponent, 0.0)
    lengths = np.asarray(length, dtype=float)
    scalar = lengths.ndim == 0
    lengths = np.atleast_1d(lengths)
    if np.any(lengths < 0):
        raise DomainError("interval length must be non-negative")
    out = np.zeros(lengths.shape, dtype=np.complex128)
    live = np.flatnonzero(lengths > 0)
    expected = 2 * int(KH_MAX * 2**5) + 1
    rows = max(1, MAX_BATCH // expected)
    for start in range(0, live.size, rows):
        idx = live[start : start + rows]
        sub = lengths[idx]
        out[idx] = _ts_rows(g, sub, tol, q)
    return complex(out[0]) if scalar else out


def integrate_singular(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    weight: SingularWeight = SingularWeight(),
    tol: float = DEFAULT_TOL,
) -> complex:
    """Integrate ``(t-a)**p (b-t)**q f(t)`` over ``[a, b]``.

    ``f`` must accept numpy arrays. Both endpoint singularities are removed
    by the tanh-sinh change of variables; the weight is evaluated on the
    exact endpoint offsets.
    """
    if not a < b:
        raise DomainError("integrate_singular requires a < b")
    p, q = weight.left_exponent, weight.right_exponent

    def g(dl, dr):
        return dl**p * f(a + dl) if q < 0 else dl**p * dr**q * f(a + dl)

    return complex(integrate_endpoints(g, b - a, tol=tol, right_exponent=q))


# ------------------------------------------------------------------- contour

CONTOUR_MAX_HEIGHT = 640.0
CONTOUR_MAX_NODES = 8193


def _trapezoid_line(g, c: float, T: float, nodes: int):
    y = np.linspace(-T, T, nodes)
    vals = np.asarray(g(c + 1j * y), dtype=np.complex128)
    if not np.all(np.isfinite(vals)):
        raise ConvergenceError("contour integrand is not finite on the line")
    h = 2.0 * T / (nodes - 1)
    s = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
    peak = float(np.max(np.abs(vals))) if vals.size else 0.0
    edge = float(max(abs(vals[0]), abs(vals[-1])))
    return s / (2.0 * math.pi), peak, edge


def integrate_contour(
    g: Callable[[np.ndarray], np.ndarray],
    spec: ContourSpec | float,
    tol: float = DEFAULT_TOL,
) -> complex:
    r"""Compute :math:`\frac{1}{2\pi i}\int_{c-i\infty}^{c+i\infty} g(s)\,ds`.

    The line is truncated at ``|Im s| = T`` and summed with the trapezoid
    rule. Each refinement halves the node spacing; ``T`` is doubled as well
    whenever the integrand is not negligible at the truncation points.
    Refinement stops once two successive estimates agree to ``tol``.
    """
    if not isinstance(spec, ContourSpec):
        spec = ContourSpec(float(spec))
    c, T, nodes = spec.abscissa, spec.half_height, spec.nodes
    prev, peak, edge = _trapezoid_line(g, c, T, nodes)
    if peak == 0.0:
        return 0j
    while True:
        if edge > 1e-16 * peak and T < CONTOUR_MAX_HEIGHT:
            T *= 2.0
            nodes = 2 * nodes - 1
        nodes = 2 * nodes - 1
        if nodes > CONTOUR_MAX_NODES:
            break
        cur, peak, edge = _trapezoid_line(g, c, T, nodes)
        decayed = edge <= max(1e-16 * peak, 0.1 * tol)
        if decayed and abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return complex(cur)
        prev = cur
    if edge > max(1e-16 * peak, 0.1 * tol):
        raise ConvergenceError("contour integrand is not negligible at the truncation height")
    raise ConvergenceError("contour ladder did not converge")
