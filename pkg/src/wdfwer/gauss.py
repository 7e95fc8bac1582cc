"""Standard Normal density, distribution and quantile functions.

The upper tail ``cdf_bar`` is the primitive; ``cdf`` is defined through it by
reflection so both keep full relative accuracy in their small tails.  All
array-valued functions accept scalars or numpy arrays and return the same
shape.  Inputs with ``|x| > 38`` saturate quietly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

from .errors import DomainError

SQRT1_2 = 0.7071067811865476
INV_SQRT_2PI = 0.3989422804014327
LOG_SQRT_2PI = 0.9189385332046728

# Below this, cdf_bar(-x) leaves the normal float range and log_cdf switches
# to the asymptotic series.
_LOG_TAIL_SWITCH = -37.0

# Acklam's rational approximation, used only to seed Newton iterations.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("x must be finite")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def pdf(x):
    """Standard Normal density."""
    arr = _check_finite(x)
    return _out(INV_SQRT_2PI * np.exp(-0.5 * arr * arr), x)


def _log_far_tail(x):
    # log Phi(x) for x << 0: log phi(x) - log(-x) + log(1 - 1/x^2 + 3/x^4 - ...)
    inv2 = 1.0 / (x * x)
    series = 1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)))
    return -0.5 * x * x - LOG_SQRT_2PI - np.log(-x) + np.log(series)


def _cdf_bar(arr):
    arr = np.asarray(arr, dtype=float)
    out = np.atleast_1d(0.5 * erfc(arr * SQRT1_2))
    # erfc flushes to zero a little before the subnormal range ends
    far = np.atleast_1d(arr > -_LOG_TAIL_SWITCH)
    if far.any():
        out[far] = np.exp(_log_far_tail(-np.atleast_1d(arr)[far]))
    return out.reshape(arr.shape)


def cdf_bar(x):
    """Upper tail ``1 - Phi(x)`` with relative accuracy in the tail."""
    return _out(_cdf_bar(_check_finite(x)), x)


def cdf(x):
    """Standard Normal distribution function, evaluated as ``cdf_bar(-x)``."""
    return _out(_cdf_bar(-_check_finite(x)), x)


def _log_cdf(arr):
    arr = np.asarray(arr, dtype=float)
    flat = np.atleast_1d(arr)
    neg = flat < 0.0
    with np.errstate(divide="ignore"):
        out = np.log1p(-_cdf_bar(flat))
        if neg.any():
            x = flat[neg]
            out[neg] = np.where(x >= _LOG_TAIL_SWITCH, np.log(_cdf_bar(-x)), _log_far_tail(x))
    return out.reshape(arr.shape)


def log_cdf(x):
    """``log Phi(x)``; finite for every finite ``x``."""
    return _out(_log_cdf(_check_finite(x)), x)


def _log_interval(lo, hi):
    """``log(Phi(hi) - Phi(lo))`` elementwise for ``lo < hi``."""
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    shape = lo.shape
    lo, hi = np.atleast_1d(lo).ravel(), np.atleast_1d(hi).ravel()
    straddle = (lo < 0.0) & (hi > 0.0)
    if straddle.all():
        return np.log1p(-(_cdf_bar(hi) + _cdf_bar(-lo))).reshape(shape)
    out = np.empty(lo.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = straddle
        out[s] = np.log1p(-(_cdf_bar(hi[s]) + _cdf_bar(-lo[s])))
        # both above zero: difference of upper tails
        r = lo >= 0.0
        a = _log_cdf(-lo[r])
        out[r] = a + np.log1p(-np.exp(_log_cdf(-hi[r]) - a))
        # both below zero: difference of lower tails
        left = hi <= 0.0
        b = _log_cdf(hi[left])
        out[left] = b + np.log1p(-np.exp(_log_cdf(lo[left]) - b))
    return out.reshape(shape)


def _acklam_lower(p: float) -> float:
    """Initial guess for Phi^{-1}(p), p <= 0.5."""
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        c, d = _C, _D
        return ((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
                / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    q = p - 0.5
    r = q * q
    a, b = _A, _B
    return ((((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0))


def _isf_upper_half(q: float) -> float:
    # Newton on log cdf_bar(x) = log q; the step uses the Mills ratio so it
    # stays well conditioned far into the tail.
    x = -_acklam_lower(q)
    log_q = math.log(q)
    for _ in range(50):
        log_tail = float(_log_cdf(np.float64(-x)))
        log_dens = -0.5 * x * x - LOG_SQRT_2PI
        step = (log_tail - log_q) * math.exp(log_tail - log_dens)
        x += step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return x


def isf(q: float) -> float:
    """Upper-tail quantile: the ``x`` with ``cdf_bar(x) == q``."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return _isf_upper_half(q)
    return -_isf_upper_half(1.0 - q)


def quantile(p: float) -> float:
    """Inverse of ``cdf``."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -_isf_upper_half(p)
    return _isf_upper_half(1.0 - p)
