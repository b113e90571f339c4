"""Distance to the nearest integer and finite-range Diophantine scans.

``‖k theta‖`` is evaluated without forming ``k * theta`` in one rounded
product.  The angle is stored as a short list of floats with at most 18
significant bits each (plus a tiny tail), so ``k * piece`` is exact for
``k < 2^35`` and the fractional parts can be reduced piece by piece.  The
result is accurate to a few ulps of 1 regardless of ``k``.

Scan outputs are empirical lower bounds over the range scanned, never proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import mpmath
import numpy as np

# exponent for which (log_B 3/2, log_B 1/2) is known to be 2-d Diophantine
RHIN_EXPONENT = 7.616

_PIECE_BITS = 18
_MAX_MULTIPLIER = 1 << 35
_CHUNK = 1 << 20

# a float, or a (hi, lo) double-double pair for angles known beyond 53 bits
Angle = Union[float, tuple[float, float]]


def dist_nearest_int(x: float) -> float:
    """``min_n |x - n|``, in ``[0, 0.5]``."""
    return abs(x - round(x))


def _pieces(theta: Angle) -> tuple[float, ...]:
    hi, lo = (theta, 0.0) if isinstance(theta, (int, float)) else theta
    hi = float(hi)
    out = []
    rest = hi
    for _ in range(3):
        if rest == 0.0:
            break
        mant, exp = math.frexp(rest)
        head = math.ldexp(math.trunc(math.ldexp(mant, _PIECE_BITS)), exp - _PIECE_BITS)
        out.append(head)
        rest -= head
    if rest:
        out.append(rest)
    out.append(float(lo))
    return tuple(out)


def frac_multiples(theta: Angle, ks: np.ndarray) -> np.ndarray:
    """``{k theta}`` in ``[0, 1)`` for an integer array ``ks``."""
    ks = np.asarray(ks)
    if ks.size and int(np.max(np.abs(ks))) >= _MAX_MULTIPLIER:
        raise ValueError("multipliers must be below 2^35")
    kf = ks.astype(np.float64)
    acc = np.zeros(kf.shape)
    for piece in _pieces(theta):
        prod = kf * piece
        acc += prod - np.floor(prod)
    acc -= np.floor(acc)
    return np.where(acc >= 1.0, 0.0, acc)


def dist_multiples(theta: Angle, ks: np.ndarray) -> np.ndarray:
    """``‖k theta‖`` for an integer array ``ks``."""
    f = frac_multiples(theta, ks)
    return np.minimum(f, 1.0 - f)


@lru_cache(maxsize=None)
def theta_pair(base: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """``(log_B 3/2, log_B 1/2)`` as double-double pairs."""
    with mpmath.workdps(50):
        lb = mpmath.log(mpmath.mpf(base))
        out = []
        for v in (mpmath.log(mpmath.mpf(3) / 2) / lb, mpmath.log(mpmath.mpf(1) / 2) / lb):
            hi = float(v)
            out.append((hi, float(v - hi)))
    return out[0], out[1]


@dataclass
class DioScanReport:
    """Minimum of ``max(‖k theta1‖, ‖k theta2‖) k^alpha`` over ``1 <= k <= k_max``.

    ``worst_quality`` is an empirical estimate of the Diophantine constant on
    the scanned range.  ``trace`` holds ``(k, ‖k theta1‖, ‖k theta2‖)`` columns
    when requested.
    """

    k_max: int
    alpha: float
    worst_k: int
    worst_quality: float
    trace: Optional[np.ndarray] = None


def dio_scan_2d(theta1: Angle, theta2: Angle, k_max: int, alpha: float,
                trace: bool = False) -> DioScanReport:
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    best_q, best_k = math.inf, 0
    parts = []
    for start in range(1, k_max + 1, _CHUNK):
        ks = np.arange(start, min(start + _CHUNK, k_max + 1), dtype=np.int64)
        d1 = dist_multiples(theta1, ks)
        d2 = dist_multiples(theta2, ks)
        quality = np.maximum(d1, d2) * ks.astype(np.float64) ** alpha
        i = int(np.argmin(quality))
        if quality[i] < best_q:
            best_q, best_k = float(quality[i]), int(ks[i])
        if trace:
            parts.append(np.column_stack((ks.astype(np.float64), d1, d2)))
    return DioScanReport(
        k_max=k_max,
        alpha=alpha,
        worst_k=best_k,
        worst_quality=best_q,
        trace=np.vstack(parts) if trace else None,
    )


def lin_form(u0: int, u1: int, u2: int) -> float:
    """``|u0 + u1 log 2 + u2 log 3|`` evaluated at 50 digits."""
    with mpmath.workdps(50):
        return float(abs(u0 + u1 * mpmath.log(2) + u2 * mpmath.log(3)))


@lru_cache(maxsize=None)
def _log2_log3() -> tuple[tuple[float, float], tuple[float, float]]:
    with mpmath.workdps(50):
        out = []
        for v in (mpmath.log(2), mpmath.log(3)):
            hi = float(v)
            out.append((hi, float(v - hi)))
    return out[0], out[1]


@dataclass
class LinFormScanReport:
    """Smallest ``|u0 + u1 log 2 + u2 log 3|`` with ``max(|u1|, |u2|) <= u_max``.

    ``empirical_constant`` is the minimum of ``|form| * max(|u1|, |u2|)^7.616``
    over the scan, a finite-range estimate of the constant in Rhin's bound.
    """

    u_max: int
    min_value: float
    argmin: tuple[int, int, int]
    empirical_constant: float
    constant_argmin: tuple[int, int, int]


def lin_form_scan(u_max: int, exponent: float = RHIN_EXPONENT) -> LinFormScanReport:
    """Scan all ``(u1, u2) != (0, 0)`` in the box, with ``u0`` the nearest integer.

    Only the half-plane ``u2 > 0`` or ``(u2 == 0, u1 > 0)`` is visited, since
    negating the triple does not change the form.
    """
    if u_max < 1:
        raise ValueError(f"u_max must be >= 1, got {u_max}")
    l2, l3 = _log2_log3()
    u1 = np.arange(-u_max, u_max + 1, dtype=np.int64)
    best = (math.inf, (0, 0, 0))
    best_c = (math.inf, (0, 0, 0))
    for u2 in range(0, u_max + 1):
        row = u1[u1 > 0] if u2 == 0 else u1
        f = frac_multiples(l2, row) + frac_multiples(l3, np.full(row.shape, u2))
        f -= np.floor(f)
        dist = np.minimum(f, 1.0 - f)
        height = np.maximum(np.abs(row), u2).astype(np.float64)
        scaled = dist * height**exponent
        i = int(np.argmin(dist))
        j = int(np.argmin(scaled))
        if dist[i] < best[0]:
            best = (float(dist[i]), _triple(int(row[i]), u2, l2, l3))
        if scaled[j] < best_c[0]:
            best_c = (float(scaled[j]), _triple(int(row[j]), u2, l2, l3))
    return LinFormScanReport(
        u_max=u_max,
        min_value=best[0],
        argmin=best[1],
        empirical_constant=best_c[0],
        constant_argmin=best_c[1],
    )


def _triple(u1: int, u2: int, l2, l3) -> tuple[int, int, int]:
    v = u1 * (l2[0] + l2[1]) + u2 * (l3[0] + l3[1])
    return (-round(v), u1, u2)
