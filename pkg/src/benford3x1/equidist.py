"""Equidistribution statistics for finite real samples.

A sample is any nonempty 1-D array-like of finite reals; only fractional parts
``y - floor(y)`` matter for the discrepancy, while Fourier sums use the values
as given (which is the same thing for integer frequencies).

Discrepancy is taken over *closed* subintervals ``[a, b]`` of ``[0, 1]``.  With
sorted fractional parts ``u_1 <= ... <= u_N`` (ties kept with multiplicity)::

    D  = 1/N + max_i (i/N - u_i) - min_i (i/N - u_i)
    D* = max_i max(i/N - u_i, u_i - (i-1)/N)

Taking the max at the last index of a tie group and the min at the first makes
the degenerate interval ``[u, u]`` count the whole group, so ``D({0.5}) = 1``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np


class DiscrepancyValue(NamedTuple):
    d: float
    d_star: float


def as_samples(y) -> np.ndarray:
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"sample set must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("sample set must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sample values must be finite")
    return arr


def frac(y) -> np.ndarray:
    """Fractional part in ``[0, 1)`` using the floor convention."""
    u = np.asarray(y, dtype=np.float64)
    u = u - np.floor(u)
    # y slightly below an integer can round up to exactly 1.0
    return np.where(u >= 1.0, 0.0, u)


def z_count(y, alpha: float, beta: float) -> float:
    """Fraction of fractional parts lying in the closed interval ``[alpha, beta]``."""
    if not 0.0 <= alpha <= beta <= 1.0:
        raise ValueError(f"need 0 <= alpha <= beta <= 1, got alpha={alpha}, beta={beta}")
    u = frac(as_samples(y))
    return float(np.count_nonzero((u >= alpha) & (u <= beta)) / u.size)


def discrepancy_rows(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``(D, D*)`` for a 2-D array (one sample set per row)."""
    u = np.sort(frac(values), axis=-1)
    n = u.shape[-1]
    upper = np.arange(1, n + 1, dtype=np.float64) / n
    gap = upper - u
    d = 1.0 / n + gap.max(axis=-1) - gap.min(axis=-1)
    lower = np.arange(0, n, dtype=np.float64) / n
    d_star = np.maximum(gap.max(axis=-1), (u - lower).max(axis=-1))
    return d, d_star


def discrepancy(y) -> DiscrepancyValue:
    arr = as_samples(y)
    d, d_star = discrepancy_rows(arr[np.newaxis, :])
    return DiscrepancyValue(float(d[0]), float(d_star[0]))


def discrepancy_exact(y: Sequence[Fraction | int]) -> tuple[Fraction, Fraction]:
    """``(D, D*)`` in exact rational arithmetic for rational inputs."""
    if not y:
        raise ValueError("sample set must be nonempty")
    u = sorted(Fraction(v) - math.floor(Fraction(v)) for v in y)
    n = len(u)
    gaps = [Fraction(i, n) - ui for i, ui in enumerate(u, start=1)]
    d = Fraction(1, n) + max(gaps) - min(gaps)
    d_star = max(max(gaps), max(ui - Fraction(i, n) for i, ui in enumerate(u)))
    return d, d_star


def discrepancy_bruteforce(y) -> DiscrepancyValue:
    """Reference by direct enumeration; O(N^3), for small sets only.

    Closed-interval maxima occur with both endpoints at sample points; the
    deficit maxima occur for open gaps between consecutive candidate endpoints
    (sample points plus 0 and 1).
    """
    u = frac(as_samples(y))
    n = u.size
    pts = np.unique(u)
    best = 0.0
    for a in pts:
        for b in pts[pts >= a]:
            inside = np.count_nonzero((u >= a) & (u <= b)) / n
            best = max(best, inside - (b - a))
    ends = np.unique(np.concatenate(([0.0, 1.0], u)))
    for i, a in enumerate(ends):
        for b in ends[i + 1:]:
            strictly = np.count_nonzero((u > a) & (u < b)) / n
            best = max(best, (b - a) - strictly)
    star = 0.0
    for a in np.concatenate(([0.0, 1.0], u)):
        star = max(star, abs(np.count_nonzero(u <= a) / n - a))
        star = max(star, abs(a - np.count_nonzero(u < a) / n))
    return DiscrepancyValue(float(best), float(star))


def fourier_rows(values: np.ndarray, k: int) -> np.ndarray:
    """Row-wise ``sum_j exp(2 pi i k y_j)``."""
    phase = frac(k * frac(values))
    return np.exp(2j * np.pi * phase).sum(axis=-1)


def fourier_coeff(y, k: int) -> complex:
    """``sum_j exp(2 pi i k y_j)``; numpy's pairwise summation keeps the error small."""
    arr = as_samples(y)
    if k == 0:
        return complex(arr.size)
    return complex(fourier_rows(arr, k))


def erdos_turan_bound(y, big_k: int) -> float:
    """``1/(K+1) + 3 sum_{k<=K} |U(k)| / (k N)``, an upper bound on ``D``."""
    if big_k < 1:
        raise ValueError(f"K must be >= 1, got {big_k}")
    arr = as_samples(y)
    n = arr.size
    total = 0.0
    for k in range(1, big_k + 1):
        total += abs(fourier_coeff(arr, k)) / (k * n)
    return 1.0 / (big_k + 1) + 3.0 * total


def perturb_compare(y, y2) -> tuple[float, float]:
    """``(max_i |y_i - y2_i|, |D(y) - D(y2)|)``; the second never exceeds twice the first."""
    a, b = as_samples(y), as_samples(y2)
    if a.size != b.size:
        raise ValueError(f"sample sizes differ: {a.size} vs {b.size}")
    eps = float(np.max(np.abs(a - b)))
    return eps, abs(discrepancy(a).d - discrepancy(b).d)


def van_der_corput(n: int, base: int = 2, start: int = 1) -> np.ndarray:
    """Radical-inverse points for indices ``start .. start + n - 1``."""
    out = np.empty(n)
    for j, idx in enumerate(range(start, start + n)):
        x, scale = 0.0, 1.0 / base
        while idx:
            idx, digit = divmod(idx, base)
            x += digit * scale
            scale /= base
        out[j] = x
    return out


def grid(n: int) -> np.ndarray:
    """Equally spaced ``i/N`` for ``i = 1..N``."""
    return np.arange(1, n + 1, dtype=np.float64) / n


__all__ = [
    "DiscrepancyValue",
    "as_samples",
    "discrepancy",
    "discrepancy_bruteforce",
    "discrepancy_exact",
    "discrepancy_rows",
    "erdos_turan_bound",
    "fourier_coeff",
    "fourier_rows",
    "frac",
    "grid",
    "perturb_compare",
    "van_der_corput",
    "z_count",
]
