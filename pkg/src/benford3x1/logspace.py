"""Log-space embedding of 3x+1 trajectories.

``y_k = log_B x_k`` for the true iterates, and the parity-only approximation
``ytilde_k = log_B m + (b_0 + ... + b_{k-1}) log_B 3 - k log_B 2``.  The
translated variant drops the ``log_B m`` term so it starts from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .collatz_core import _check_positive, _iterate

# bits of the leading-mantissa window used by log_base
_WINDOW = 60


class LogKind(str, Enum):
    EXACT = "exact-log"
    CLOSED_FORM = "closed-form-approx"
    TRANSLATED = "translated-approx"


@dataclass(frozen=True)
class LogSequence:
    base: int
    values: tuple[float, ...]
    kind: LogKind

    def __len__(self) -> int:
        return len(self.values)


def _check_base(base: int) -> None:
    if int(base) != base or base < 2:
        raise ValueError(f"base must be an integer >= 2, got {base}")


def log_base(x: int, base: int) -> float:
    """``log_B x`` for an arbitrarily large positive integer.

    Uses ``bit_length`` plus the log of the top ``_WINDOW`` bits, so the
    absolute error stays near 1e-15 for inputs with thousands of bits.
    """
    if x < 1:
        raise ValueError(f"log_base needs x >= 1, got {x}")
    _check_base(base)
    nbits = x.bit_length()
    if nbits <= _WINDOW:
        if base == 2:
            return math.log2(x)
        if base == 10:
            return math.log10(x)
        return math.log(x) / math.log(base)
    shift = nbits - _WINDOW
    log2x = math.log2(x >> shift) + shift
    if base == 2:
        return log2x
    return log2x / math.log2(base)


@lru_cache(maxsize=None)
def rotation_angles(base: int) -> tuple[float, float]:
    """``(log_B 3/2, log_B 1/2)``: the two step sizes in log space."""
    _check_base(base)
    log3, log2 = _log3_log2(base)
    return log3 - log2, -log2


@lru_cache(maxsize=None)
def _log3_log2(base: int) -> tuple[float, float]:
    if base == 10:
        return math.log10(3), math.log10(2)
    if base == 2:
        return math.log2(3), 1.0
    return math.log(3) / math.log(base), math.log(2) / math.log(base)


def y_sequence(m: int, n_steps: int, base: int = 10) -> LogSequence:
    _check_positive("m", m)
    _check_positive("n_steps", n_steps)
    xs, _ = _iterate(m, n_steps, 3)
    return LogSequence(base, tuple(log_base(x, base) for x in xs), LogKind.EXACT)


def translated_from_bits(bits, base: int) -> list[float]:
    """``ytilde*_k`` for k = 1..len(bits), computed as ``w_k log_B 3 - k log_B 2``.

    Each entry is a fresh product rather than a running sum, so there is no
    accumulated rounding drift along the sequence.
    """
    log3, log2 = _log3_log2(base)
    out = []
    w = 0
    for k, b in enumerate(bits, start=1):
        w += b
        out.append(w * log3 - k * log2)
    return out


def tilde_y_sequence(m: int, n_steps: int, base: int = 10, translated: bool = False) -> LogSequence:
    _check_positive("m", m)
    _check_positive("n_steps", n_steps)
    _check_base(base)
    _, bits = _iterate(m, n_steps, 3)
    values = translated_from_bits(bits, base)
    if translated:
        return LogSequence(base, tuple(values), LogKind.TRANSLATED)
    offset = log_base(m, base)
    return LogSequence(base, tuple(offset + v for v in values), LogKind.CLOSED_FORM)


def approx_error_from(m: int, xs, bits, base: int) -> list[float]:
    """``y_k - ytilde_k = log_B(1 + R_k / xtilde_k)`` with the ratio formed exactly.

    ``R_k / xtilde_k = (x_k 2^k - 3^w m) / (3^w m)``; only the final ratio is
    rounded to a float, which keeps tiny errors monotone and nonnegative.
    """
    ln_b = math.log(base)
    out = []
    pow3 = 1
    for k, (x, b) in enumerate(zip(xs, bits), start=1):
        if b:
            pow3 *= 3
        denom = pow3 * m
        num = (x << k) - denom
        out.append(math.log1p(num / denom) / ln_b)
    return out


def approx_error(m: int, n_steps: int, base: int = 10) -> list[float]:
    """``|y_k(m) - ytilde_k(m)|`` for k = 1..n_steps."""
    _check_positive("m", m)
    _check_positive("n_steps", n_steps)
    _check_base(base)
    xs, bits = _iterate(m, n_steps, 3)
    return approx_error_from(m, xs, bits, base)


def _iroot_floor(value: int, n: int) -> int:
    """Largest integer r with r**n <= value."""
    if value < 1:
        return 0
    r = 1 << -(-value.bit_length() // n)  # upper bound
    while True:
        s = ((n - 1) * r + value // r ** (n - 1)) // n
        if s >= r:
            break
        r = s
    while r**n > value:
        r -= 1
    while (r + 1) ** n <= value:
        r += 1
    return r


@lru_cache(maxsize=None)
def small_seed_cap(depth: int) -> int:
    """``floor(2^(0.99 depth))`` computed exactly."""
    return _iroot_floor(1 << (99 * depth), 100)


def is_exceptional(m: int, parity_weight: int, depth: int) -> bool:
    """Membership from precomputed parity weight ``b_0 + ... + b_{N-1}``."""
    return m <= small_seed_cap(depth) or 5 * parity_weight <= 2 * depth


def exceptional_member(m: int, n_steps: int) -> bool:
    """Whether ``m`` lies in the explicit exceptional set for depth ``n_steps``.

    The set is ``m <= 2^(0.99 N)`` or parity weight ``<= 2N/5``; outside it the
    log approximation error is at most ``2^(1 - N/100)``.
    """
    _check_positive("m", m)
    _check_positive("n_steps", n_steps)
    if m > 1 << n_steps:
        raise ValueError(f"m must lie in [1, 2^{n_steps}], got {m}")
    _, bits = _iterate(m, n_steps, 3)
    return is_exceptional(m, sum(bits), n_steps)


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy is defined on [0, 1], got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)
