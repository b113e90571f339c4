"""Benford digit-block probabilities and leading-digit statistics.

A block ``d_0 d_1 ... d_{K-1}`` in base ``B`` stands for ``r = sum d_j B^-j``
with ``1 <= r < B``; its Benford probability is the length of the interval
``[log_B r, log_B(r + B^(1-K)))``.  Digits are read off the integer itself
(exact division), so comparing them against logarithms is a real check.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .equidist import discrepancy
from .logspace import log_base


@dataclass(frozen=True)
class DigitBlock:
    base: int
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.base < 2:
            raise ValueError(f"base must be >= 2, got {self.base}")
        if not self.digits:
            raise ValueError("a digit block needs at least one digit")
        if not 1 <= self.digits[0] <= self.base - 1:
            raise ValueError(f"leading digit must be in [1, {self.base - 1}], got {self.digits[0]}")
        if any(not 0 <= d < self.base for d in self.digits):
            raise ValueError(f"digits out of range for base {self.base}: {self.digits}")

    @property
    def k(self) -> int:
        return len(self.digits)

    @property
    def r_exact(self) -> Fraction:
        return sum((Fraction(d, self.base**j) for j, d in enumerate(self.digits)), Fraction(0))

    @property
    def r(self) -> float:
        return float(self.r_exact)

    def interval(self) -> tuple[float, float]:
        """``[log_B r, log_B(r + B^(1-K)))`` as floats."""
        lo = math.log(self.r) / math.log(self.base)
        return lo, lo + benford_prob(self)

    def __str__(self) -> str:
        return "".join(str(d) if d < 10 else f"[{d}]" for d in self.digits)


def all_blocks(base: int, k_digits: int) -> list[DigitBlock]:
    heads = range(1, base)
    tails = itertools.product(range(base), repeat=k_digits - 1)
    return [DigitBlock(base, (h,) + t) for h, t in itertools.product(heads, list(tails))]


def benford_prob(block: DigitBlock) -> float:
    """``log_B(r + B^(1-K)) - log_B r``, evaluated as ``log1p`` for accuracy."""
    step = Fraction(1, block.base ** (block.k - 1))
    return math.log1p(float(step / block.r_exact)) / math.log(block.base)


def _digit_count(x: int, base: int) -> int:
    """Number of base-``B`` digits of ``x >= 1``, by exact division."""
    powers = [base]  # base^(2^i)
    while powers[-1] <= x:
        powers.append(powers[-1] * powers[-1])
    count, rest = 1, x
    for i in range(len(powers) - 1, -1, -1):
        if rest >= powers[i]:
            rest //= powers[i]
            count += 1 << i
    return count


def leading_digits(x: int, base: int, k_digits: int) -> DigitBlock:
    """First ``k_digits`` digits of ``x``, right-padded with zeros if ``x`` is shorter."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    if k_digits < 1:
        raise ValueError(f"k_digits must be >= 1, got {k_digits}")
    length = _digit_count(x, base)
    if length >= k_digits:
        top = x // base ** (length - k_digits)
    else:
        top = x * base ** (k_digits - length)
    digits = []
    for _ in range(k_digits):
        top, d = divmod(top, base)
        digits.append(d)
    return DigitBlock(base, tuple(reversed(digits)))


def empirical_block_freq(xs: Iterable[int], base: int, k_digits: int) -> dict[DigitBlock, float]:
    counts = Counter(leading_digits(x, base, k_digits) for x in xs)
    total = sum(counts.values())
    if total == 0:
        raise ValueError("need at least one value")
    return {block: c / total for block, c in sorted(counts.items(), key=lambda kv: kv[0].digits)}


def benford_deviation(xs: Iterable[int], base: int, k_digits: int) -> float:
    """Largest ``|empirical - Benford|`` over all K-digit blocks, observed or not."""
    freq = empirical_block_freq(xs, base, k_digits)
    return max(abs(freq.get(b, 0.0) - benford_prob(b)) for b in all_blocks(base, k_digits))


def deviation_vs_discrepancy(xs: Iterable[int], base: int, k_digits: int) -> tuple[float, float]:
    """``(benford_deviation, D({log_B x}))``; the first can never exceed the second."""
    xs = list(xs)
    return benford_deviation(xs, base, k_digits), discrepancy([log_base(x, base) for x in xs]).d
