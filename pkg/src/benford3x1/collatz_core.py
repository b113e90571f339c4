"""Exact integer dynamics of the Qx+1 map.

Everything here works on Python ints and :class:`fractions.Fraction`; there is
no floating point in this module.  ``q`` defaults to 3 (the 3x+1 map)::

    T(n) = n / 2          if n is even
    T(n) = (q n + 1) / 2  if n is odd

Index conventions: ``TrajectoryRecord.iterates[k - 1]`` is the k-th iterate
``T^(k)(seed)``, while ``ParityVector.bits[k]`` is the parity of ``T^(k)(seed)``
so that ``bits[0]`` is the parity of the seed itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class IdentityViolation(RuntimeError):
    """The closed-form iterate disagreed with direct iteration (a bug, not bad input)."""


def _check_q(q: int) -> None:
    if q < 3 or q % 2 == 0:
        raise ValueError(f"q must be an odd integer >= 3, got {q}")


def _check_positive(name: str, value: int) -> None:
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")


@dataclass(frozen=True)
class ParityVector:
    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.bits:
            raise ValueError("parity vector must have length >= 1")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"parity bits must be 0 or 1, got {self.bits}")

    @classmethod
    def from_string(cls, text: str) -> "ParityVector":
        """Parse ``"110"`` or ``"1,1,0"``."""
        cleaned = text.replace(",", "").replace(" ", "")
        if not cleaned or set(cleaned) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(tuple(int(c) for c in cleaned))

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, k):
        return self.bits[k]

    def __iter__(self):
        return iter(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    @property
    def weight(self) -> int:
        return sum(self.bits)


@dataclass(frozen=True)
class TrajectoryRecord:
    seed: int
    iterates: tuple[int, ...]
    parity: ParityVector
    q: int = 3


@dataclass(frozen=True)
class ClosedFormIterate:
    """``T^(k)(m) = leading + remainder`` with both parts exact rationals."""

    m: int
    k: int
    leading: Fraction
    remainder: Fraction

    @property
    def total(self) -> Fraction:
        return self.leading + self.remainder


def t_step(n: int, q: int = 3) -> int:
    """One application of the Qx+1 map."""
    _check_positive("n", n)
    _check_q(q)
    if n & 1:
        return (q * n + 1) >> 1
    return n >> 1


def _iterate(n: int, steps: int, q: int) -> tuple[list[int], list[int]]:
    # returns (iterates x_1..x_steps, parities b_0..b_{steps-1})
    xs, bits = [], []
    for _ in range(steps):
        b = n & 1
        bits.append(b)
        n = (q * n + 1) >> 1 if b else n >> 1
        xs.append(n)
    return xs, bits


def trajectory(m: int, n_steps: int, q: int = 3) -> TrajectoryRecord:
    """The first ``n_steps`` iterates of ``m``; passes through the {1, 2} cycle."""
    _check_positive("m", m)
    _check_positive("n_steps", n_steps)
    _check_q(q)
    xs, bits = _iterate(m, n_steps, q)
    return TrajectoryRecord(seed=m, iterates=tuple(xs), parity=ParityVector(tuple(bits)), q=q)


def parity_vector(m: int, n_bits: int, q: int = 3) -> ParityVector:
    _check_positive("m", m)
    _check_positive("n_bits", n_bits)
    _check_q(q)
    return ParityVector(tuple(_iterate(m, n_bits, q)[1]))


def closed_form_terms(m: int, bits: Sequence[int], q: int = 3) -> tuple[Fraction, Fraction]:
    """Leading term and remainder for ``k = len(bits)`` from a given parity prefix.

    ``leading = q^(b_0+...+b_{k-1}) / 2^k * m`` and the remainder is the sum
    ``sum_j b_j q^(b_{j+1}+...+b_{k-1}) / 2^(k-j)``.  No check against the
    actual iterate is made here.
    """
    k = len(bits)
    weight = sum(bits)
    leading = Fraction(q**weight * m, 1 << k)
    remainder = Fraction(0)
    tail = 0  # b_{j+1} + ... + b_{k-1}
    for j in range(k - 1, -1, -1):
        if bits[j]:
            remainder += Fraction(q**tail, 1 << (k - j))
            tail += 1
    return leading, remainder


def closed_form(m: int, k: int, q: int = 3) -> ClosedFormIterate:
    """Closed-form k-th iterate, verified against direct iteration.

    Raises :class:`IdentityViolation` if ``leading + remainder`` is not exactly
    ``T^(k)(m)``.
    """
    _check_positive("m", m)
    _check_positive("k", k)
    _check_q(q)
    xs, bits = _iterate(m, k, q)
    leading, remainder = closed_form_terms(m, bits, q)
    total = leading + remainder
    if total.denominator != 1 or total.numerator != xs[-1]:
        raise IdentityViolation(f"closed form gives {total} but T^({k})({m}) = {xs[-1]}")
    return ClosedFormIterate(m=m, k=k, leading=leading, remainder=remainder)


def invert_parity(bits: ParityVector | Iterable[int], q: int = 3) -> int:
    """The unique ``m`` in ``[1, 2^N]`` whose first N parities are ``bits``.

    Lifts the residue one bit at a time.  If ``r`` has the right first k
    parities then ``T^(k)(r + 2^k t) = T^(k)(r) + q^w t`` with ``w`` the weight
    of those k parities, so adding ``2^k`` flips the k-th parity exactly when
    needed.
    """
    _check_q(q)
    bits = bits if isinstance(bits, ParityVector) else ParityVector(tuple(bits))
    r = 0
    value = 0  # T^(k)(r)
    shift = 1  # q^w
    for k, b in enumerate(bits):
        if value & 1 != b:
            r += 1 << k
            value += shift
        if b:
            value = (q * value + 1) >> 1
            shift *= q
        else:
            value >>= 1
    return r if r else 1 << len(bits)
