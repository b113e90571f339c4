"""Bernoulli mixture of two circle rotations.

A realization starts at ``y0`` and adds ``theta1`` (path bit 1) or ``theta2``
(path bit 0) with probability 1/2 each.  Values are formed as
``y0 + c1 theta1 + c0 theta2`` from integer step counts, never as a running
float sum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng
from .diophantine import RHIN_EXPONENT, dist_nearest_int
from .equidist import discrepancy_rows, fourier_rows
from .logspace import rotation_angles

MAX_ENUMERATION_DEPTH = 24

# below this |1 - z| the closed geometric form loses too many digits
_CLOSED_FORM_CUTOFF = 1e-2

_MC_BATCH = 512


class DegenerateBound(ValueError):
    """Both ``‖k theta1‖`` and ``‖k theta2‖`` vanish, so the bound is infinite."""


@dataclass(frozen=True)
class ProcessParams:
    theta1: float
    theta2: float
    y0: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.theta1, self.theta2, self.y0)):
            raise ValueError(f"process parameters must be finite: {self}")

    @classmethod
    def for_base(cls, base: int, y0: float = 0.0) -> "ProcessParams":
        """Rotation pair ``(log_B 3/2, log_B 1/2)`` matching the 3x+1 map in base ``B``."""
        t1, t2 = rotation_angles(base)
        return cls(t1, t2, y0)


@dataclass(frozen=True)
class Realization:
    params: ProcessParams
    path: tuple[int, ...]
    values: tuple[float, ...]


def path_values(params: ProcessParams, paths: np.ndarray) -> np.ndarray:
    """Values ``y_1..y_N`` for each row of a 0/1 path matrix."""
    paths = np.asarray(paths)
    c1 = np.cumsum(paths, axis=-1, dtype=np.int64)
    c0 = np.arange(1, paths.shape[-1] + 1, dtype=np.int64) - c1
    return params.y0 + c1 * params.theta1 + c0 * params.theta2


def realization_from_path(params: ProcessParams, path) -> Realization:
    path = tuple(int(b) for b in path)
    values = path_values(params, np.array(path, dtype=np.int64))
    return Realization(params, path, tuple(float(v) for v in values))


def realize(params: ProcessParams, n_steps: int, rng_seed: int, stream: int = 0) -> Realization:
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    return realization_from_path(params, rng.random_bits(rng_seed, stream, n_steps))


def all_paths(n_steps: int) -> np.ndarray:
    """All ``2^N`` paths as a uint8 matrix, rows in lexicographic order."""
    _check_depth(n_steps)
    idx = np.arange(1 << n_steps, dtype=np.int64)[:, None]
    shifts = np.arange(n_steps - 1, -1, -1, dtype=np.int64)
    return ((idx >> shifts) & 1).astype(np.uint8)


def _check_depth(n_steps: int) -> None:
    if not 1 <= n_steps <= MAX_ENUMERATION_DEPTH:
        raise ValueError(f"enumeration needs 1 <= n_steps <= {MAX_ENUMERATION_DEPTH}, got {n_steps}")


def enumerate_paths(params: ProcessParams, n_steps: int) -> list[Realization]:
    _check_depth(n_steps)
    return [realization_from_path(params, p) for p in itertools.product((0, 1), repeat=n_steps)]


def _z(params: ProcessParams, k: int) -> complex:
    two_pi_k = 2.0 * math.pi * k
    return (complex(math.cos(two_pi_k * params.theta1), math.sin(two_pi_k * params.theta1))
            + complex(math.cos(two_pi_k * params.theta2), math.sin(two_pi_k * params.theta2))) / 2


def _pair_sum_direct(z: complex, n: int) -> complex:
    r = np.arange(1, n + 1, dtype=np.float64)
    return complex(np.sum((n - r) * np.power(z, r)))


def _pair_sum_closed(z: complex, n: int) -> complex:
    return ((n - 1) * z - n * z * z + z ** (n + 1)) / (1 - z) ** 2


def second_moment_exact(params: ProcessParams, k: int, n_steps: int) -> float:
    """``E|U_N(k)|^2 = N + 2 Re sum_{r=1}^{N} (N - r) z^r``, ``z = (e(k theta1) + e(k theta2)) / 2``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    z = _z(params, k)
    if z == 1:
        return float(n_steps * n_steps)
    if abs(1 - z) > _CLOSED_FORM_CUTOFF:
        s = _pair_sum_closed(z, n_steps)
    else:
        s = _pair_sum_direct(z, n_steps)
    return n_steps + 2.0 * s.real


def second_moment_bound(params: ProcessParams, k: int, n_steps: int) -> float:
    """``(1 + 1 / (‖k theta1‖^2 + ‖k theta2‖^2)) N``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    denom = dist_nearest_int(k * params.theta1) ** 2 + dist_nearest_int(k * params.theta2) ** 2
    if denom == 0.0:
        raise DegenerateBound(f"k theta1 and k theta2 are both integers for k={k}")
    return (1.0 + 1.0 / denom) * n_steps


def _mc_rows(params: ProcessParams, n_steps: int, trials: int, rng_seed: int):
    for start in range(0, trials, _MC_BATCH):
        streams = range(start, min(start + _MC_BATCH, trials))
        yield path_values(params, rng.bits_matrix(rng_seed, streams, n_steps))


def _mean_se(samples: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(samples))
    if samples.size < 2:
        return mean, 0.0
    return mean, float(np.std(samples, ddof=1) / math.sqrt(samples.size))


def second_moment_mc(params: ProcessParams, k: int, n_steps: int, trials: int,
                     rng_seed: int) -> tuple[float, float]:
    """Monte Carlo mean and standard error of ``|U_N(k)|^2``."""
    out = [np.abs(fourier_rows(v, k)) ** 2 for v in _mc_rows(params, n_steps, trials, rng_seed)]
    return _mean_se(np.concatenate(out))


def expected_discrepancy_mc(params: ProcessParams, n_steps: int, trials: int,
                            rng_seed: int) -> tuple[float, float]:
    """Monte Carlo mean and standard error of ``D(y_1..y_N)``; trial ``t`` uses stream ``t``."""
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    out = [discrepancy_rows(v)[0] for v in _mc_rows(params, n_steps, trials, rng_seed)]
    return _mean_se(np.concatenate(out))


def default_cutoff(n_steps: int, alpha: float = RHIN_EXPONENT) -> int:
    """``floor(N^(1 / (2 (1 + alpha))))``, at least 1."""
    return max(1, int(math.floor(n_steps ** (1.0 / (2.0 * (1.0 + alpha))))))


def expected_discrepancy_upper(params: ProcessParams, n_steps: int,
                               big_k: Optional[int] = None,
                               alpha: float = RHIN_EXPONENT) -> float:
    """Rigorous bound on ``E[D]``: Erdős–Turán plus Cauchy–Schwarz on the exact moments.

    ``1/(K+1) + 3 sum_{k<=K} sqrt(E|U_N(k)|^2) / (k N)``.
    """
    if big_k is None:
        big_k = default_cutoff(n_steps, alpha)
    if big_k < 1:
        raise ValueError(f"K must be >= 1, got {big_k}")
    total = 0.0
    for k in range(1, big_k + 1):
        total += math.sqrt(max(second_moment_exact(params, k, n_steps), 0.0)) / (k * n_steps)
    return 1.0 / (big_k + 1) + 3.0 * total


def prefix_dominance(params: ProcessParams, n_short: int, n_long: int, realizations: int,
                     rng_seed: int) -> int:
    """How many realizations have ``D`` at length ``n_long`` below ``D`` of their first ``n_short`` values."""
    if not 1 <= n_short < n_long:
        raise ValueError("need 1 <= n_short < n_long")
    wins = 0
    for values in _mc_rows(params, n_long, realizations, rng_seed):
        d_long = discrepancy_rows(values)[0]
        d_short = discrepancy_rows(values[:, :n_short])[0]
        wins += int(np.count_nonzero(d_long < d_short))
    return wins
