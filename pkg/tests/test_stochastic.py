import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from benford3x1 import rng
from benford3x1.equidist import discrepancy, fourier_rows
from benford3x1.stochastic import (
    DegenerateBound,
    ProcessParams,
    all_paths,
    default_cutoff,
    enumerate_paths,
    expected_discrepancy_mc,
    expected_discrepancy_upper,
    path_values,
    prefix_dominance,
    realization_from_path,
    realize,
    second_moment_bound,
    second_moment_exact,
    second_moment_mc,
)

B10 = ProcessParams.for_base(10)
GOLD = (math.sqrt(5) - 1) / 2


def test_params_reject_non_finite():
    with pytest.raises(ValueError):
        ProcessParams(math.nan, 0.1)


def test_realize_examples():
    p = ProcessParams(0.3, 0.3, y0=0.1)
    r = realize(p, 4, rng_seed=99)
    assert r.values == pytest.approx((0.4, 0.7, 1.0, 1.3), abs=1e-12)
    assert realize(B10, 50, 5) == realize(B10, 50, 5)
    assert realize(B10, 50, 5) != realize(B10, 50, 6)
    r = realization_from_path(B10, (1, 1, 0))
    assert r.values == pytest.approx((0.176091, 0.352183, 0.051153), abs=1e-6)


def test_realize_rejects_zero_steps():
    with pytest.raises(ValueError):
        realize(B10, 0, 1)


def test_enumeration():
    two = enumerate_paths(B10, 1)
    assert sorted(r.values[0] for r in two) == sorted((B10.theta1, B10.theta2))
    assert len(enumerate_paths(B10, 12)) == 4096
    paths = all_paths(10)
    assert len({tuple(row) for row in paths}) == 1024
    with pytest.raises(ValueError):
        all_paths(25)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("y0", [0.0, 0.37])
def test_enumeration_mean_of_last_phase(k, y0):
    n = 10
    p = ProcessParams(B10.theta1, B10.theta2, y0)
    vals = path_values(p, all_paths(n))[:, -1]
    mean = np.mean(np.exp(2j * np.pi * k * vals))
    z = (np.exp(2j * np.pi * k * p.theta1) + np.exp(2j * np.pi * k * p.theta2)) / 2
    assert abs(mean - z**n * np.exp(2j * np.pi * k * y0)) < 1e-10


@pytest.mark.parametrize("k", [1, 2, 3, 7])
@pytest.mark.parametrize("n", [1, 5, 12])
def test_second_moment_matches_enumeration(k, n):
    vals = path_values(B10, all_paths(n))
    ref = float(np.mean(np.abs(fourier_rows(vals, k)) ** 2))
    assert second_moment_exact(B10, k, n) == pytest.approx(ref, abs=1e-9)


def test_second_moment_examples():
    assert second_moment_exact(ProcessParams(0.0, 0.0), 5, 17) == 17**2
    assert second_moment_exact(ProcessParams(0.5, 0.5), 1, 2) == pytest.approx(0.0, abs=1e-12)
    assert second_moment_bound(ProcessParams(0.5, 0.5), 1, 2) == pytest.approx(6.0)
    b = second_moment_bound(B10, 1, 100)
    t1, t2 = math.log10(1.5), math.log10(2)
    assert b == pytest.approx((1 + 1 / (t1**2 + t2**2)) * 100, rel=1e-12)
    assert second_moment_exact(B10, 1, 100) <= b
    with pytest.raises(DegenerateBound):
        second_moment_bound(ProcessParams(0.0, 1.0), 1, 4)
    with pytest.raises(ValueError):
        second_moment_exact(B10, 0, 4)


@given(st.floats(min_value=-1, max_value=1), st.floats(min_value=-1, max_value=1),
       st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=9))
def test_second_moment_properties(t1, t2, k, n):
    p = ProcessParams(t1, t2)
    exact = second_moment_exact(p, k, n)
    vals = path_values(p, all_paths(n))
    ref = float(np.mean(np.abs(fourier_rows(vals, k)) ** 2))
    assert exact == pytest.approx(ref, abs=1e-8 * n * n)
    assert -1e-9 <= exact <= n * n + 1e-9
    try:
        assert exact <= second_moment_bound(p, k, n) * (1 + 1e-9) + 1e-9
    except DegenerateBound:
        pass


def test_second_moment_near_closed_form_cutoff():
    # z within 1e-2 of 1 switches to the direct sum; both sides must agree
    for t in (1e-4, 1e-3, 0.015, 0.02):
        p = ProcessParams(t, -t)
        vals = path_values(p, all_paths(12))
        ref = float(np.mean(np.abs(fourier_rows(vals, 1)) ** 2))
        assert second_moment_exact(p, 1, 12) == pytest.approx(ref, abs=1e-9)


def test_second_moment_mc():
    mean, se = second_moment_mc(B10, 1, 64, 20000, rng_seed=11)
    assert abs(mean - second_moment_exact(B10, 1, 64)) <= 4 * se


def test_bit_fairness():
    bits = rng.random_bits(2024, 0, 100_000)
    ones = int(bits.sum())
    assert abs(ones - 50_000) <= 4 * math.sqrt(25_000)
    assert set(np.unique(bits)) <= {0, 1}


def test_streams_independent_of_schedule():
    m = rng.bits_matrix(5, range(3, 7), 130)
    for row, s in zip(m, range(3, 7)):
        assert np.array_equal(row, rng.random_bits(5, s, 130))
    assert not np.array_equal(m[0], m[1])


@given(st.integers(min_value=1, max_value=2**300), st.integers(0, 2**64 - 1))
def test_uniform_sampler_range(bound, seed):
    values = rng.UniformIntSampler(seed, 0, bound).sample(20)
    assert all(1 <= v <= bound for v in values)


def test_uniform_sampler_covers_small_range():
    values = rng.UniformIntSampler(1, 0, 6).sample(3000)
    counts = np.bincount(values, minlength=7)[1:]
    assert counts.min() > 400
    assert rng.UniformIntSampler(1, 0, 1).sample(5) == [1] * 5


def test_expected_discrepancy_degenerate():
    mean, se = expected_discrepancy_mc(ProcessParams(0.0, 0.0), 20, 100, 1)
    assert mean == 1.0 and se == 0.0
    mean, se = expected_discrepancy_mc(ProcessParams(GOLD, GOLD), 1000, 100, 1)
    kron = discrepancy(GOLD * np.arange(1, 1001)).d
    assert mean == pytest.approx(kron, abs=1e-9)
    assert se < 1e-12
    with pytest.raises(ValueError):
        expected_discrepancy_mc(B10, 10, 99, 1)


def test_expected_discrepancy_deterministic():
    assert expected_discrepancy_mc(B10, 64, 200, 3) == expected_discrepancy_mc(B10, 64, 200, 3)


def test_expected_discrepancy_upper_examples():
    assert expected_discrepancy_upper(ProcessParams(0.0, 0.0), 4, big_k=1) == pytest.approx(3.5)
    u = expected_discrepancy_upper(B10, 4096)
    assert 0 < u <= 1
    assert default_cutoff(4096) >= 1


def test_expected_discrepancy_trend_and_bound():
    small, se_s = expected_discrepancy_mc(B10, 64, 400, 8)
    large, se_l = expected_discrepancy_mc(B10, 1024, 400, 8)
    assert large + 3 * se_l < small - 3 * se_s
    for n, (mean, se) in ((64, (small, se_s)), (1024, (large, se_l))):
        for k in (1, 2, 4):
            assert mean <= expected_discrepancy_upper(B10, n, big_k=k) + 3 * se


def test_longer_realizations_more_uniform():
    wins = prefix_dominance(B10, 256, 4096, 100, rng_seed=41)
    assert wins >= 95
    with pytest.raises(ValueError):
        prefix_dominance(B10, 10, 10, 5, 1)
