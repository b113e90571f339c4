import json
import math

import pytest
from hypothesis import given, strategies as st

from benford3x1.experiments import (
    CSV_HEADER,
    DiscrepancyReport,
    ExperimentConfig,
    ReportError,
    default_threshold,
    enumerated_mean_discrepancy,
    exceptional_census,
    lemma51_census,
    parse_big_int,
    read_report,
    run_theorem21,
    seed_results,
    verify_lemma52,
    verify_prop51,
    write_report,
)
from benford3x1.logspace import tilde_y_sequence


def _config(**kw):
    base = dict(base=10, depth=12, seed_bound=2**12, sample_size=200, rng_seed=1)
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.mark.parametrize("bad", [
    dict(base=1), dict(depth=0), dict(seed_bound=2**11), dict(sample_size=-1),
    dict(sample_size="census", seed_bound=2**13), dict(threshold=0.0),
    dict(depth=30, seed_bound=2**30, sample_size="census"),
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        _config(**bad)


def test_config_round_trip():
    cfg = _config(seed_bound=2**200, depth=100, threshold=0.3)
    d = cfg.to_dict()
    assert d["seed_bound"] == str(2**200)
    assert ExperimentConfig.from_dict(json.loads(json.dumps(d))) == cfg
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({**d, "bogus": 1})
    d.pop("rng_seed")
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(d)


def test_parse_big_int():
    assert parse_big_int("2^12") == 4096
    assert parse_big_int("2**100") == 2**100
    assert parse_big_int("1_000") == 1000
    assert parse_big_int(7) == 7


def test_default_threshold_vacuous_at_desk_scale():
    for n in (10, 100, 10**6):
        assert default_threshold(n) > 1
    assert default_threshold(2**36) == pytest.approx(1.0)


def test_run_deterministic_and_thread_independent():
    cfg = _config(depth=20, seed_bound=2**20, sample_size=3000, rng_seed=9)
    a = run_theorem21(cfg, threads=1)
    b = run_theorem21(cfg, threads=3)
    assert a.per_seed == b.per_seed
    assert a.aggregates == b.aggregates


def test_reports_byte_identical(tmp_path):
    from benford3x1.experiments import render_report

    cfg = _config(depth=30, seed_bound=2**30, sample_size=400, rng_seed=12)
    for fmt in ("csv", "json"):
        assert render_report(run_theorem21(cfg), fmt) == render_report(run_theorem21(cfg, threads=2), fmt)


def test_report_aggregates():
    rep = run_theorem21(_config())
    agg = rep.aggregates
    assert agg["count"] == 200
    assert agg["exceptional_fraction"] == 0.0
    assert agg["default_threshold_vacuous"] is True
    assert sum(agg["histogram"]) == 200
    assert 0 < agg["mean_d"] < 1
    rep = run_theorem21(_config(threshold=0.2))
    assert rep.aggregates["exceptional_fraction"] > 0


def test_seeds_in_range():
    rep = run_theorem21(_config(depth=10, seed_bound=10**30, sample_size=300))
    assert all(1 <= r.seed <= 10**30 for r in rep.per_seed)
    assert max(r.seed for r in rep.per_seed) > 2**64


def test_consistency_chain():
    rep = run_theorem21(_config(depth=60, seed_bound=2**60, sample_size=300, rng_seed=4))
    for r in rep.per_seed:
        assert abs(r.d_exact - r.d_tilde) <= 2 * r.max_err + 1e-9


def test_d_tilde_periodic():
    import random

    rng = random.Random(5)
    n = 40
    for _ in range(100):
        m = rng.randint(1, 2**n)
        shifted = m + rng.randint(1, 2**30) * 2**n
        a, b = seed_results([m, shifted], 10, n)
        assert a.d_tilde == b.d_tilde
        assert a.exceptional == b.exceptional
        assert (tilde_y_sequence(m, n, translated=True).values
                == tilde_y_sequence(shifted, n, translated=True).values)


def test_census_matches_sample_and_process():
    census = run_theorem21(_config(sample_size="census"))
    sample = run_theorem21(_config(sample_size=10**4, rng_seed=3))
    c, s = census.aggregates, sample.aggregates
    assert abs(c["mean_d"] - s["mean_d"]) <= 3 * s["std_error"]
    assert abs(c["mean_d"] - enumerated_mean_discrepancy(10, 12)) < 0.02
    assert c["mean_d_tilde"] == pytest.approx(enumerated_mean_discrepancy(10, 12), abs=1e-9)


def test_write_read_json_round_trip(tmp_path):
    rep = run_theorem21(_config(depth=70, seed_bound=2**70, sample_size=50))
    path = tmp_path / "r.json"
    write_report(rep, path, "json")
    doc = read_report(path)
    assert doc["schema_version"] == 1
    back = DiscrepancyReport.from_dict(doc)
    assert back.per_seed == rep.per_seed
    assert back.aggregates == json.loads(json.dumps(rep.aggregates))
    assert doc["provenance"]["config"]["seed_bound"] == str(2**70)


def test_write_read_csv(tmp_path):
    rep = run_theorem21(_config(depth=70, seed_bound=2**70, sample_size=50))
    path = tmp_path / "r.csv"
    write_report(rep, path)
    doc = read_report(path)
    assert tuple(doc["header"]) == CSV_HEADER
    for row, r in zip(doc["rows"], rep.per_seed):
        assert int(row["seed"]) == r.seed
        assert float(row["d_exact"]) == r.d_exact
        assert float(row["max_err"]) == r.max_err
    assert int(doc["footer"]["count"]) == 50
    assert float(doc["footer"]["mean_d"]) == rep.aggregates["mean_d"]


def test_empty_report(tmp_path):
    rep = run_theorem21(_config(sample_size=0))
    for fmt in ("csv", "json"):
        path = tmp_path / f"e.{fmt}"
        write_report(rep, path, fmt)
        doc = read_report(path)
        count = doc["footer"]["count"] if fmt == "csv" else doc["aggregates"]["count"]
        assert int(count) == 0


def test_census_report_rows(tmp_path):
    rep = run_theorem21(_config(sample_size="census"))
    path = tmp_path / "census.csv"
    write_report(rep, path)
    lines = path.read_text().splitlines()
    body = [l for l in lines if not l.startswith("# ")]
    assert len(body) == 1 + 4096
    assert any(l.startswith("# count=4096") for l in lines)


def test_report_errors(tmp_path):
    rep = run_theorem21(_config(sample_size=1))
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ReportError, match="file"):
        write_report(rep, blocker / "sub" / "r.csv")
    with pytest.raises(ReportError):
        read_report(tmp_path / "missing.json")
    with pytest.raises(ValueError):
        write_report(rep, tmp_path / "r.txt", "xml")


@pytest.mark.parametrize("base", [10, 2, 3])
def test_verify_lemma52(base):
    res = verify_lemma52(base, 12)
    assert res.passed
    assert res.diagnostics["seed_sequences"] == res.diagnostics["path_sequences"] == 4096


def test_verify_lemma52_small():
    assert verify_lemma52(2, 8).passed
    res = verify_lemma52(10, 1)
    assert res.passed and res.diagnostics["distinct_seed_sequences"] == 2
    with pytest.raises(ValueError):
        verify_lemma52(10, 17)


@pytest.mark.parametrize("m_bound,k_bound", [(8, 3), (1, 1), (300, 20)])
def test_verify_prop51_small(m_bound, k_bound):
    res = verify_prop51(m_bound, k_bound)
    assert res.passed and res.counterexample is None
    assert res.diagnostics["pairs_checked"] == m_bound * k_bound
    assert res.diagnostics["bijective"] is (True if k_bound <= 16 else None)


def test_exceptional_census_small():
    count, cap = exceptional_census(10)
    assert 0 < count <= cap


def test_lemma51_census():
    res = lemma51_census(10, 200, 200, rng_seed=2)
    assert res.passed
    assert res.diagnostics["bound"] == 0.5
    assert len(res.records) == 200


@given(st.integers(min_value=1, max_value=400))
def test_all_even_class_has_zero_error(n):
    from benford3x1.logspace import approx_error, exceptional_member

    assert max(approx_error(2**n, n)) == 0.0
    assert exceptional_member(2**n, n)
