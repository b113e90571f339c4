"""Reproducible experiment harness and report persistence.

Every experiment is a pure function of its arguments (including the RNG
seed), and parallel runs merge per-chunk results in seed order, so output
bytes never depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from . import __version__
from .collatz_core import _iterate, closed_form_terms, invert_parity, parity_vector
from .equidist import discrepancy_rows
from .logspace import (
    approx_error_from,
    is_exceptional,
    log_base,
    rotation_angles,
    translated_from_bits,
)
from .rng import UniformIntSampler
from .stochastic import MAX_ENUMERATION_DEPTH, ProcessParams, all_paths, path_values

SCHEMA_VERSION = 1
CSV_HEADER = ("seed", "d_exact", "d_tilde", "max_err", "exceptional")
EXTRA_THRESHOLDS = (0.2, 0.3, 0.5)
HIST_BIN_WIDTH = 0.01
_HIST_BINS = 100
_CHUNK = 2048
_BIJECTION_DEPTH = 16


class ReportError(OSError):
    pass


def default_threshold(depth: int) -> float:
    """``2 N^(-1/36)``; it exceeds 1 for every N below 2^36."""
    return 2.0 * depth ** (-1.0 / 36.0)


@dataclass
class ExperimentConfig:
    base: int
    depth: int
    seed_bound: int
    sample_size: Union[int, str]
    rng_seed: int
    output_path: Optional[str] = None
    threshold: Optional[float] = None

    def __post_init__(self) -> None:
        if self.base < 2:
            raise ValueError(f"base must be >= 2, got {self.base}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.seed_bound < 1 << self.depth:
            raise ValueError(f"seed_bound must be >= 2^depth = {1 << self.depth}, got {self.seed_bound}")
        if self.census:
            if self.seed_bound != 1 << self.depth or self.depth > MAX_ENUMERATION_DEPTH:
                raise ValueError("census mode needs seed_bound == 2^depth and depth <= 24")
        elif not isinstance(self.sample_size, int) or self.sample_size < 0:
            raise ValueError(f"sample_size must be a nonnegative integer or 'census', got {self.sample_size!r}")
        if self.threshold is not None and not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")

    @property
    def census(self) -> bool:
        return self.sample_size == "census"

    @property
    def effective_threshold(self) -> float:
        return default_threshold(self.depth) if self.threshold is None else self.threshold

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["seed_bound"] = str(self.seed_bound)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        missing = known - set(d) - {"threshold"}
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")
        d = dict(d)
        d["seed_bound"] = parse_big_int(d["seed_bound"])
        if d["sample_size"] != "census":
            d["sample_size"] = int(d["sample_size"])
        return cls(**d)


def parse_big_int(text: Union[str, int]) -> int:
    """Decimal integers or ``2^k`` power notation."""
    if isinstance(text, int):
        return text
    s = str(text).strip().replace("_", "")
    for op in ("^", "**"):
        if op in s:
            b, e = s.split(op, 1)
            return int(b) ** int(e)
    return int(s)


@dataclass
class SeedResult:
    seed: int
    d_exact: float
    d_tilde: float
    max_err: float
    exceptional: bool


@dataclass
class DiscrepancyReport:
    per_seed: list[SeedResult]
    aggregates: dict[str, Any]
    provenance: dict[str, Any]
    kind: str = "theorem21"

    def to_dict(self) -> dict[str, Any]:
        return {
            "per_seed": [
                {"seed": str(r.seed), "d_exact": r.d_exact, "d_tilde": r.d_tilde,
                 "max_err": r.max_err, "exceptional": r.exceptional}
                for r in self.per_seed
            ],
            "aggregates": self.aggregates,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DiscrepancyReport":
        rows = [SeedResult(int(r["seed"]), r["d_exact"], r["d_tilde"], r["max_err"], r["exceptional"])
                for r in d["per_seed"]]
        return cls(rows, d["aggregates"], d["provenance"], d.get("kind", "theorem21"))

    def rows(self) -> list[dict[str, Any]]:
        return [asdict(r) for r in self.per_seed]


def _seed_chunk(args) -> list[SeedResult]:
    seeds, base, depth = args
    period = 1 << depth
    y_rows, t_rows, errs, flags = [], [], [], []
    for m in seeds:
        xs, bits = _iterate(m, depth, 3)
        y_rows.append([log_base(x, base) for x in xs])
        t_rows.append(translated_from_bits(bits, base))
        errs.append(max(approx_error_from(m, xs, bits, base)))
        flags.append(is_exceptional((m - 1) % period + 1, sum(bits), depth))
    if not seeds:
        return []
    d_exact = discrepancy_rows(np.array(y_rows))[0]
    # translation invariance: D(ytilde) = D(ytilde*), and ytilde* is exactly periodic in m
    d_tilde = discrepancy_rows(np.array(t_rows))[0]
    return [SeedResult(m, float(a), float(b), e, f)
            for m, a, b, e, f in zip(seeds, d_exact, d_tilde, errs, flags)]


def seed_results(seeds: list[int], base: int, depth: int, threads: int = 1) -> list[SeedResult]:
    chunks = [(seeds[i:i + _CHUNK], base, depth) for i in range(0, len(seeds), _CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_seed_chunk, chunks))
    else:
        parts = [_seed_chunk(c) for c in chunks]
    return [r for part in parts for r in part]


def _histogram(values: list[float]) -> list[int]:
    counts = [0] * _HIST_BINS
    for v in values:
        counts[min(int(v / HIST_BIN_WIDTH), _HIST_BINS - 1)] += 1
    return counts


def _aggregate(rows: list[SeedResult], config: ExperimentConfig) -> dict[str, Any]:
    n = len(rows)
    d = np.array([r.d_exact for r in rows], dtype=np.float64)
    threshold = config.effective_threshold

    def frac_at(t: float) -> float:
        return float(np.count_nonzero(d >= t) / n) if n else 0.0

    mean = float(d.mean()) if n else 0.0
    se = float(d.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    exc = frac_at(threshold)
    return {
        "count": n,
        "mean_d": mean,
        "std_error": se,
        "mean_d_tilde": float(np.mean([r.d_tilde for r in rows])) if n else 0.0,
        "max_err": max((r.max_err for r in rows), default=0.0),
        "threshold": threshold,
        "default_threshold": default_threshold(config.depth),
        "default_threshold_vacuous": default_threshold(config.depth) >= 1.0,
        "exceptional_fraction": exc,
        "exceptional_fraction_at": {str(t): frac_at(t) for t in EXTRA_THRESHOLDS},
        "small_error_exceptional_fraction": float(np.mean([r.exceptional for r in rows])) if n else 0.0,
        # |E| N^(1/36) / X with |E| estimated as fraction * X; recorded, never asserted
        "empirical_c_ratio": exc * config.depth ** (1.0 / 36.0),
        "histogram_bin_width": HIST_BIN_WIDTH,
        "histogram": _histogram(list(d)),
    }


def draw_seeds(config: ExperimentConfig) -> list[int]:
    if config.census:
        return list(range(1, (1 << config.depth) + 1))
    return UniformIntSampler(config.rng_seed, 0, config.seed_bound).sample(config.sample_size)


def run_theorem21(config: ExperimentConfig, threads: int = 1) -> DiscrepancyReport:
    """Discrepancy of ``{log_B x_k : 1 <= k <= N}`` over a census or uniform sample of seeds."""
    rows = seed_results(draw_seeds(config), config.base, config.depth, threads)
    provenance = {"config": config.to_dict(), "code_version": __version__, "rng_seed": config.rng_seed}
    return DiscrepancyReport(rows, _aggregate(rows, config), provenance)


def enumerated_mean_discrepancy(base: int, depth: int) -> float:
    """Mean ``D`` over all ``2^N`` paths of the matching rotation process (``y0 = 0``)."""
    values = path_values(ProcessParams.for_base(base), all_paths(depth))
    return float(discrepancy_rows(values)[0].mean())


# ---------------------------------------------------------------- verifiers


@dataclass
class CheckResult:
    """Outcome of an exhaustive or sampled verification."""

    name: str
    passed: bool
    diagnostics: dict[str, Any] = field(default_factory=dict)
    counterexample: Optional[dict[str, Any]] = None
    records: list[dict[str, Any]] = field(default_factory=list)
    kind: str = "check"

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "diagnostics": self.diagnostics,
            "counterexample": self.counterexample,
            "records": self.records,
        }

    def rows(self) -> list[dict[str, Any]]:
        return self.records

    @property
    def aggregates(self) -> dict[str, Any]:
        return {"passed": self.passed, **self.diagnostics}


def _classify(increments: np.ndarray, theta1: float, theta2: float) -> np.ndarray:
    return (np.abs(increments - theta1) < np.abs(increments - theta2)).astype(np.uint8)


def verify_lemma52(base: int, depth: int) -> CheckResult:
    """Step labels of the translated approximations over ``m in [1, 2^N]`` vs all process paths.

    Each increment of ``ytilde*`` is labelled by its nearest rotation angle;
    the multiset of label sequences must equal the set of all binary paths,
    labelled the same way from the process values.
    """
    if not 1 <= depth <= 16:
        raise ValueError(f"depth must be in [1, 16], got {depth}")
    theta1, theta2 = rotation_angles(base)
    seed_labels: Counter = Counter()
    counterexample = None
    for m in range(1, (1 << depth) + 1):
        _, bits = _iterate(m, depth, 3)
        vals = np.array(translated_from_bits(bits, base))
        labels = _classify(np.diff(vals, prepend=0.0), theta1, theta2)
        pattern = tuple(int(b) for b in labels)
        if counterexample is None and pattern != tuple(bits):
            counterexample = {"m": m, "pattern": "".join(map(str, pattern)),
                              "parity": "".join(map(str, bits))}
        seed_labels[pattern] += 1
    path_vals = path_values(ProcessParams(theta1, theta2, 0.0), all_paths(depth))
    path_labels = Counter(
        tuple(int(b) for b in row)
        for row in _classify(np.diff(path_vals, axis=1, prepend=0.0), theta1, theta2)
    )
    passed = counterexample is None and seed_labels == path_labels
    if counterexample is None and not passed:
        diff = (seed_labels - path_labels) or (path_labels - seed_labels)
        pattern = next(iter(diff))
        counterexample = {"m": None, "pattern": "".join(map(str, pattern))}
    diagnostics = {
        "base": base,
        "depth": depth,
        "seed_sequences": sum(seed_labels.values()),
        "path_sequences": sum(path_labels.values()),
        "distinct_seed_sequences": len(seed_labels),
    }
    return CheckResult("lemma52", passed, diagnostics, counterexample)


def verify_prop51(m_bound: int, k_bound: int) -> CheckResult:
    """Exact check of ``T^(k)(m) = leading + remainder`` and of the parity bijection at depth ``k_bound``."""
    if m_bound < 1 or k_bound < 1:
        raise ValueError("bounds must be >= 1")
    counterexample = None
    pairs = 0
    for m in range(1, m_bound + 1):
        xs, bits = _iterate(m, k_bound, 3)
        for k in range(1, k_bound + 1):
            leading, remainder = closed_form_terms(m, bits[:k])
            total = leading + remainder
            pairs += 1
            if total.denominator != 1 or total.numerator != xs[k - 1] or remainder > 1.5**k:
                counterexample = {"m": m, "k": k, "closed_form": str(total), "iterate": xs[k - 1]}
                break
        if counterexample:
            break
    bijective = None
    if k_bound <= _BIJECTION_DEPTH:
        size = 1 << k_bound
        seen = {parity_vector(m, k_bound).bits for m in range(1, size + 1)}
        bijective = len(seen) == size and all(
            invert_parity(p) == m
            for m, p in ((m, parity_vector(m, k_bound)) for m in range(1, size + 1))
        )
        if not bijective and counterexample is None:
            counterexample = {"bijection_depth": k_bound, "distinct": len(seen)}
    # bijective is None when k_bound is too deep for the exhaustive check
    diagnostics = {"m_bound": m_bound, "k_bound": k_bound, "pairs_checked": pairs, "bijective": bijective}
    return CheckResult("prop51", counterexample is None, diagnostics, counterexample)


def exceptional_census(depth: int) -> tuple[int, float]:
    """``(#{m <= 2^N : m exceptional}, 2^(1 + 0.99 N))`` by exhaustive vectorized iteration."""
    if not 1 <= depth <= MAX_ENUMERATION_DEPTH:
        raise ValueError(f"depth must be in [1, {MAX_ENUMERATION_DEPTH}]")
    from .logspace import small_seed_cap

    m = np.arange(1, (1 << depth) + 1, dtype=np.int64)
    x = m.copy()
    weight = np.zeros_like(m)
    for _ in range(depth):
        odd = x & 1
        weight += odd
        x = np.where(odd == 1, (3 * x + 1) >> 1, x >> 1)
    member = (m <= small_seed_cap(depth)) | (5 * weight <= 2 * depth)
    return int(np.count_nonzero(member)), 2.0 ** (1 + 0.99 * depth)


def lemma51_census(base: int, depth: int, samples: int, rng_seed: int) -> CheckResult:
    """Sampled check that non-members of the exceptional set obey ``max_k error <= 2^(1 - N/100)``."""
    bound = 2.0 ** (1 - depth / 100)
    sampler = UniformIntSampler(rng_seed, 0, 1 << depth)
    records, violations = [], []
    members = 0
    worst_nonmember = 0.0
    for m in sampler.sample(samples):
        xs, bits = _iterate(m, depth, 3)
        err = max(approx_error_from(m, xs, bits, base))
        member = is_exceptional(m, sum(bits), depth)
        members += member
        if not member:
            worst_nonmember = max(worst_nonmember, err)
            if err > bound:
                violations.append(str(m))
        records.append({"seed": m, "max_err": err, "member": member})
    diagnostics = {
        "base": base,
        "depth": depth,
        "samples": samples,
        "bound": bound,
        "members": members,
        "member_fraction": members / samples if samples else 0.0,
        "member_fraction_cap": 2.0 ** (1 - 0.01 * depth),
        "max_err_nonmembers": worst_nonmember,
        "violations": len(violations),
    }
    counterexample = {"seeds": violations[:10]} if violations else None
    return CheckResult("lemma51", not violations, diagnostics, counterexample, records)


# ---------------------------------------------------------------- persistence


def _jsonable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (float, str)):
        return obj
    if isinstance(obj, int):
        # big integers as decimal strings; small ones stay numbers
        return obj if abs(obj) < 1 << 53 else str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(_jsonable(v), separators=(",", ":"))
    return str(v)


def _flatten(prefix: str, d: dict[str, Any], out: list[tuple[str, Any]]) -> None:
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            _flatten(key + ".", v, out)
        else:
            out.append((key, v))


def render_report(report, fmt: str) -> str:
    """The exact text ``write_report`` would put on disk."""
    kind = report.get("kind", "generic") if isinstance(report, dict) else getattr(report, "kind", "generic")
    if fmt == "json":
        body = report.to_dict() if hasattr(report, "to_dict") else dict(report)
        doc = {"schema": "benford3x1.report", "schema_version": SCHEMA_VERSION, "kind": kind}
        doc.update(_jsonable(body))
        return json.dumps(doc, indent=1) + "\n"
    if fmt != "csv":
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    rows = report.rows() if hasattr(report, "rows") else report.get("rows", [])
    if isinstance(report, DiscrepancyReport):
        header = list(CSV_HEADER)
    else:
        header = list(rows[0]) if rows else []
    if header:
        writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(row[h]) for h in header])
    aggregates = report.aggregates if hasattr(report, "aggregates") else {
        k: v for k, v in report.items() if k not in ("rows", "kind")}
    flat: list[tuple[str, Any]] = []
    _flatten("", aggregates, flat)
    if isinstance(report, DiscrepancyReport):
        _flatten("provenance.", report.provenance, flat)
    for key, value in flat:
        buf.write(f"# {key}={_csv_cell(value)}\n")
    return buf.getvalue()


def write_report(report, path: Union[str, os.PathLike], fmt: str = "csv") -> None:
    """Write a report as CSV (rows plus ``# key=value`` footer) or one JSON document."""
    text = render_report(report, fmt)
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc}") from exc


def read_report(path: Union[str, os.PathLike]) -> dict[str, Any]:
    """Parse a file produced by :func:`write_report`.

    JSON comes back as the document; CSV as ``{"header", "rows", "footer"}``
    with cells left as strings.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"cannot read report {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        if doc.get("schema") != "benford3x1.report":
            raise ValueError(f"{path} is not a benford3x1 report")
        return doc
    body = [line for line in text.splitlines() if not line.startswith("# ")]
    footer = dict(line[2:].split("=", 1) for line in text.splitlines() if line.startswith("# "))
    reader = list(csv.reader(body))
    header = reader[0] if reader else []
    return {"header": header, "rows": [dict(zip(header, r)) for r in reader[1:]], "footer": footer}
