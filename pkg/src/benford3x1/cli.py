"""Command-line front end.

Every flag can also come from the environment as ``BENFORD3X1_<FLAG>`` (dashes
become underscores) and, for the fields of an experiment config, from a flat
JSON file given with ``--config``.  Precedence: flag, environment, config file,
built-in default.

Exit codes: 0 success, 1 a verification failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from .benford import all_blocks, benford_prob, deviation_vs_discrepancy, empirical_block_freq
from .collatz_core import ParityVector, closed_form, invert_parity, parity_vector, trajectory
from .diophantine import RHIN_EXPONENT, dio_scan_2d, lin_form_scan, theta_pair
from .equidist import discrepancy, discrepancy_rows, erdos_turan_bound, fourier_rows
from .experiments import (
    ExperimentConfig,
    ReportError,
    exceptional_census,
    lemma51_census,
    parse_big_int,
    run_theorem21,
    verify_lemma52,
    verify_prop51,
    write_report,
)
from .stochastic import (
    DegenerateBound,
    ProcessParams,
    all_paths,
    expected_discrepancy_mc,
    expected_discrepancy_upper,
    path_values,
    realize,
    second_moment_bound,
    second_moment_exact,
    second_moment_mc,
)

ENV_PREFIX = "BENFORD3X1_"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# config-file keys -> option dest
_CONFIG_KEYS = {
    "base": "base",
    "depth": "depth",
    "seed_bound": "seed_bound",
    "sample_size": "samples",
    "rng_seed": "rng_seed",
    "output_path": "out",
    "threshold": "threshold",
}


class UsageError(Exception):
    pass


def _samples_type(text: str):
    return text if text == "census" else int(text)


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


# (flag, type, default, help) per subcommand; None default means "not given"
_COMMON = [
    ("--format", str, "csv", "report format for --out: csv or json"),
    ("--out", str, None, "write a machine-readable report here"),
    ("--config", str, None, "flat JSON config file"),
    ("--threads", int, os.cpu_count() or 1, "worker processes for seed-parallel work"),
]
_BASE = ("--base", int, 10, "logarithm base B")
_THETAS = [
    ("--theta1", float, None, "first rotation angle (default log_B 3/2)"),
    ("--theta2", float, None, "second rotation angle (default log_B 1/2)"),
    ("--y0", float, 0.0, "starting value"),
]
_OPTIONS: dict[str, list] = {
    "trajectory": [("--seed", parse_big_int, None, "starting value m"),
                   ("--steps", int, 10, "number of iterates"),
                   ("--q", int, 3, "odd multiplier of the Qx+1 map")],
    "parity": [("--seed", parse_big_int, None, "starting value m"),
               ("--steps", int, 10, "number of parity bits"),
               ("--q", int, 3, "odd multiplier of the Qx+1 map")],
    "invert-parity": [("--bits", str, None, "parity pattern such as 110"),
                      ("--q", int, 3, "odd multiplier of the Qx+1 map")],
    "closed-form": [("--seed", parse_big_int, None, "starting value m"),
                    ("--k", int, 1, "iterate index"),
                    ("--q", int, 3, "odd multiplier of the Qx+1 map")],
    "discrepancy": [("--values", _float_list, None, "comma or space separated reals"),
                    ("--erdos-turan-k", int, None, "also print the Fourier bound with this K")],
    "simulate": [_BASE, *_THETAS, ("--steps", int, 64, "realization length"),
                 ("--rng-seed", int, 0, "64-bit seed"),
                 ("--stream", int, 0, "stream index"),
                 ("--trials", int, 0, "also estimate E[D] from this many realizations (>= 100)")],
    "enumerate": [_BASE, *_THETAS, ("--steps", int, 12, "path length (<= 24)"),
                  ("--k", int, 1, "Fourier frequency")],
    "moments": [_BASE, *_THETAS, ("--steps", int, 64, "realization length"),
                ("--k", int, 1, "Fourier frequency"),
                ("--trials", int, 0, "Monte Carlo trials (0 = skip)"),
                ("--rng-seed", int, 0, "64-bit seed"),
                ("--big-k", int, None, "cutoff for the E[D] upper bound")],
    "dio-scan": [_BASE, ("--theta1", float, None, "first angle (default log_B 3/2)"),
                 ("--theta2", float, None, "second angle (default log_B 1/2)"),
                 ("--k-max", int, 10**6, "largest multiplier scanned"),
                 ("--alpha", float, RHIN_EXPONENT, "exponent alpha"),
                 ("--trace", int, 0, "include per-k trace rows in the report (1 = yes)")],
    "lin-form": [("--u-max", int, 1000, "coefficient box size")],
    "benford": [_BASE, ("--seed", parse_big_int, None, "starting value m"),
                ("--steps", int, 100, "number of iterates"),
                ("--digits", int, 1, "digit block length K")],
    "verify-prop51": [("--m-bound", int, 4096, "largest seed"),
                      ("--k-bound", int, 12, "largest iterate index")],
    "verify-lemma52": [_BASE, ("--depth", int, 12, "depth N (<= 16)")],
    "lemma51-census": [_BASE, ("--depth", int, 200, "depth N"),
                       ("--samples", int, 1000, "number of sampled seeds"),
                       ("--rng-seed", int, 0, "64-bit seed"),
                       ("--exhaustive-depth", int, None, "also count set members for every m <= 2^this")],
    "run-theorem21": [_BASE, ("--depth", int, 12, "depth N"),
                      ("--seed-bound", parse_big_int, None, "seed range X (default 2^depth)"),
                      ("--samples", _samples_type, "census", "sample size or 'census'"),
                      ("--rng-seed", int, 0, "64-bit seed"),
                      ("--threshold", float, None, "discrepancy threshold (default 2 N^(-1/36))")],
}

_DESCRIPTIONS = {
    "trajectory": "print the first iterates of the Qx+1 map",
    "parity": "print the parity vector b_0..b_{N-1}",
    "invert-parity": "smallest positive residue with a given parity vector",
    "closed-form": "closed-form k-th iterate with its exact remainder",
    "discrepancy": "discrepancy D and star discrepancy of a list of reals",
    "simulate": "one realization of the two-rotation Bernoulli process",
    "enumerate": "statistics over all 2^N process paths",
    "moments": "exact, bounded and sampled second moments of Fourier coefficients",
    "dio-scan": "two-dimensional Diophantine quality scan",
    "lin-form": "scan |u0 + u1 log 2 + u2 log 3|",
    "benford": "leading-digit blocks of a trajectory against Benford probabilities",
    "verify-prop51": "exhaustive exact check of the closed-form iterate",
    "verify-lemma52": "exact distribution match between seeds and process paths",
    "lemma51-census": "approximation-error census against the exceptional set",
    "run-theorem21": "discrepancy ensemble study over seeds 1..X",
}


def build_parser() -> argparse.ArgumentParser:
    # argparse already exits with status 2 on bad usage
    parser = argparse.ArgumentParser(prog="benford3x1", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub.required = True
    for name, opts in _OPTIONS.items():
        p = sub.add_parser(name, help=_DESCRIPTIONS[name], description=_DESCRIPTIONS[name],
                           allow_abbrev=False)
        for flag, typ, default, help_text in opts + _COMMON:
            shown = "" if default is None else f" (default: {default})"
            p.add_argument(flag, type=typ, default=None, help=help_text + shown)
    return parser


def _defaults(command: str) -> dict[str, tuple[Callable, Any]]:
    out = {}
    for flag, typ, default, _ in _OPTIONS[command] + _COMMON:
        out[flag[2:].replace("-", "_")] = (typ, default)
    return out


def _load_config(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must be a flat JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(doc) - known
    if unknown:
        raise UsageError(f"unknown config keys in {path}: {sorted(unknown)}")
    missing = known - set(doc) - {"threshold"}
    if missing:
        raise UsageError(f"missing config keys in {path}: {sorted(missing)}")
    return {_CONFIG_KEYS[k]: v for k, v in doc.items()}


def resolve_options(command: str, args: argparse.Namespace, environ=os.environ) -> dict[str, Any]:
    """Merge flags, environment, config file and defaults."""
    specs = _defaults(command)
    config_path = args.config if args.config is not None else environ.get(ENV_PREFIX + "CONFIG")
    config = _load_config(config_path) if config_path else {}
    resolved = {}
    for dest, (typ, default) in specs.items():
        value = getattr(args, dest)
        if value is None:
            env = environ.get(ENV_PREFIX + dest.upper())
            if env is not None:
                try:
                    value = typ(env)
                except ValueError as exc:
                    raise UsageError(f"bad value for {ENV_PREFIX + dest.upper()}: {env!r}") from exc
        if value is None and dest in config:
            value = config[dest]
            if isinstance(value, str) and typ is not str:
                value = typ(value)
        resolved[dest] = default if value is None else value
    if resolved["format"] not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {resolved['format']!r}")
    return resolved


def _require(opts: dict[str, Any], *names: str) -> None:
    for name in names:
        if opts.get(name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _params(opts: dict[str, Any]) -> ProcessParams:
    default = ProcessParams.for_base(opts["base"])
    t1 = default.theta1 if opts["theta1"] is None else opts["theta1"]
    t2 = default.theta2 if opts["theta2"] is None else opts["theta2"]
    return ProcessParams(t1, t2, opts["y0"])


def _table(rows: list[tuple], header: Optional[tuple] = None) -> None:
    cells = [tuple(str(c) for c in r) for r in ([header] if header else []) + rows]
    if not cells:
        return
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip())


def _emit(opts: dict[str, Any], report) -> None:
    if opts["out"]:
        write_report(report, opts["out"], opts["format"])


def _status(passed: bool, name: str) -> int:
    print(f"{'PASS' if passed else 'FAIL'} {name}")
    return EXIT_OK if passed else EXIT_FAIL


# ---------------------------------------------------------------- handlers


def cmd_trajectory(o):
    _require(o, "seed")
    rec = trajectory(o["seed"], o["steps"], o["q"])
    rows = [{"k": k, "x_k": x, "b_k_minus_1": b}
            for k, (x, b) in enumerate(zip(rec.iterates, rec.parity), start=1)]
    for x in rec.iterates:
        print(x)
    _emit(o, {"kind": "trajectory", "seed": str(o["seed"]), "q": o["q"],
              "rows": [{**r, "x_k": str(r["x_k"])} for r in rows]})
    return EXIT_OK


def cmd_parity(o):
    _require(o, "seed")
    pv = parity_vector(o["seed"], o["steps"], o["q"])
    print(pv)
    _emit(o, {"kind": "parity", "seed": str(o["seed"]), "bits": str(pv), "weight": pv.weight,
              "rows": [{"k": k, "b_k": b} for k, b in enumerate(pv)]})
    return EXIT_OK


def cmd_invert_parity(o):
    _require(o, "bits")
    try:
        pv = ParityVector.from_string(o["bits"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    m = invert_parity(pv, o["q"])
    print(m)
    _emit(o, {"kind": "invert-parity", "bits": str(pv), "residue": str(m), "modulus": str(1 << len(pv))})
    return EXIT_OK


def cmd_closed_form(o):
    _require(o, "seed")
    cf = closed_form(o["seed"], o["k"], o["q"])
    _table([("leading", cf.leading), ("remainder", cf.remainder), ("total", cf.total)])
    _emit(o, {"kind": "closed-form", "seed": str(o["seed"]), "k": o["k"], "leading": str(cf.leading),
              "remainder": str(cf.remainder), "total": str(cf.total)})
    return EXIT_OK


def cmd_discrepancy(o):
    _require(o, "values")
    dv = discrepancy(o["values"])
    print(f"D  {dv.d!r}")
    print(f"D* {dv.d_star!r}")
    out = {"kind": "discrepancy", "n": len(o["values"]), "d": dv.d, "d_star": dv.d_star}
    if o["erdos_turan_k"]:
        bound = erdos_turan_bound(o["values"], o["erdos_turan_k"])
        print(f"Erdos-Turan bound (K={o['erdos_turan_k']}) {bound!r}")
        out["erdos_turan_bound"] = bound
    _emit(o, out)
    return EXIT_OK


def cmd_simulate(o):
    params = _params(o)
    r = realize(params, o["steps"], o["rng_seed"], o["stream"])
    dv = discrepancy(r.values)
    _table([(n, b, f"{v:.12f}") for n, (b, v) in enumerate(zip(r.path, r.values), start=1)],
           ("n", "step", "y_n"))
    print(f"D {dv.d!r}")
    out = {"kind": "simulate", "theta1": params.theta1, "theta2": params.theta2, "y0": params.y0,
           "rng_seed": o["rng_seed"], "stream": o["stream"], "d": dv.d,
           "rows": [{"n": n, "step": b, "y": v} for n, (b, v) in enumerate(zip(r.path, r.values), start=1)]}
    if o["trials"]:
        mean, se = expected_discrepancy_mc(params, o["steps"], o["trials"], o["rng_seed"])
        print(f"E[D] ~ {mean!r} +/- {se!r} ({o['trials']} trials)")
        out.update(mc_mean_d=mean, mc_std_error=se, trials=o["trials"])
    _emit(o, out)
    return EXIT_OK


def cmd_enumerate(o):
    params = _params(o)
    vals = path_values(params, all_paths(o["steps"]))
    d = discrepancy_rows(vals)[0]
    moment = float(np.mean(np.abs(fourier_rows(vals, o["k"])) ** 2))
    exact = second_moment_exact(params, o["k"], o["steps"])
    _table([("paths", len(d)), ("mean D", repr(float(d.mean()))),
            (f"mean |U({o['k']})|^2", repr(moment)), ("exact second moment", repr(exact))])
    _emit(o, {"kind": "enumerate", "paths": len(d), "mean_d": float(d.mean()),
              "mean_abs_u_sq": moment, "second_moment_exact": exact, "k": o["k"]})
    return EXIT_OK


def cmd_moments(o):
    params = _params(o)
    k, n = o["k"], o["steps"]
    exact = second_moment_exact(params, k, n)
    rows = [("exact E|U|^2", repr(exact))]
    out = {"kind": "moments", "k": k, "n": n, "second_moment_exact": exact}
    try:
        bound = second_moment_bound(params, k, n)
        rows.append(("bound", repr(bound)))
        out["second_moment_bound"] = bound
    except DegenerateBound:
        rows.append(("bound", "undefined"))
    upper = expected_discrepancy_upper(params, n, o["big_k"])
    rows.append(("E[D] upper bound", repr(upper)))
    out["expected_discrepancy_upper"] = upper
    if o["trials"]:
        mean, se = second_moment_mc(params, k, n, o["trials"], o["rng_seed"])
        rows.append(("Monte Carlo E|U|^2", f"{mean!r} +/- {se!r}"))
        out.update(mc_mean=mean, mc_std_error=se)
    _table(rows)
    _emit(o, out)
    return EXIT_OK


def cmd_dio_scan(o):
    t1d, t2d = theta_pair(o["base"])
    t1 = t1d if o["theta1"] is None else o["theta1"]
    t2 = t2d if o["theta2"] is None else o["theta2"]
    rep = dio_scan_2d(t1, t2, o["k_max"], o["alpha"], trace=bool(o["trace"]))
    _table([("k_max", rep.k_max), ("alpha", rep.alpha), ("worst_k", rep.worst_k),
            ("worst_quality", repr(rep.worst_quality))])
    out = {"kind": "dio-scan", "k_max": rep.k_max, "alpha": rep.alpha, "worst_k": rep.worst_k,
           "worst_quality": rep.worst_quality}
    if rep.trace is not None:
        out["rows"] = [{"k": int(k), "dist1": d1, "dist2": d2} for k, d1, d2 in rep.trace.tolist()]
    _emit(o, out)
    return EXIT_OK


def cmd_lin_form(o):
    rep = lin_form_scan(o["u_max"])
    _table([("u_max", rep.u_max), ("min |form|", repr(rep.min_value)), ("argmin (u0,u1,u2)", rep.argmin),
            ("empirical constant", repr(rep.empirical_constant)), ("constant argmin", rep.constant_argmin)])
    _emit(o, {"kind": "lin-form", "u_max": rep.u_max, "min_value": rep.min_value,
              "argmin": list(rep.argmin), "empirical_constant": rep.empirical_constant,
              "constant_argmin": list(rep.constant_argmin)})
    return EXIT_OK


def cmd_benford(o):
    _require(o, "seed")
    xs = trajectory(o["seed"], o["steps"]).iterates
    freq = empirical_block_freq(xs, o["base"], o["digits"])
    rows = [(str(b), f"{freq.get(b, 0.0):.6f}", f"{benford_prob(b):.6f}")
            for b in all_blocks(o["base"], o["digits"])]
    _table(rows, ("block", "observed", "benford"))
    dev, d = deviation_vs_discrepancy(xs, o["base"], o["digits"])
    print(f"max deviation {dev!r}")
    print(f"D(log set)    {d!r}")
    _emit(o, {"kind": "benford", "seed": str(o["seed"]), "deviation": dev, "discrepancy": d,
              "rows": [{"block": b, "observed": float(f), "benford": float(p)} for b, f, p in rows]})
    return _status(dev <= d + 1e-12, "deviation <= discrepancy")


def cmd_verify_prop51(o):
    res = verify_prop51(o["m_bound"], o["k_bound"])
    _table(sorted(res.diagnostics.items()))
    if res.counterexample:
        print(f"counterexample {res.counterexample}", file=sys.stderr)
    _emit(o, res)
    return _status(res.passed, "closed-form identity and parity bijection")


def cmd_verify_lemma52(o):
    res = verify_lemma52(o["base"], o["depth"])
    _table(sorted(res.diagnostics.items()))
    if res.counterexample:
        print(f"mismatch {res.counterexample}", file=sys.stderr)
    _emit(o, res)
    return _status(res.passed, "seed label multiset equals process path multiset")


def cmd_lemma51_census(o):
    res = lemma51_census(o["base"], o["depth"], o["samples"], o["rng_seed"])
    passed = res.passed
    if o["exhaustive_depth"]:
        count, cap = exceptional_census(o["exhaustive_depth"])
        res.diagnostics.update(exhaustive_depth=o["exhaustive_depth"], exhaustive_members=count,
                               exhaustive_cap=cap)
        passed = passed and count <= cap
        res.passed = passed
    _table(sorted(res.diagnostics.items()))
    _emit(o, res)
    return _status(passed, "approximation error bound off the exceptional set")


def cmd_run_theorem21(o):
    seed_bound = o["seed_bound"] if o["seed_bound"] is not None else 1 << o["depth"]
    try:
        config = ExperimentConfig(base=o["base"], depth=o["depth"], seed_bound=parse_big_int(seed_bound),
                                  sample_size=o["samples"], rng_seed=o["rng_seed"],
                                  output_path=o["out"], threshold=o["threshold"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = run_theorem21(config, threads=o["threads"])
    agg = report.aggregates
    rows = [(k, repr(agg[k]) if isinstance(agg[k], float) else agg[k])
            for k in ("count", "mean_d", "std_error", "mean_d_tilde", "max_err", "threshold",
                      "default_threshold_vacuous", "exceptional_fraction", "empirical_c_ratio")]
    rows += [(f"exceptional_fraction@{t}", repr(v)) for t, v in agg["exceptional_fraction_at"].items()]
    _table(rows)
    _emit(o, report)
    return EXIT_OK


_HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in _OPTIONS}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args.command, args)
        return _HANDLERS[args.command](opts)
    except (UsageError, ValueError, ReportError) as exc:
        print(f"benford3x1 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
