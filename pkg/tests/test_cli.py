import json
import subprocess
import sys

import pytest

from benford3x1.cli import main
from benford3x1.experiments import read_report


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_trajectory(capsys):
    code, out, _ = run(capsys, "trajectory", "--seed", "3", "--steps", "3")
    assert code == 0
    assert out.split() == ["5", "8", "4"]


def test_trajectory_big_seed(capsys):
    code, out, _ = run(capsys, "trajectory", "--seed", "2^100", "--steps", "2")
    assert out.split() == [str(2**99), str(2**98)]


def test_verify_prop51(capsys):
    code, out, _ = run(capsys, "verify-prop51", "--m-bound", "4096", "--k-bound", "12")
    assert code == 0
    assert "PASS" in out


def test_discrepancy(capsys):
    code, out, _ = run(capsys, "discrepancy", "--values", "0.5")
    assert code == 0
    assert out.splitlines()[0].split() == ["D", "1.0"]


def test_discrepancy_erdos_turan(capsys):
    code, out, _ = run(capsys, "discrepancy", "--values", "0,0,0", "--erdos-turan-k", "1")
    assert code == 0 and "3.5" in out


@pytest.mark.parametrize("argv,needle", [
    (["parity", "--seed", "3", "--steps", "3"], "110"),
    (["invert-parity", "--bits", "110"], "3"),
    (["closed-form", "--seed", "3", "--k", "2"], "5/4"),
    (["simulate", "--steps", "5", "--rng-seed", "4"], "D "),
    (["enumerate", "--steps", "8"], "256"),
    (["moments", "--steps", "16", "--trials", "200"], "Monte Carlo"),
    (["dio-scan", "--k-max", "1000"], "worst_quality"),
    (["lin-form", "--u-max", "10"], "empirical constant"),
    (["benford", "--seed", "27", "--steps", "50"], "PASS"),
    (["verify-lemma52", "--depth", "8"], "PASS"),
    (["lemma51-census", "--depth", "100", "--samples", "50", "--exhaustive-depth", "10"], "PASS"),
    (["run-theorem21", "--depth", "8"], "mean_d"),
])
def test_subcommands(capsys, argv, needle):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert needle in out


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["trajectory", "--bogus", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["trajectory", "--see", "3"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    assert run(capsys, "trajectory")[0] == 2
    assert run(capsys, "trajectory", "--seed", "0")[0] == 2
    assert run(capsys, "invert-parity", "--bits", "12")[0] == 2
    assert run(capsys, "run-theorem21", "--depth", "8", "--seed-bound", "10")[0] == 2
    assert run(capsys, "discrepancy", "--values", "0.5", "--format", "xml")[0] == 2


def test_env_override(capsys, monkeypatch):
    monkeypatch.setenv("BENFORD3X1_STEPS", "2")
    code, out, _ = run(capsys, "trajectory", "--seed", "3")
    assert out.split() == ["5", "8"]
    code, out, _ = run(capsys, "trajectory", "--seed", "3", "--steps", "1")
    assert out.split() == ["5"]
    monkeypatch.setenv("BENFORD3X1_STEPS", "two")
    assert run(capsys, "trajectory", "--seed", "3")[0] == 2


def test_config_file(tmp_path, capsys, monkeypatch):
    cfg = {"base": 10, "depth": 8, "seed_bound": "2^8", "sample_size": "census",
           "rng_seed": 0, "output_path": None}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out_path = tmp_path / "r.json"
    code, out, _ = run(capsys, "run-theorem21", "--config", str(path), "--format", "json",
                       "--out", str(out_path))
    assert code == 0
    doc = read_report(out_path)
    assert doc["aggregates"]["count"] == 256
    # environment beats the file, flags beat the environment
    monkeypatch.setenv("BENFORD3X1_DEPTH", "9")
    run(capsys, "run-theorem21", "--config", str(path), "--seed-bound", "2^9", "--out", str(out_path),
        "--format", "json")
    assert read_report(out_path)["aggregates"]["count"] == 512
    code, _, _ = run(capsys, "run-theorem21", "--config", str(path), "--depth", "7", "--seed-bound", "2^7",
                     "--out", str(out_path), "--format", "json")
    assert code == 0
    assert read_report(out_path)["aggregates"]["count"] == 128


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"base": 10, "nonsense": 1}))
    assert run(capsys, "run-theorem21", "--config", str(bad))[0] == 2
    assert run(capsys, "run-theorem21", "--config", str(tmp_path / "none.json"))[0] == 2


SMALL_RUNS = [
    ["trajectory", "--seed", "27", "--steps", "20"],
    ["parity", "--seed", "27", "--steps", "20"],
    ["invert-parity", "--bits", "1101"],
    ["closed-form", "--seed", "2^70", "--k", "5"],
    ["discrepancy", "--values", "0.1 0.5 0.7", "--erdos-turan-k", "3"],
    ["simulate", "--steps", "20", "--trials", "100"],
    ["enumerate", "--steps", "6"],
    ["moments", "--steps", "12", "--trials", "100"],
    ["dio-scan", "--k-max", "50", "--trace", "1"],
    ["lin-form", "--u-max", "5"],
    ["benford", "--seed", "27", "--steps", "30", "--digits", "2"],
    ["verify-prop51", "--m-bound", "16", "--k-bound", "4"],
    ["verify-lemma52", "--depth", "6"],
    ["lemma51-census", "--depth", "50", "--samples", "20"],
    ["run-theorem21", "--depth", "6"],
]


def test_every_subcommand_covered():
    from benford3x1.cli import _OPTIONS

    assert {argv[0] for argv in SMALL_RUNS} == set(_OPTIONS)


@pytest.mark.parametrize("argv", SMALL_RUNS, ids=lambda a: a[0])
def test_json_reports_parse(tmp_path, capsys, argv):
    path = tmp_path / "r.json"
    assert run(capsys, *argv, "--format", "json", "--out", str(path))[0] == 0
    doc = read_report(path)
    assert doc["schema"] == "benford3x1.report"
    assert doc["kind"]
    assert json.loads(path.read_text()) == doc


@pytest.mark.parametrize("argv", SMALL_RUNS, ids=lambda a: a[0])
def test_csv_reports_parse(tmp_path, capsys, argv):
    path = tmp_path / "r.csv"
    assert run(capsys, *argv, "--out", str(path))[0] == 0
    doc = read_report(path)
    assert doc["header"] or doc["footer"]


@pytest.mark.parametrize("argv", [
    ["simulate", "--steps", "30", "--rng-seed", "5", "--trials", "100"],
    ["moments", "--steps", "30", "--rng-seed", "5", "--trials", "300"],
    ["lemma51-census", "--depth", "60", "--samples", "50", "--rng-seed", "5"],
], ids=lambda a: a[0])
def test_stochastic_stdout_deterministic(capsys, argv):
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_stdout_deterministic(capsys):
    argv = ["run-theorem21", "--depth", "16", "--samples", "500", "--seed-bound", "2^40",
            "--rng-seed", "3"]
    first = run(capsys, *argv, "--threads", "1")[1]
    second = run(capsys, *argv, "--threads", "2")[1]
    assert first == second


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "benford3x1.cli", "trajectory", "--seed", "1", "--steps", "3"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.split() == ["2", "1", "2"]
