import json
import subprocess
import sys

import pytest

from vskextrap.cli import main
from vskextrap.harness import CSV_HEADER, ExperimentConfig, read_csv, run_experiment


def _error_line(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


def test_csv_to_stdout(capsys):
    assert main(["--function", "f2", "--distribution", "uniform", "--method", "cubic"]) == 0
    out = capsys.readouterr().out
    rows = read_csv(out)
    assert out.splitlines()[0] == ",".join(CSV_HEADER)
    assert len(rows) == 11 and rows[0].rmse == pytest.approx(2.89e-5, rel=0.05)


def test_flags_reach_config(tmp_path):
    out = tmp_path / "r.csv"
    argv = [
        "--function", "f3", "--distribution", "random", "--method", "cubic", "tps_vsk",
        "--n", "20", "--a", "0.2", "--b", "1.5", "--lambda", "0", "--noise-sigma", "1e-5",
        "--seed", "3", "--lambda2-max", "1.8", "--out", str(out), "--format", "csv",
    ]
    assert main(argv) == 0
    cfg = ExperimentConfig("f3", "random", n=20, a=0.2, b=1.5, lam=0.0, noise_sigma=1e-5, seed=3, lambda2_steps=3)
    assert read_csv(str(out)) == run_experiment(cfg)


def test_comma_separated_methods(capsys):
    assert main(["--function", "f4", "--distribution", "halton", "--method", "cubic,tps_vsk", "--lambda2-max", "2.0"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert [r.method for r in rows] == ["cubic", "tps_vsk"]


def test_table_format(capsys):
    assert main(["--function", "f1", "--distribution", "chebyshev", "--format", "table"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["Lambda2", "f1:cubic:chebyshev", "f1:tps_vsk:chebyshev"]
    assert len(lines) == 12


def test_errors_format(capsys):
    argv = ["--function", "f2", "--distribution", "uniform", "--method", "cubic", "--lambda2-max", "2.1", "--s", "4", "--format", "errors"]
    assert main(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 2 * 4


def test_reproduce_preset(capsys):
    assert main(["--reproduce", "table2", "--lambda2-max", "2.2"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert len(rows) == 4 * 2 * 3
    assert {r.distribution for r in rows} == {"halton", "chebyshev", "random", "uniform"}
    assert max(r.rmse for r in rows if r.method == "tps_vsk") <= 1e-10


def test_seeds_average(capsys):
    argv = ["--function", "f1", "--distribution", "random", "--method", "cubic", "--lambda2-max", "2.0", "--seeds", "3", "--seed", "4"]
    assert main(argv) == 0
    (row,) = read_csv(capsys.readouterr().out)
    singles = [run_experiment(ExperimentConfig("f1", "random", methods=("cubic",), lambda2_steps=0, seed=s))[0].rmse for s in (4, 5, 6)]
    assert row.seed == 4 and row.rmse == pytest.approx(sum(singles) / 3, rel=1e-15)


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"function_id": "f2", "distribution": "uniform", "methods": ["cubic"], "lambda": 0.0, "lambda2_max": 2.1}))
    assert main(["--config", str(cfg)]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert len(rows) == 2
    # command-line flags override the file
    assert main(["--config", str(cfg), "--function", "f4"]) == 0
    assert {r.function for r in read_csv(capsys.readouterr().out)} == {"f4"}


def test_bit_identical_output(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["--function", "f5", "--distribution", "random", "--seed", "3", "--noise-sigma", "1e-4", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


@pytest.mark.parametrize(
    "argv, kind, code",
    [
        (["--function", "f9", "--distribution", "uniform"], "ConfigError", 2),
        (["--function", "f1"], "ConfigError", 2),
        (["--function", "f1", "--distribution", "halton", "--method", "svr"], "ConfigError", 2),
        (["--function", "f1", "--distribution", "uniform", "--lambda2-max", "2.55"], "ConfigError", 2),
        (["--function", "f1", "--distribution", "uniform", "--format", "xml"], "_UsageError", 2),
        (["--n", "ten"], "_UsageError", 2),
        (["--reproduce", "table1", "--function", "f2"], "ConfigError", 2),
        (["--function", "f1", "--distribution", "uniform", "--a", "-1"], "ExperimentError", 1),
    ],
)
def test_failures(argv, kind, code, capsys):
    assert main(argv) == code
    line = _error_line(capsys)
    assert line["error"] is True and line["type"] == kind and line["exit_code"] == code
    assert line["message"]


def test_unwritable_output(tmp_path, capsys):
    out = tmp_path / "missing" / "r.csv"
    assert main(["--function", "f2", "--distribution", "uniform", "--out", str(out)]) == 3
    assert _error_line(capsys)["exit_code"] == 3


def test_missing_and_bad_config(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "nope.json")]) == 3
    capsys.readouterr()
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad)]) == 2
    capsys.readouterr()
    bad.write_text(json.dumps({"function_id": "f1", "distribution": "uniform", "colour": "red"}))
    assert main(["--config", str(bad)]) == 2


def test_module_entry_point():
    ok = subprocess.run(
        [sys.executable, "-m", "vskextrap", "--function", "f2", "--distribution", "uniform", "--method", "cubic", "--lambda2-max", "2.0"],
        capture_output=True, text=True, check=False,
    )
    assert ok.returncode == 0
    assert ok.stdout.splitlines()[0] == ",".join(CSV_HEADER)
    bad = subprocess.run([sys.executable, "-m", "vskextrap", "--function", "f0", "--distribution", "uniform"], capture_output=True, text=True, check=False)
    assert bad.returncode == 2 and json.loads(bad.stderr.strip())["type"] == "ConfigError"
