from __future__ import annotations

import csv
import io
import json

import pytest

from qtrel.cli import main
from qtrel.experiment import CSV_COLUMNS


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_reliability_inline(capsys):
    code, out, err = run(["reliability", "--d", "250", "--n-qubit", "2", "--runs", "500", "--seed", "1"], capsys)
    assert code == 0
    table = list(csv.DictReader(io.StringIO(out)))
    assert len(table) == 1 and tuple(table[0]) == CSV_COLUMNS
    assert "1 grid point" in err


def test_reliability_rejects_grid(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"d": [0, 100]}))
    code, _, err = run(["reliability", "--spec", str(spec)], capsys)
    assert code == 1 and "sweep" in err


def test_spec_error_exit_code(capsys):
    code, _, err = run(["reliability", "--f-th", "0.2"], capsys)
    assert code == 1 and "1/4" in err


def test_unknown_key_exit_code(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"dist": 3}))
    code, _, err = run(["sweep", "--spec", str(spec)], capsys)
    assert code == 1 and "dist" in err


def test_degenerate_exit_code(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"n_qubit": 8, "max_slots": 1, "runs": 20}))
    code, out, _ = run(["sweep", "--spec", str(spec), "--quiet"], capsys)
    assert code == 2 and "nan" in out


def test_sweep_writes_outputs_and_is_reproducible(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"d": [0, 500], "n_qubit": [2, 4], "runs": 400, "seed": 8}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--spec", str(spec), "--out", str(a), "--quiet"]) == 0
    assert main(["sweep", "--spec", str(spec), "--out", str(b), "--workers", "4", "--quiet"]) == 0
    assert a.read_bytes() == b.read_bytes()
    j = tmp_path / "a.json"
    assert main(["sweep", "--spec", str(spec), "--out", str(j), "--format", "json", "--quiet"]) == 0
    assert len(json.loads(j.read_text())["rows"]) == 4


def test_spec_outputs_block(tmp_path, capsys):
    target = tmp_path / "o.json"
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"runs": 100, "outputs": [{"path": str(target), "format": "json"}]}))
    assert main(["sweep", "--spec", str(spec), "--quiet"]) == 0
    assert json.loads(target.read_text())["rows"][0]["n_runs"] == 100


def test_feasibility_inline(capsys):
    code, out, _ = run(
        ["feasibility", "--tau", "3e-3", "--r-th", "0.8", "--resolution", "4000", "--runs", "300", "--quiet"], capsys
    )
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["axis"] == "max_distance" and float(row["frontier"]) > 0


def test_sweep_refuses_feasibility_spec(capsys):
    code, _, err = run(["sweep", "--preset", "experiment3"], capsys)
    assert code == 1 and "feasibility" in err


def test_presets_list_and_show(capsys):
    code, out, _ = run(["presets", "list"], capsys)
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()] == ["experiment1", "experiment2", "experiment3", "table1", "table2"]
    code, out, _ = run(["presets", "show", "experiment1"], capsys)
    assert json.loads(out)["d"] == [0, 250, 500, 750, 1000, 1250]
    code, _, err = run(["presets", "show", "nope"], capsys)
    assert code == 1


def test_oracle_check_small(capsys):
    code, out, _ = run(["oracle-check", "--runs", "5000", "--seed", "1"], capsys)
    assert code == 0
    assert out.strip().splitlines()[-1].startswith("28/28")


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for cmd in ("reliability", "sweep", "feasibility", "oracle-check", "presets"):
        assert cmd in out
