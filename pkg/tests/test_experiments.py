from __future__ import annotations

import json
from pathlib import Path

from hubbard_adapt import cli
from hubbard_adapt.config import load_config
from hubbard_adapt.experiments import run_scaling_suite, run_table1_suite


def test_table1_subset(tmp_path):
    report = run_table1_suite(tmp_path, cells=[("2x1", 3), ("3x1", 6)])
    assert report.passed, report.to_text()
    assert [r["cell"] for r in report.rows] == ["2x1_U3", "3x1_U6"]
    for row in report.rows:
        cell = Path(row["artifacts"])
        cfg = load_config(cell / "config.ini")
        assert cfg.grid.width == int(row["grid"][0])
        trace = (cell / "trace.jsonl").read_text().splitlines()
        assert len(trace) == row["measured_depth"] + 1
    saved = json.loads((tmp_path / "report.json").read_text())
    assert saved["pass_flags"] == report.pass_flags
    assert "PASS" in (tmp_path / "report.txt").read_text()


def test_scaling_subset_is_deterministic(tmp_path):
    a = run_scaling_suite(output_dir=tmp_path / "a", grids=("2x1", "3x1", "4x1"))
    b = run_scaling_suite(output_dir=tmp_path / "a", grids=("2x1", "3x1", "4x1"))
    assert a.to_dict() == b.to_dict()
    counts = [r["params_to_99_fidelity"] for r in a.rows]
    assert counts == sorted(set(counts))


def test_suite_cli(tmp_path, capsys):
    assert cli.main(["suite", "--name", "initial-state", "--output", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "PASS  singly_dominates_doubly" in out
    report = json.loads((tmp_path / "report.json").read_text())
    assert "unavailable" in report["notes"]["slater"]
