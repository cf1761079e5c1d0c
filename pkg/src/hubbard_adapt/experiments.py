"""Scripted experiment suites with machine-checkable summaries.

Every cell is an ordinary :class:`~hubbard_adapt.config.RunConfig` executed by
:func:`~hubbard_adapt.runner.run`, so each report row points at a directory
holding its ``config.ini``, ``trace.jsonl`` and ``result.json``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import RunConfig, from_mapping
from .errors import HubbardAdaptError
from .io import write_json

log = logging.getLogger(__name__)

# electrons per spin for each grid; every choice has a unique ground state
FILLINGS = {
    "2x1": (1, 1),
    "3x1": (1, 1),
    "4x1": (2, 2),
    "2x2": (2, 2),
    "5x1": (2, 2),
    "6x1": (3, 3),
    "3x2": (3, 3),
}

# published reference values: (E_exact, depth, fidelity, delta_E)
REFERENCE_TABLE1 = {
    ("2x1", 1): (-2.56, 4, 1.00, 3.80e-12),
    ("2x1", 3): (-4.00, 4, 1.00, 1.03e-11),
    ("2x1", 6): (-6.61, 4, 1.00, 1.15e-11),
    ("3x1", 1): (-3.51, 9, 1.00, 1.17e-09),
    ("3x1", 3): (-5.12, 9, 1.00, 2.81e-09),
    ("3x1", 6): (-7.85, 10, 1.00, 1.52e-10),
    ("4x1", 1): (-5.58, 19, 1.00, 2.90e-04),
    ("4x1", 3): (-8.35, 24, 1.00, 1.17e-04),
    ("4x1", 6): (-13.43, 29, 1.00, 1.42e-03),
    ("2x2", 1): (-5.34, 35, 1.00, 2.87e-08),
    ("2x2", 3): (-8.42, 32, 1.00, 6.52e-05),
    ("2x2", 6): (-13.63, 32, 1.00, 2.19e-05),
    ("5x1", 1): (-6.73, 32, 1.00, 7.88e-04),
    ("5x1", 3): (-9.74, 53, 1.00, 1.50e-03),
    ("5x1", 6): (-14.99, 75, 1.00, 7.15e-04),
    ("6x1", 1): (-8.63, 51, 1.00, 1.56e-03),
    ("6x1", 3): (-12.72, 84, 1.00, 6.09e-03),
    ("6x1", 6): (-20.27, 79, 0.98, 2.19e-02),
    ("3x2", 1): (-9.28, 52, 1.00, 1.12e-03),
    ("3x2", 3): (-13.28, 80, 0.99, 2.93e-02),
    ("3x2", 6): (-20.73, 71, 0.88, 6.74e-02),
}

TABLE1_GRIDS = ("2x1", "3x1", "4x1", "2x2", "5x1", "6x1", "3x2")
TABLE1_U = (1, 3, 6)
SCALING_GRIDS = ("2x1", "3x1", "4x1", "5x1", "6x1", "2x2", "3x2")
CHAINS = ("2x1", "3x1", "4x1", "5x1", "6x1")

# 2x2 sites: 0 1 / 2 3 ; mode = 2*site + spin
INITIAL_STATES = {
    "doubly_diag_03": ("doubly", (0, 1, 6, 7)),
    "doubly_diag_12": ("doubly", (2, 3, 4, 5)),
    "singly_stripe": ("singly", (0, 3, 4, 7)),
    "singly_stripe_flip": ("singly", (1, 2, 5, 6)),
}
# recorded but not part of the pass flags
INITIAL_STATE_EXTRAS = {
    "doubly_adjacent_01": ("doubly", (0, 1, 2, 3)),
    "singly_neel": ("singly", (0, 3, 5, 6)),
    "singly_neel_flip": ("singly", (1, 2, 4, 7)),
}


@dataclass
class SuiteReport:
    name: str
    rows: list[dict]
    pass_flags: dict[str, bool]
    notes: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.pass_flags.values())

    def to_dict(self) -> dict:
        return {"name": self.name, "rows": self.rows, "pass_flags": self.pass_flags, "notes": self.notes}

    def to_text(self) -> str:
        cols = ["cell", "grid", "U", "measured_depth", "fidelity", "delta_E", "params_to_99_fidelity"]
        extra = [c for c in ("ref_depth", "ref_fidelity", "ref_delta_E") if any(c in r for r in self.rows)]
        cols += extra
        table = [cols] + [[_cell(r.get(c)) for c in cols] for r in self.rows]
        widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
        lines = [f"suite {self.name}"]
        lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in table]
        lines.append("")
        lines += [f"{'PASS' if ok else 'FAIL'}  {flag}" for flag, ok in self.pass_flags.items()]
        lines += [f"note  {k}: {v}" for k, v in self.notes.items()]
        return "\n".join(lines) + "\n"

    def write(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        write_json(directory / "report.json", self.to_dict())
        (directory / "report.txt").write_text(self.to_text(), encoding="utf-8")


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cell_config(grid: str, U: float, adapt: dict | None = None, init: dict | None = None, task: str = "ground") -> RunConfig:
    width, height = (int(x) for x in grid.split("x"))
    n_up, n_down = FILLINGS[grid]
    return from_mapping(
        {
            "run": {"task": task},
            "grid": {"width": width, "height": height},
            "params": {"U": U, "mu_mode": "half_filling_shift"},
            "sector": {"n_up": n_up, "n_down": n_down},
            "init": init or {},
            "adapt": adapt or {},
        }
    )


def _run_one(args) -> dict:
    from .runner import run

    cfg, out = args
    return run(cfg, output_dir=out)["result"]


def _run_cells(cells: dict[str, RunConfig], root: Path, workers: int) -> dict[str, dict]:
    jobs = [(cfg, str(root / "cells" / name)) for name, cfg in cells.items()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    return dict(zip(cells, results))


def _row(name: str, grid: str, U: float, res: dict, root: Path) -> dict:
    return {
        "cell": name,
        "grid": grid,
        "U": U,
        "E_exact": res["exact_energy"],
        "measured_depth": res["depth"],
        "fidelity": res["fidelity"],
        "delta_E": res["delta_E"],
        "params_to_99_fidelity": res["depth_to_0.99"],
        "stop_reason": res["stop_reason"],
        "artifacts": str(root / "cells" / name),
    }


def run_table1_suite(output_dir="runs/suite-table1", workers: int = 1, cells: list[tuple[str, int]] | None = None) -> SuiteReport:
    """Default stopping rules on all grid/U cells, compared against reference values."""
    root = Path(output_dir)
    keys = cells or [(g, u) for g in TABLE1_GRIDS for u in TABLE1_U]
    configs = {f"{g}_U{u}": cell_config(g, u) for g, u in keys}
    results = _run_cells(configs, root, workers)
    rows = []
    for (g, u), (name, res) in zip(keys, results.items()):
        row = _row(name, g, u, res, root)
        ref_e, ref_depth, ref_fid, ref_de = REFERENCE_TABLE1[(g, u)]
        row.update(ref_E_exact=ref_e, ref_depth=ref_depth, ref_fidelity=ref_fid, ref_delta_E=ref_de)
        rows.append(row)
    by = {(r["grid"], r["U"]): r for r in rows}

    def check(key, fn):
        return fn(by[key]) if key in by else True

    flags = {
        "E_exact_matches_reference_2dp": all(abs(r["E_exact"] - r["ref_E_exact"]) < 0.005 + 1e-12 for r in rows),
        "2x1_fidelity_1e-6_depth_le_6": all(
            check(("2x1", u), lambda r: r["fidelity"] >= 1 - 1e-6 and r["measured_depth"] <= 6) for u in TABLE1_U
        ),
        "3x1_fidelity_0.9999_depth_le_14": all(
            check(("3x1", u), lambda r: r["fidelity"] >= 0.9999 and r["measured_depth"] <= 14) for u in TABLE1_U
        ),
        "2x2_U6_fidelity_0.999_dE_1e-3": check(("2x2", 6), lambda r: r["fidelity"] >= 0.999 and r["delta_E"] <= 1e-3),
        "3x2_U1_fidelity_0.99_depth_le_80": check(
            ("3x2", 1), lambda r: r["params_to_99_fidelity"] is not None and r["params_to_99_fidelity"] <= 80
        ),
        "6x1_U6_fidelity_0.95": check(("6x1", 6), lambda r: r["fidelity"] >= 0.95),
        "3x2_U6_fidelity_0.80": check(("3x2", 6), lambda r: r["fidelity"] >= 0.80),
    }
    notes = {
        "tolerances": "reference 2x2 U=6 fidelity 1.00 widened to 0.999; 6x1 U=6 0.98 to 0.95; 3x2 U=6 0.88 to 0.80; "
        "3x2 U=1 depth 52 widened to 80",
        "stopping": "energy decrease < 1e-4 or max pool gradient < 1e-3",
    }
    report = SuiteReport("table1", rows, flags, notes)
    report.write(root)
    return report


def run_scaling_suite(fidelity_target: float = 0.99, U: float = 2, output_dir="runs/suite-scaling", workers: int = 1, grids=SCALING_GRIDS) -> SuiteReport:
    """Operators needed to first reach ``fidelity_target`` with the stopping rules disabled."""
    root = Path(output_dir)
    adapt = {"epsilon": 0, "delta": 0, "max_depth": 200, "target_fidelity": fidelity_target}
    configs = {f"{g}_U{U:g}": cell_config(g, U, adapt) for g in grids}
    results = _run_cells(configs, root, workers)
    rows = [_row(name, g, U, res, root) for g, (name, res) in zip(grids, results.items())]
    counts = {r["grid"]: r["params_to_99_fidelity"] for r in rows}
    chain_counts = [counts[c] for c in CHAINS if c in counts]
    flags = {
        "all_cells_reach_target": all(v is not None for v in counts.values()),
        "chains_strictly_increasing": None not in chain_counts
        and all(b > a for a, b in zip(chain_counts, chain_counts[1:])),
        "2x1_le_6": counts.get("2x1") is not None and counts["2x1"] <= 6 if "2x1" in counts else True,
        "3x2_le_80": counts.get("3x2") is not None and counts["3x2"] <= 80 if "3x2" in counts else True,
    }
    notes = {"reference": "3x2 count reported as 62; bound widened to 80"}
    report = SuiteReport("scaling", rows, flags, notes)
    report.write(root)
    return report


def run_initial_state_suite(output_dir="runs/suite-initial-state", workers: int = 1, U: float = 3, fidelity_target: float = 0.99) -> SuiteReport:
    """Depth to ``fidelity_target`` on 2x2 from doubly and singly occupied product starts."""
    root = Path(output_dir)
    adapt = {"epsilon": 0, "delta": 0, "max_depth": 200, "target_fidelity": fidelity_target}
    starts = {**INITIAL_STATES, **INITIAL_STATE_EXTRAS}
    configs = {
        name: cell_config("2x2", U, adapt, {"kind": "product", "occupied": " ".join(map(str, occ))})
        for name, (_, occ) in starts.items()
    }
    results = _run_cells(configs, root, workers)
    rows = []
    for name, res in results.items():
        row = _row(name, "2x2", U, res, root)
        row["class"] = starts[name][0]
        row["labeled"] = name in INITIAL_STATES
        rows.append(row)

    def depths(cls, labeled_only=True):
        return [r["params_to_99_fidelity"] for r in rows if r["class"] == cls and (r["labeled"] or not labeled_only)]

    singly, doubly = depths("singly"), depths("doubly")
    reached = None not in singly + doubly
    flags = {
        "labeled_starts_reach_target": reached,
        "singly_dominates_doubly": reached and max(singly) < min(doubly),
        "within_class_equal": reached and len(set(singly)) == 1 and len(set(doubly)) == 1,
    }
    notes = {}
    all_s, all_d = depths("singly", False), depths("doubly", False)
    notes["all_starts"] = f"singly {all_s}, doubly {all_d} (extras are recorded, not asserted)"
    notes["slater"] = _slater_note(U, adapt, root)
    report = SuiteReport("initial-state", rows, flags, notes)
    report.write(root)
    return report


def _slater_note(U: float, adapt: dict, root: Path) -> str:
    try:
        res = _run_one((cell_config("2x2", U, adapt, {"kind": "slater"}), str(root / "cells" / "slater")))
    except HubbardAdaptError as exc:
        return f"unavailable: {exc}"
    return f"depth to target {res['depth_to_0.99']}"


SUITES = {"table1": run_table1_suite, "scaling": run_scaling_suite, "initial-state": run_initial_state_suite}
