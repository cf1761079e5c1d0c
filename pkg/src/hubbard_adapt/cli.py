"""Command-line entry point.

    hubbard-adapt <task> --config PATH [--output DIR] [--quiet]
    hubbard-adapt suite --name {table1,scaling,initial-state} [--output DIR] [--workers N]

Exit status is 0 on success, 1 for invalid input and 2 for numerical or
resource failures; errors are also printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import TASKS, load_config
from .errors import ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hubbard-adapt", description="Adaptive VQE for the Fermi-Hubbard model")
    sub = p.add_subparsers(dest="task", required=True)
    for task in TASKS:
        sp = sub.add_parser(task)
        sp.add_argument("--config", required=True)
        sp.add_argument("--output")
        sp.add_argument("--quiet", action="store_true")
    sp = sub.add_parser("suite")
    sp.add_argument("--name", required=True, choices=("table1", "scaling", "initial-state"))
    sp.add_argument("--output")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--quiet", action="store_true")
    return p


def _fail(exc: BaseException, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def _summary(task: str, result: dict) -> str:
    keys = {
        "ground": ("energy", "exact_energy", "fidelity", "depth", "stop_reason"),
        "excited": ("energies", "max_abs_error", "n_parameters"),
        "greens": ("source", "ground_energy"),
        "ed": ("ground_energy", "sector_dim", "ground_gap"),
        "pool": ("one_body", "two_body", "correlated_hopping", "total"),
    }[task]
    return json.dumps({k: result[k] for k in keys}, default=str)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        if args.task == "suite":
            from .experiments import SUITES

            kwargs = {"workers": args.workers}
            if args.output:
                kwargs["output_dir"] = args.output
            report = SUITES[args.name](**kwargs)
            if not args.quiet:
                print(report.to_text(), end="")
            return EXIT_OK
        from .runner import run

        cfg = load_config(args.config)
        payload = run(cfg, args.task, args.output)
        if not args.quiet:
            print(_summary(args.task, payload["result"]))
        return EXIT_OK
    except (ValidationError, OSError) as exc:
        return _fail(exc, EXIT_INVALID)
    except Exception as exc:  # numerical, degeneracy, resource
        return _fail(exc, EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
