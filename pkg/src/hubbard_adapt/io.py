"""Artifact writers: fixed-precision JSON/JSONL/CSV and atomic output directories."""

from __future__ import annotations

import json
import math
import os
import shutil
import tempfile
from collections.abc import Iterable, Iterator, Mapping
from contextlib import contextmanager
from pathlib import Path

import numpy as np

JSON_DIGITS = 17
CSV_DIGITS = 12


def _encode(obj, indent: int | None, level: int) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"  # no JSON literal for inf/nan
        text = f"{x:.{JSON_DIGITS}g}"
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, Mapping):
        items = [f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return _wrap("{", "}", items, indent, level)
    if isinstance(obj, (list, tuple)):
        return _wrap("[", "]", [_encode(v, indent, level + 1) for v in obj], indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _wrap(open_: str, close: str, items: list[str], indent: int | None, level: int) -> str:
    if not items:
        return open_ + close
    if indent is None:
        return open_ + ", ".join(items) + close
    pad = " " * (indent * (level + 1))
    return open_ + "\n" + ",\n".join(pad + it for it in items) + "\n" + " " * (indent * level) + close


def dumps(obj, indent: int | None = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n", encoding="utf-8")


def write_jsonl(path, rows: Iterable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dumps(row, indent=None) + "\n")


def write_spectrum_csv(path, omega: np.ndarray, g: np.ndarray, a: np.ndarray) -> None:
    fmt = f"{{:.{CSV_DIGITS}g}}"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("omega,re_G,im_G,A\n")
        for w, gv, av in zip(omega, g, a):
            fh.write(",".join(fmt.format(float(v)) for v in (w, gv.real, gv.imag, av)) + "\n")


def read_spectrum_csv(path) -> dict[str, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {"omega": data[:, 0], "G": data[:, 1] + 1j * data[:, 2], "A": data[:, 3]}


@contextmanager
def atomic_directory(target) -> Iterator[Path]:
    """Yield a scratch directory that replaces ``target`` only if the block succeeds."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if target.exists():
        old = Path(tempfile.mkdtemp(prefix=f".{target.name}.old.", dir=target.parent))
        os.replace(target, old / "x")
        shutil.rmtree(old, ignore_errors=True)
    os.replace(tmp, target)
