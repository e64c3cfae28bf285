"""File formats: headerless matrix CSVs, headed curve CSVs, sorted-key JSON.

Floats are written with ``repr`` (shortest string that round-trips), so
write -> read -> write is byte-identical. Every write goes to a temporary
file in the target directory and is renamed into place.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import DensityCurve, DomainError, SpectralMeasure

__all__ = [
    "atomic_write_text",
    "format_float",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_curve_csv",
    "read_curve_csv",
    "write_histogram_csv",
    "read_histogram_csv",
    "write_json",
    "read_json",
    "measure_to_json",
    "measure_from_json",
]


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(x) -> str:
    x = float(x)
    if x == 0.0:
        return "0.0"  # drop the sign of -0.0
    return repr(x)


def _rows(rows) -> str:
    return "".join(",".join(row) + "\n" for row in rows)


def write_matrix_csv(path, a, integer: bool = False) -> None:
    a = np.atleast_2d(np.asarray(a))
    if integer:
        rows = ([str(int(v)) for v in row] for row in a)
    else:
        rows = ([format_float(v) for v in row] for row in a)
    atomic_write_text(path, _rows(rows))


def read_matrix_csv(path, dtype=np.float64) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise DomainError(f"{path}: empty matrix file")
    try:
        rows = [[float(tok) for tok in ln.split(",")] for ln in lines]
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise DomainError(f"{path}: ragged rows (widths {sorted(width)})")
    return np.array(rows, dtype=dtype)


def write_curve_csv(path, curve: DensityCurve) -> None:
    rows = [["x", "density", "cdf"]]
    rows += [[format_float(x), format_float(f), format_float(F)] for x, f, F in zip(curve.xs, curve.density, curve.cdf)]
    atomic_write_text(path, _rows(rows))


def read_curve_csv(path) -> DensityCurve:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "x,density,cdf":
        raise DomainError(f"{path}: expected header 'x,density,cdf'")
    data = np.array([[float(t) for t in ln.split(",")] for ln in lines[1:] if ln.strip()])
    return DensityCurve(data[:, 0], data[:, 1], data[:, 2])


def write_histogram_csv(path, edges, masses) -> None:
    rows = [["left", "right", "mass"]]
    rows += [[format_float(lo), format_float(hi), format_float(m)] for lo, hi, m in zip(edges[:-1], edges[1:], masses)]
    atomic_write_text(path, _rows(rows))


def read_histogram_csv(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "left,right,mass":
        raise DomainError(f"{path}: expected header 'left,right,mass'")
    data = np.array([[float(t) for t in ln.split(",")] for ln in lines[1:] if ln.strip()])
    edges = np.concatenate((data[:, 0], data[-1:, 1]))
    return edges, data[:, 2]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=True)
    atomic_write_text(path, text + "\n")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def measure_to_json(mu: SpectralMeasure) -> dict:
    return {"d": mu.d, "eigenvalues": mu.eigenvalues.tolist(), "weight": 1.0 / mu.d}


def measure_from_json(obj) -> SpectralMeasure:
    try:
        ev = obj["eigenvalues"]
    except (KeyError, TypeError):
        raise DomainError("eigs.json must contain an 'eigenvalues' list") from None
    mu = SpectralMeasure(np.asarray(ev, dtype=np.float64))
    if "d" in obj and int(obj["d"]) != mu.d:
        raise DomainError(f"eigs.json declares d={obj['d']} but lists {mu.d} eigenvalues")
    return mu
