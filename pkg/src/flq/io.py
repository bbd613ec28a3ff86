"""Serialization: JSON with complex numbers as ``[re, im]``, tidy CSV with ``_re``/``_im`` columns."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def to_jsonable(obj):
    """Recursively convert numpy data and complex numbers to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def complex_from_json(data) -> np.ndarray:
    """Inverse of ``to_jsonable`` for arrays of ``[re, im]`` pairs."""
    a = np.asarray(data, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def dumps(payload) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(path, payload):
    Path(path).write_text(dumps(payload))


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header, rows, comments=()):
    """RFC 4180 CSV with a mandatory header, optionally preceded by ``#`` comment lines."""
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path):
    """Header and rows of a CSV written by ``write_csv`` (comment lines skipped)."""
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def complex_columns(name):
    return [f"{name}_re", f"{name}_im"]


def split_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def matrix_rows(name, m):
    """Long-format rows ``(name, i, j, re, im)`` of a matrix."""
    m = np.asarray(m)
    return [[name, i, j, float(m[i, j].real), float(m[i, j].imag)] for i in range(m.shape[0]) for j in range(m.shape[1])]
