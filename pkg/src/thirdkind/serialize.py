"""Deterministic text serialization for reports and matrices.

All floats are written with 17 significant digits so that identical runs
produce byte-identical files and every value round-trips exactly. Matrices
go to dense CSV (row-major, re/im pairs); grid functions to
(cell_index, re, im) rows; kernel samples to (s, t, re, im) rows. Reports
are JSON written by a small recursive emitter (the stdlib encoder does not
expose float formatting).
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return f"{x:.17g}"


def _csv_float(x: float) -> str:
    return f"{float(x):.17g}"


def dump_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, complex):
        return dump_json([obj.real, obj.imag], indent)
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dump_json(obj.tolist(), indent)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dump_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(inner + it for it in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        import json

        items = [
            f"{inner}{json.dumps(str(k))}: {dump_json(v, indent + 1)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: Path, obj) -> None:
    Path(path).write_text(dump_json(obj) + "\n")


def write_matrix_csv(path: Path, matrix: np.ndarray) -> None:
    m = np.asarray(matrix, dtype=complex)
    lines = []
    for row in m:
        cells = []
        for z in row:
            cells.append(_csv_float(z.real))
            cells.append(_csv_float(z.imag))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path: Path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().strip().splitlines():
        parts = [float(x) for x in line.split(",")]
        if len(parts) % 2:
            raise ValueError("matrix CSV rows must hold re/im pairs")
        vals = np.asarray(parts).reshape(-1, 2)
        rows.append(vals[:, 0] + 1j * vals[:, 1])
    return np.asarray(rows)


def write_grid_function_csv(path: Path, values: np.ndarray) -> None:
    vals = np.asarray(values, dtype=complex)
    lines = ["cell_index,re,im"]
    for i, z in enumerate(vals):
        lines.append(f"{i},{_csv_float(z.real)},{_csv_float(z.imag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_function_csv(path: Path) -> np.ndarray:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].strip() != "cell_index,re,im":
        raise ValueError("grid function CSV must start with 'cell_index,re,im'")
    values = {}
    for line in lines[1:]:
        idx_s, re_s, im_s = line.split(",")
        values[int(idx_s)] = float(re_s) + 1j * float(im_s)
    return np.asarray([values[i] for i in range(len(values))])


def write_kernel_grid_csv(
    path: Path, s: np.ndarray, t: np.ndarray, samples: np.ndarray
) -> None:
    lines = ["s,t,re,im"]
    for i, sv in enumerate(np.asarray(s, dtype=float)):
        for j, tv in enumerate(np.asarray(t, dtype=float)):
            z = complex(samples[i, j])
            lines.append(
                f"{_csv_float(sv)},{_csv_float(tv)},"
                f"{_csv_float(z.real)},{_csv_float(z.imag)}"
            )
    Path(path).write_text("\n".join(lines) + "\n")
