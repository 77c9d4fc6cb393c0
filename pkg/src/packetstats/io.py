"""Plain-text serialization: CSV tables and JSON overlap dumps."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .overlap import OverlapSet

__all__ = ["format_value", "write_table", "read_table", "dump_overlap_set",
           "load_overlap_set", "distribution_table"]


def format_value(x) -> str:
    """Shortest round-trip text for a number; booleans become 1/0."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_table(path, columns, rows, title: str = "") -> None:
    """Write a comma-separated table.

    ``columns`` is a list of ``(name, unit)`` pairs; the header is one
    ``#`` line per table plus one naming the columns as ``name [unit]``.
    Names containing commas are quoted.
    """
    buf = io.StringIO()
    if title:
        buf.write(f"# {title}\n")
    buf.write("# ")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(f"{name} [{unit}]" for name, unit in columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row length does not match the header")
        buf.write(",".join(format_value(v) for v in row) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_table(path):
    """Inverse of :func:`write_table`: returns (column names, float array)."""
    names = []
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            fields = next(csv.reader([body]))
            if fields and all(f.endswith("]") for f in fields):
                names = [f.rsplit(" [", 1)[0] for f in fields]
            continue
        if line.strip():
            rows.append([float(v) for v in line.split(",")])
    return names, np.array(rows)


def _pairs(a: np.ndarray):
    return [[[z.real, z.imag] for z in row] for row in np.asarray(a).tolist()]


def _unpairs(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def dump_overlap_set(ov: OverlapSet, path) -> None:
    """JSON dump with matrices as row-major ``[re, im]`` pairs."""
    report = {k: (list(v) if isinstance(v, tuple) else v) for k, v in ov.report.items()}
    data = {
        "mode_order": list(ov.mode_order),
        "row_channels": [c + 1 for c in ov.row_channels],
        "I": _pairs(ov.I),
        "Q": [_pairs(q) for q in ov.Q],
        "report": report,
    }
    Path(path).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def load_overlap_set(path) -> OverlapSet:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return OverlapSet(
        _unpairs(data["I"]),
        np.array([_unpairs(q) for q in data["Q"]]),
        tuple(data["mode_order"]),
        tuple(c - 1 for c in data["row_channels"]),
        data.get("report", {}),
    )


def distribution_table(dists):
    """Columns and rows listing every occupation with one column per kind."""
    first = dists[0]
    columns = [(f"n{m + 1}", "count") for m in range(first.n_channels)]
    columns += [(f"W[{d.kind.value}]", "probability") for d in dists]
    rows = []
    for occ in first.probabilities:
        rows.append(list(occ) + [d.probabilities[occ] for d in dists])
    return columns, rows
