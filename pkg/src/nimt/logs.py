"""CSV iteration logs.

One row per iteration. A point is written as its coordinates joined by
``;``; the examples of a pack are joined by ``|`` in both ``x`` and ``y``.
Reals use 17 significant digits so every value round-trips exactly.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Dict, List, Sequence

from .metrics import IterationRecord

HEADER = ["t", "x", "y", "S_star", "S_rand", "gamma", "psi", "M", "Lbar",
          "descent_lhs", "descent_rhs", "bound_rhs"]
_REALS = HEADER[3:]


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def format_iteration_log(records: Sequence[IterationRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in sorted(records, key=lambda r: r.t):
        xs = "|".join(";".join(fmt(c) for c in x) for x, _ in r.selected)
        ys = "|".join(fmt(y) for _, y in r.selected)
        w.writerow([r.t, xs, ys] + [fmt(getattr(r, name)) for name in _REALS])
    return buf.getvalue()


def write_iteration_log(records: Sequence[IterationRecord], path) -> None:
    text = format_iteration_log(records)
    try:
        Path(path).write_text(text, encoding="ascii", newline="")
    except OSError as exc:
        raise OSError(f"cannot write iteration log {path}: {exc}") from exc


def read_iteration_log(path) -> List[Dict[str, object]]:
    """Parse a log written by :func:`write_iteration_log`."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            rows.append({
                "t": int(row["t"]),
                "x": [tuple(float(c) for c in p.split(";")) for p in row["x"].split("|")],
                "y": [float(v) for v in row["y"].split("|")],
                **{name: float(row[name]) for name in _REALS},
            })
    return rows
