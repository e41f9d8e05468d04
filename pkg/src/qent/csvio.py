"""CSV output: header row, 12 significant digits, locale-independent."""

from __future__ import annotations

import csv
import math
import sys
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
        return f"{z.real:.12g}{sign}{abs(z.imag):.12g}j"
    return f"{float(x):.12g}"


def write_rows(stream, columns, rows) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def write_csv(path, columns, rows) -> None:
    """Write to ``path``; ``None`` or ``"-"`` means standard output."""
    if path is None or str(path) == "-":
        write_rows(sys.stdout, columns, rows)
        return
    p = Path(path)
    with p.open("w", encoding="utf-8", newline="") as fh:
        write_rows(fh, columns, rows)
