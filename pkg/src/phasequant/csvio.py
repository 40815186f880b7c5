"""Deterministic CSV emission (17 significant digits)."""
from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence


def fmt(x) -> str:
    if isinstance(x, (int, str)):
        return str(x)
    return format(float(x), ".17g")


def to_csv(header: Sequence[str], rows: Iterable[Sequence], comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()
