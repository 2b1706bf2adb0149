"""Markdown and CSV emission helpers.

Markdown cells display 6 significant digits; CSV cells carry full
precision (repr round-trips doubles exactly). The report is a view over
library values, never a recomputation.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path


def fmt6(value) -> str:
    """6-significant-digit display formatting; passthrough for non-numbers."""
    if value is None:
        return ""
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{float(value):.6g}"
    return str(value)


def full(value) -> str:
    """Full-precision CSV formatting (repr of a Python float round-trips)."""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def md_table(headers, rows) -> str:
    lines = ["| " + " | ".join(headers) + " |",
             "| " + " | ".join("---" for _ in headers) + " |"]
    for row in rows:
        lines.append("| " + " | ".join(fmt6(cell) for cell in row) + " |")
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([full(cell) for cell in row])


def write_text(path, content: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)
