"""Deterministic CSV emission: fixed column order, fixed float formatting."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["format_value", "write_csv"]


def format_value(val) -> str:
    if isinstance(val, (bool, np.bool_)):
        return "true" if val else "false"
    if isinstance(val, (float, np.floating)):
        if np.isnan(val):
            return "nan"
        return f"{float(val):.12g}"
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    return str(val)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path
