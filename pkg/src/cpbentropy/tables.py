"""CSV round-trip for sweep results."""

from __future__ import annotations

import csv

import numpy as np

from .errors import ConfigError
from .sweep import CSV_COLUMNS, SweepResult


def _fmt(x: float) -> str:
    # 17 significant digits always round-trip a binary64 value
    return "%.17g" % x


def write_csv(res: SweepResult, path) -> None:
    cols = [np.asarray(res.columns[k], dtype=float) for k in CSV_COLUMNS]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path, title: str = "") -> SweepResult:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected CSV header {header}")
        rows = [[float(x) for x in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
    columns = {k: data[:, i].copy() for i, k in enumerate(CSV_COLUMNS)}
    return SweepResult.from_columns(columns, title=title)


def write_table(path, header, rows) -> None:
    """Plain numeric table, same float format as the sweep CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(float(v)) for v in row) + "\n")
