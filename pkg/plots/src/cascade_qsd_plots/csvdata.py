"""Reader for the simulator's delimited outputs.

Both schemas are plain RFC-4180 CSV with `#` provenance lines before the
header row.  A RESULT file has a `t` column plus per-time observables; a
long-format sweep file has (sweep_value, t, concurrence, ...) rows ordered
by sweep value then time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class SchemaError(ValueError):
    """The file lacks a required column or is not rectangular."""


@dataclass
class CsvTable:
    columns: list[str]
    data: np.ndarray  # (rows, columns) floats
    comments: list[str] = field(default_factory=list)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise SchemaError(
                f"missing column {name!r}; file has {', '.join(self.columns)}"
            ) from None

    def has(self, name: str) -> bool:
        return name in self.columns


def read_table(path) -> CsvTable:
    comments: list[str] = []
    rows: list[list[str]] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line.rstrip("\n"))
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        for row in reader:
            if row:
                rows.append(row)
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")
    header = rows[0]
    try:
        data = np.array([[float(x) for x in row] for row in rows[1:]], dtype=float)
    except ValueError as err:
        raise SchemaError(f"{path}: non-numeric cell ({err})") from None
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    return CsvTable(columns=header, data=data, comments=comments)
