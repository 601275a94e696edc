"""CSV ingestion for data matrices (rows = samples)."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    pass


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_csv_matrix(path) -> tuple[np.ndarray, list[str] | None]:
    """Read a comma-delimited numeric matrix.

    A first row containing any non-numeric field is taken as a header.
    Row and column numbers in error messages are 1-based file coordinates.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(f.strip() for f in r)]
    if not rows:
        raise DataFormatError(f"{path}: no data")
    header = None
    if not all(_is_number(f) for f in rows[0]):
        header = [f.strip() for f in rows[0]]
        body = rows[1:]
        first_line = 2
    else:
        body = rows
        first_line = 1
    if not body:
        raise DataFormatError(f"{path}: header only, no data rows")
    width = len(body[0])
    if header is not None and len(header) != width:
        raise DataFormatError(f"{path}: header has {len(header)} fields, data has {width}")
    out = np.empty((len(body), width))
    for r, row in enumerate(body):
        line = first_line + r
        if len(row) != width:
            raise DataFormatError(f"{path}: row {line} has {len(row)} fields, expected {width}")
        for c, field in enumerate(row):
            try:
                value = float(field)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {line}, column {c + 1}: not a number: {field.strip()!r}"
                ) from None
            if not math.isfinite(value):
                raise DataFormatError(f"{path}: row {line}, column {c + 1}: non-finite value {field.strip()}")
            out[r, c] = value
    return np.asfortranarray(out), header


def write_upper_triangle_csv(pairs, path) -> None:
    """Write ``(i, j, rho)`` triples, or anything with a ``pairs()`` method."""
    if hasattr(pairs, "pairs"):
        pairs = pairs.pairs()
    lines = ["i,j,rho"]
    lines += [f"{i},{j},{v!r}" for i, j, v in pairs]
    Path(path).write_text("\n".join(lines) + "\n")
