"""Trace CSV files: header ``freq_hz,value[,phase_rad]``, UTF-8, LF."""
from __future__ import annotations

import csv
import warnings
from pathlib import Path

import numpy as np

from .model import Spectrum

HEADER = ("freq_hz", "value")
OPTIONAL = "phase_rad"


class TraceFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def read_trace_csv(path, convention: str = "power") -> Spectrum:
    """Load a trace. A ``phase_rad`` column is accepted but dropped with a warning.

    Errors cite the 1-based data row (the header is row 0).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise TraceFormatError(f"{path}: file is empty")
    header = tuple(cell.strip() for cell in rows[0])
    if header[:2] != HEADER or len(header) > 3 or (len(header) == 3 and header[2] != OPTIONAL):
        raise TraceFormatError(
            f"header {','.join(header)!r} does not match expected 'freq_hz,value[,phase_rad]'", 1
        )
    if len(header) == 3:
        warnings.warn("ignoring phase_rad column", stacklevel=2)
    if len(rows) == 1:
        raise TraceFormatError(f"{path}: no data rows")

    freqs, values = [], []
    for row_no, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise TraceFormatError(f"row {row_no}: expected {len(header)} columns, got {len(row)}", row_no + 1)
        try:
            f, v = float(row[0]), float(row[1])
        except ValueError:
            raise TraceFormatError(f"row {row_no}: cannot parse {','.join(row)!r}", row_no + 1) from None
        if freqs and not f > freqs[-1]:
            raise TraceFormatError(f"row {row_no}: frequency {f!r} is not above the previous row", row_no + 1)
        freqs.append(f)
        values.append(v)
    return Spectrum(np.array(freqs), np.array(values), label=path.stem, convention=convention)


def write_trace_csv(spectrum: Spectrum, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for f, v in zip(spectrum.frequencies, spectrum.values):
            writer.writerow((f"{f:.17g}", f"{v:.17g}"))
