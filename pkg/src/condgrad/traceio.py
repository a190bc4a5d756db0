"""Trace and plot-data CSV files.

Floats are written with 17 significant digits so that reading a file back
reproduces every value bit for bit.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import IterateRecord

TRACE_COLUMNS = ("k", "f_x", "f_ref", "gap", "step", "backtracks", "l_k", "elapsed_ns")
PLOT_COLUMNS = ("k", "min_gap", "f_minus_fstar")


class TraceFormatError(ValueError):
    pass


def fmt(x: float) -> str:
    return format(x, ".17g")


def write_trace(path: Union[str, Path], trace: Sequence[IterateRecord], timing: bool = False) -> None:
    """Write ``trace`` as CSV.

    ``elapsed_ns`` is written as 0 unless ``timing`` is set, which keeps trace
    files byte-identical across repeated runs.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in trace:
            w.writerow(
                [
                    r.k,
                    fmt(r.f_x),
                    fmt(r.f_ref),
                    fmt(r.gap),
                    fmt(r.step),
                    r.backtracks,
                    "" if r.l_k is None else fmt(r.l_k),
                    r.elapsed_ns if timing else 0,
                ]
            )


def read_trace(path: Union[str, Path]) -> list[IterateRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_COLUMNS:
            raise TraceFormatError(f"{path}: header must be {','.join(TRACE_COLUMNS)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TRACE_COLUMNS):
                raise TraceFormatError(f"{path}:{lineno}: expected {len(TRACE_COLUMNS)} columns, got {len(row)}")
            try:
                out.append(
                    IterateRecord(
                        k=int(row[0]),
                        f_x=float(row[1]),
                        f_ref=float(row[2]),
                        gap=float(row[3]),
                        step=float(row[4]),
                        backtracks=int(row[5]),
                        l_k=None if row[6] == "" else float(row[6]),
                        elapsed_ns=int(row[7]),
                    )
                )
            except ValueError as exc:
                raise TraceFormatError(f"{path}:{lineno}: {exc}") from exc
    if not out:
        raise TraceFormatError(f"{path}: no rows")
    return out


def write_plot(path: Union[str, Path], trace: Sequence[IterateRecord], f_star: Optional[float] = None) -> None:
    """Write ``(k, min_{l<=k} gap, F(x^k) - F*)``; ``F*`` defaults to the best value in the trace."""
    f_x = np.array([r.f_x for r in trace])
    min_gap = np.minimum.accumulate(np.array([r.gap for r in trace]))
    best = float(f_x.min()) if f_star is None else f_star
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PLOT_COLUMNS)
        for r, mg, fx in zip(trace, min_gap, f_x):
            w.writerow([r.k, fmt(mg), fmt(fx - best)])
