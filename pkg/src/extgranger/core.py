"""Time-series panels, truncated ECDFs and order-statistic utilities.

Every threshold in the package is rank based: quantiles are order
statistics without interpolation, so any strictly increasing transform of a
series leaves the selected time indices unchanged.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "InputError",
    "TimeSeriesPanel",
    "EcdfTransform",
    "ecdf_fit",
    "empirical_quantile",
    "order_index",
    "kth_largest",
    "read_csv",
    "write_csv",
]


class InputError(ValueError):
    """Malformed input data (bad CSV, non-finite entries, bad shapes)."""


def _as_finite_vector(sample) -> np.ndarray:
    arr = np.asarray(sample, dtype=float).ravel()
    if arr.size == 0:
        raise InputError("empty sample")
    if not np.all(np.isfinite(arr)):
        raise InputError("non-finite value")
    return arr


def order_index(q: float, n: int) -> int:
    """0-based position of the ``ceil(q * n)``-th order statistic.

    ``q * n`` is rounded to 9 decimals first so that products such as
    ``0.7 * 10`` do not spill over to the next integer.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"quantile level must lie in [0, 1], got {q}")
    if q == 0.0:
        return 0
    return max(math.ceil(round(q * n, 9)), 1) - 1


def empirical_quantile(sample, q: float) -> float:
    """Order-statistic quantile ``x_(ceil(q n))`` (``x_(1)`` for ``q = 0``)."""
    arr = _as_finite_vector(sample)
    idx = order_index(q, arr.size)
    return float(np.partition(arr, idx)[idx])


def kth_largest(sample, k: int) -> float:
    """Return ``x_(n-k+1)``, duplicates counted with multiplicity."""
    arr = np.asarray(sample, dtype=float).ravel()
    n = arr.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for a sample of length {n}")
    idx = n - k
    return float(np.partition(arr, idx)[idx])


@dataclass(frozen=True)
class EcdfTransform:
    """Empirical CDF set to zero below the ``q_F``-quantile of the fitted sample.

    With ``truncation_quantile = 0`` this is the plain ECDF
    ``t -> #{x_i <= t} / n``.
    """

    sorted_values: np.ndarray
    truncation_quantile: float
    truncation_value: float

    def evaluate(self, t):
        t_arr = np.asarray(t, dtype=float)
        n = self.sorted_values.size
        out = np.searchsorted(self.sorted_values, t_arr, side="right") / n
        out = np.where(t_arr >= self.truncation_value, out, 0.0)
        if out.ndim == 0:
            return float(out)
        return out

    __call__ = evaluate


def ecdf_fit(sample, q_F: float = 0.0) -> EcdfTransform:
    if not 0.0 <= q_F < 1.0:
        raise ValueError(f"q_F must lie in [0, 1), got {q_F}")
    arr = np.sort(_as_finite_vector(sample))
    arr.setflags(write=False)
    cut = float(arr[order_index(q_F, arr.size)])
    return EcdfTransform(arr, float(q_F), cut)


class TimeSeriesPanel:
    """An ``n x m`` panel of equally spaced observations with column names.

    Parameters
    ----------
    values : array-like of shape (n, m)
        Row ``t`` is the observation at time ``t``.
    names : sequence of str, optional
        Unique, non-empty column labels. Defaults to ``X1, ..., Xm``.
    """

    def __init__(self, values, names: Sequence[str] | None = None):
        arr = np.array(values, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise InputError(f"panel values must be 2-dimensional, got ndim={arr.ndim}")
        n, m = arr.shape
        if n < 2 or m < 1:
            raise InputError(f"panel needs n >= 2 rows and m >= 1 columns, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("non-finite value in panel")
        if names is None:
            names = [f"X{i + 1}" for i in range(m)]
        names = [str(s) for s in names]
        if len(names) != m:
            raise InputError(f"{len(names)} names given for {m} columns")
        if any(not s for s in names):
            raise InputError("column names must be non-empty")
        if len(set(names)) != m:
            raise InputError("column names must be unique")
        arr.setflags(write=False)
        self._values = arr
        self._names = tuple(names)
        self._lookup = {s: i for i, s in enumerate(names)}

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    @property
    def n(self) -> int:
        return self._values.shape[0]

    @property
    def m(self) -> int:
        return self._values.shape[1]

    def index_of(self, column: str | int) -> int:
        if isinstance(column, (int, np.integer)) and not isinstance(column, bool):
            if not 0 <= column < self.m:
                raise KeyError(f"column index {column} out of range")
            return int(column)
        try:
            return self._lookup[column]
        except KeyError:
            raise KeyError(f"unknown column {column!r}") from None

    def column(self, column: str | int) -> np.ndarray:
        return self._values[:, self.index_of(column)]

    def columns(self, cols: Iterable[str | int]) -> np.ndarray:
        idx = [self.index_of(c) for c in cols]
        return self._values[:, idx]

    def take_rows(self, rows) -> "TimeSeriesPanel":
        return TimeSeriesPanel(self._values[rows], self._names)

    def __eq__(self, other):
        if not isinstance(other, TimeSeriesPanel):
            return NotImplemented
        return self._names == other._names and np.array_equal(self._values, other._values)

    def __repr__(self):
        return f"TimeSeriesPanel(n={self.n}, m={self.m}, names={list(self._names)})"


def read_csv(source: str | Path | io.TextIOBase) -> TimeSeriesPanel:
    """Load a panel from CSV: a header row, then one numeric row per time step.

    Raises
    ------
    InputError
        On ragged rows or non-numeric cells, with the 1-based line number.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_csv(fh)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("line 1: empty CSV file") from None
    header = [h.strip() for h in header]
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise InputError(
                f"line {line_no}: expected {len(header)} fields, got {len(row)}"
            )
        try:
            vals = [float(cell) for cell in row]
        except ValueError:
            bad = next(c for c in row if not _is_float(c))
            raise InputError(f"line {line_no}: non-numeric cell {bad!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"line {line_no}: non-finite value")
        rows.append(vals)
    if not rows:
        raise InputError("no data rows")
    return TimeSeriesPanel(np.array(rows), header)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def write_csv(panel: TimeSeriesPanel, dest: str | Path | io.TextIOBase) -> None:
    """Write ``panel`` as CSV using ``repr`` floats, so reading back is exact."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            write_csv(panel, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(panel.names)
    for row in panel.values:
        writer.writerow([repr(float(v)) for v in row])
