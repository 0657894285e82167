"""CSV loading, saving and series transformations.

CSV layout: a header row with an index column name followed by series
names, then one row per observation whose first cell is the index label.
All data cells must parse as floats; errors name the offending row and
column.

Transformations operate on single columns: ``log_diff_100`` turns levels
into log differences in percent, and the Hodrick-Prescott pair splits a
series into trend and cycle, either two sided (the standard smoother) or
one sided (each trend point uses data up to that point only).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .errors import DataError
from .model import _freeze

HP_LAMBDA_DEFAULT = 1600.0
_HP_WARMUP = 3  # one sided trend equals the series for the first 3 points

TRANSFORM_OPS = (
    "identity",
    "log_diff_100",
    "hp_trend_two_sided",
    "hp_cycle_two_sided",
    "hp_trend_one_sided",
    "hp_cycle_one_sided",
)


@dataclass(frozen=True)
class SeriesFrame:
    """Named multivariate series: column names, index labels, T x d values."""

    names: tuple
    index: tuple
    values: np.ndarray

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        index = tuple(str(i) for i in self.index)
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError(f"values must be two dimensional, got shape {values.shape}")
        if values.shape != (len(index), len(names)):
            raise DataError(
                f"values shape {values.shape} does not match "
                f"{len(index)} index labels x {len(names)} names"
            )
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "values", _freeze(values))

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        if name not in self.names:
            raise DataError(f"no column named {name!r}; have {list(self.names)}")
        return self.values[:, self.names.index(name)]


def load_csv(path) -> SeriesFrame:
    """Load a series frame, validating shape and cell contents."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path} is empty")
    header = rows[0]
    if len(header) < 2:
        raise DataError(f"{path} needs an index column and at least one series column")
    names = header[1:]
    seen = {}
    for j, name in enumerate(names, start=2):
        if name in seen:
            raise DataError(
                f"duplicate header {name!r} in columns {seen[name]} and {j}"
            )
        seen[name] = j
    index = []
    values = np.empty((len(rows) - 1, len(names)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(
                f"row {i} has {len(row)} cells, expected {len(header)}"
            )
        index.append(row[0])
        for j, cell in enumerate(row[1:], start=2):
            if cell.strip() == "":
                raise DataError(f"missing value at row {i}, column {j} ({names[j - 2]!r})")
            try:
                values[i - 2, j - 2] = float(cell)
            except ValueError:
                raise DataError(
                    f"non-numeric value {cell!r} at row {i}, column {j} ({names[j - 2]!r})"
                ) from None
    return SeriesFrame(names=tuple(names), index=tuple(index), values=values)


def save_csv(frame: SeriesFrame, path) -> None:
    """Write a series frame; floats use the shortest exact representation."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", *frame.names])
        for label, row in zip(frame.index, frame.values):
            writer.writerow([label, *[repr(float(v)) for v in row]])


def log_diff_100(column) -> np.ndarray:
    """100 times the first difference of the natural log; length T - 1."""
    x = np.asarray(column, dtype=float).reshape(-1)
    if x.size < 2:
        raise DataError(f"need at least 2 observations, got {x.size}")
    if np.any(x <= 0.0):
        t = int(np.where(x <= 0.0)[0][0]) + 1
        raise DataError(f"log difference needs positive values; found {x[t - 1]!r} at row {t}")
    return 100.0 * np.diff(np.log(x))


def _hp_trend(x, lamb):
    T = x.size
    eye = sparse.eye(T, format="csc")
    K = sparse.diags([1.0, -2.0, 1.0], [0, 1, 2], shape=(T - 2, T)).tocsc()
    return spsolve(eye + lamb * (K.T @ K), x)


def hp_filter_two_sided(column, lamb: float = HP_LAMBDA_DEFAULT):
    """Standard smoother; returns (trend, cycle) with trend + cycle == series."""
    x = np.asarray(column, dtype=float).reshape(-1)
    if x.size < 4:
        raise DataError(f"need at least 4 observations, got {x.size}")
    if lamb < 0.0:
        raise DataError(f"lambda must be nonnegative, got {lamb}")
    if lamb == 0.0:
        trend = x.copy()
    else:
        trend = _hp_trend(x, float(lamb))
    return trend, x - trend


def hp_filter_one_sided(column, lamb: float = HP_LAMBDA_DEFAULT):
    """Causal variant: trend at t is the final point of the two sided
    filter applied to data up to t; the first 3 trend points equal the
    series."""
    x = np.asarray(column, dtype=float).reshape(-1)
    if x.size < 4:
        raise DataError(f"need at least 4 observations, got {x.size}")
    if lamb < 0.0:
        raise DataError(f"lambda must be nonnegative, got {lamb}")
    trend = np.empty_like(x)
    trend[:_HP_WARMUP] = x[:_HP_WARMUP]
    for t in range(_HP_WARMUP + 1, x.size + 1):
        trend[t - 1] = hp_filter_two_sided(x[:t], lamb)[0][-1]
    return trend, x - trend


def apply_transforms(frame: SeriesFrame, manifest) -> SeriesFrame:
    """Build a new frame from per column transformation specs.

    ``manifest`` is a list of {"name", "source", "op", optional "lambda"}
    entries.  Columns whose op shortens the series (log differences drop
    the first row) force the other columns to be trimmed from the front
    so all outputs align; the index keeps its trailing labels.
    """
    if not isinstance(manifest, (list, tuple)) or not manifest:
        raise DataError("manifest must be a non-empty list of column specs")
    columns = []
    names = []
    for k, spec in enumerate(manifest, start=1):
        if not isinstance(spec, dict):
            raise DataError(f"manifest entry {k} must be an object")
        missing = [key for key in ("name", "source", "op") if key not in spec]
        if missing:
            raise DataError(f"manifest entry {k} is missing {missing}")
        op = spec["op"]
        if op not in TRANSFORM_OPS:
            raise DataError(f"manifest entry {k}: unknown op {op!r}; expected one of {TRANSFORM_OPS}")
        source = frame.column(spec["source"])
        lamb = float(spec.get("lambda", HP_LAMBDA_DEFAULT))
        if op == "identity":
            out = source.copy()
        elif op == "log_diff_100":
            out = log_diff_100(source)
        elif op == "hp_trend_two_sided":
            out = hp_filter_two_sided(source, lamb)[0]
        elif op == "hp_cycle_two_sided":
            out = hp_filter_two_sided(source, lamb)[1]
        elif op == "hp_trend_one_sided":
            out = hp_filter_one_sided(source, lamb)[0]
        else:
            out = hp_filter_one_sided(source, lamb)[1]
        columns.append(out)
        names.append(str(spec["name"]))
    if len(set(names)) != len(names):
        raise DataError("manifest produces duplicate output names")
    T_out = min(c.size for c in columns)
    stacked = np.column_stack([c[c.size - T_out :] for c in columns])
    return SeriesFrame(names=tuple(names), index=frame.index[frame.T - T_out :], values=stacked)
