"""Two-arm data model, CSV ingestion, projections and pooled ranks."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    CsvFormatError,
    DimensionMismatchError,
    EmptyFileError,
    NonNumericCellError,
    RaggedRowError,
    SampleError,
)

__all__ = [
    "MultivariateSample",
    "PooledProjection",
    "load_sample",
    "project",
    "pool",
]


@dataclass(frozen=True, eq=False)
class MultivariateSample:
    """One arm of the two-sample problem: ``rows`` observations in ``dim`` components.

    The matrix is copied and made read-only on construction.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise SampleError(f"sample must be a 2-d matrix, got {arr.ndim} dimension(s)")
        if arr.shape[0] < 1:
            raise SampleError("sample must contain at least one observation")
        if arr.shape[1] < 2:
            raise SampleError(f"sample needs at least 2 components, got {arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise SampleError(
                f"non-finite entry at row {bad[0] + 1}, column {bad[1] + 1}"
            )
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    def head(self, k: int) -> "MultivariateSample":
        """The first ``k`` observations."""
        return MultivariateSample(self.values[:k])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultivariateSample):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.values.shape, self.values.tobytes()))


def _parse_float(cell: str) -> float | None:
    try:
        return float(cell.strip())
    except ValueError:
        return None


def load_sample(path: str | Path, expected_dim: int | None = None) -> MultivariateSample:
    """Read a comma separated numeric matrix, one observation per row.

    A first row containing any non-numeric cell is treated as a header.
    Blank lines are skipped.

    Raises
    ------
    EmptyFileError, RaggedRowError, NonNumericCellError
        For malformed files, with the one-based row and column of the problem.
    DimensionMismatchError
        When ``expected_dim`` is given and the width differs.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        records = [
            (lineno, row)
            for lineno, row in enumerate(csv.reader(fh), start=1)
            if row and any(cell.strip() for cell in row)
        ]
    if not records:
        raise EmptyFileError(f"{path}: file contains no data")

    first_line, first = records[0]
    if any(_parse_float(cell) is None for cell in first):
        records = records[1:]
        if not records:
            raise EmptyFileError(f"{path}: header present but no data rows")

    width = len(records[0][1])
    data = []
    for lineno, row in records:
        if len(row) != width:
            raise RaggedRowError(
                f"{path}: expected {width} fields, found {len(row)}", row=lineno
            )
        parsed = []
        for col, cell in enumerate(row, start=1):
            value = _parse_float(cell)
            if value is None:
                raise NonNumericCellError(
                    f"{path}: non-numeric cell {cell!r}", row=lineno, column=col
                )
            if not math.isfinite(value):
                raise NonNumericCellError(
                    f"{path}: non-finite cell {cell!r}", row=lineno, column=col
                )
            parsed.append(value)
        data.append(parsed)

    if expected_dim is not None and width != expected_dim:
        raise DimensionMismatchError(
            f"{path}: expected {expected_dim} columns, found {width}"
        )
    try:
        return MultivariateSample(np.asarray(data, dtype=np.float64))
    except SampleError as exc:
        raise CsvFormatError(f"{path}: {exc}") from exc


def project(sample: MultivariateSample, u: Sequence[float] | np.ndarray) -> np.ndarray:
    """Projections ``values @ u`` in the original row order."""
    u = np.asarray(getattr(u, "coords", u), dtype=np.float64)
    if u.shape != (sample.dim,):
        raise DimensionMismatchError(
            f"direction has {u.size} coordinates, sample has {sample.dim} components"
        )
    return sample.values @ u


@dataclass(frozen=True, eq=False)
class PooledProjection:
    """Sorted projections of both arms and their pooled ranks.

    ``rank_x[i]`` counts the pooled observations not exceeding the
    ``i``-th smallest X projection, with X observations counted by order
    index (so within-arm ties never collapse) and Y observations counted
    with ``<=``.  ``rank_y`` is symmetric.
    """

    x_proj: np.ndarray
    y_proj: np.ndarray
    rank_x: np.ndarray
    rank_y: np.ndarray

    @property
    def n(self) -> int:
        return int(self.x_proj.shape[0])

    @property
    def m(self) -> int:
        return int(self.y_proj.shape[0])

    @property
    def total(self) -> int:
        return self.n + self.m

    def ecdf(self, t: float) -> float:
        """Pooled empirical distribution function at ``t``."""
        count = np.searchsorted(self.x_proj, t, side="right") + np.searchsorted(
            self.y_proj, t, side="right"
        )
        return float(count) / self.total


def pool(x: np.ndarray, y: np.ndarray) -> PooledProjection:
    """Sort both arms and compute pooled ranks by a merge on sorted arrays."""
    xs = np.sort(np.asarray(x, dtype=np.float64).ravel())
    ys = np.sort(np.asarray(y, dtype=np.float64).ravel())
    if xs.size == 0 or ys.size == 0:
        raise SampleError("both projected arms must be nonempty")
    rank_x = (np.arange(1, xs.size + 1) + np.searchsorted(ys, xs, side="right")).astype(np.int64)
    rank_y = (np.arange(1, ys.size + 1) + np.searchsorted(xs, ys, side="right")).astype(np.int64)
    for arr in (xs, ys, rank_x, rank_y):
        arr.setflags(write=False)
    return PooledProjection(xs, ys, rank_x, rank_y)
