"""Evaluation context binding two arms to the line-scan kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend, _lines
from .dbel import DbelParams, _direction_projections, arm_constants, check_arm_size, log_table
from .errors import DimensionMismatchError
from .samples import MultivariateSample


@dataclass(frozen=True)
class LineScan:
    """Cell values along one projection line.

    ``values[d]`` is the value of the cell right of breakpoint ``w[d]``,
    evaluated at ``tpts[d]``.  ``left_value`` belongs to the unbounded
    cell left of all breakpoints when it was requested.
    """

    w: np.ndarray
    values: np.ndarray
    tpts: np.ndarray
    left_value: float | None = None
    left_t: float | None = None


class Evaluator:
    """Evaluate the log statistic of two fixed arms along many projections.

    Parameters
    ----------
    x, y : MultivariateSample
        The two arms; both must have at least 4 rows.
    params : DbelParams
    scan : callable, optional
        Kernel implementation, defaults to the one selected at import.
    """

    def __init__(self, x: MultivariateSample, y: MultivariateSample,
                 params: DbelParams = DbelParams(), scan=None):
        if x.dim != y.dim:
            raise DimensionMismatchError(f"arms have {x.dim} and {y.dim} components")
        self.n, self.m, self.p = x.rows, y.rows, x.dim
        self.params = params
        self.P = np.ascontiguousarray(np.vstack([x.values, y.values]))
        total = self.n + self.m
        self.lox, self.hix = check_arm_size(self.n, params.delta)
        self.loy, self.hiy = check_arm_size(self.m, params.delta)
        self._table = np.ascontiguousarray(log_table(total))
        self._cx = np.ascontiguousarray(arm_constants(self.n, total, self.lox, self.hix))
        self._cy = np.ascontiguousarray(arm_constants(self.m, total, self.loy, self.hiy))
        self._scan = scan or _backend.scan_line
        self._zeros = np.zeros(total)

    def scan(self, z0: np.ndarray, c: np.ndarray, tpts: np.ndarray) -> np.ndarray:
        """Values of ``z0 + t * c`` for each ``t`` (kept in the given order)."""
        return self._scan(
            np.ascontiguousarray(z0, dtype=np.float64),
            np.ascontiguousarray(c, dtype=np.float64),
            self.n,
            np.ascontiguousarray(tpts, dtype=np.float64),
            self.lox, self.hix, self.loy, self.hiy,
            self._table, self._cx, self._cy,
        )

    def value_of_projection(self, z: np.ndarray) -> float:
        return float(self.scan(z, self._zeros, np.zeros(1))[0])

    def value_of_direction(self, u) -> float:
        """Same value as ``log_ts_for_direction`` for this pair of arms."""
        return self.value_of_projection(_direction_projections(self.P, u))

    def line(self, prefix: np.ndarray, free: int) -> tuple[np.ndarray, np.ndarray]:
        """Projection line obtained by freeing coordinate ``free`` of ``prefix``.

        Returns ``(z0, c)``: the projection with that coordinate zeroed and
        the column that multiplies the free coordinate.
        """
        v = np.array(prefix, dtype=np.float64)
        v[free] = 0.0
        if free == self.p - 1:
            z0 = _lines.partial_projection(self.P, v, self.p - 1)
        else:
            z0 = _lines.partial_projection(self.P, v, self.p)
        return z0, self.P[:, free]

    def scan_cells(self, z0: np.ndarray, c: np.ndarray, include_left: bool = False,
                   extra: float | None = None) -> LineScan:
        """Evaluate every cell of the line ``z0 + t * c``.

        ``extra`` adds one more breakpoint, used to place the axis value
        ``0`` on the line.
        """
        w = _lines.breakpoints(z0, c)
        if extra is not None and not np.any(w == extra):
            w = np.sort(np.append(w, extra))
        tpts = _lines.right_points(w)
        if not include_left:
            return LineScan(w, self.scan(z0, c, tpts), tpts)
        left = _lines.left_point(w)
        values = self.scan(z0, c, np.concatenate([[left], tpts]))
        return LineScan(w, values[1:], tpts, float(values[0]), left)
