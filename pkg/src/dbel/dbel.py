"""Univariate DBEL ratio for a fixed projection direction.

For an arm of size ``j`` inside a pooled sample of size ``N``, the log
empirical likelihood ratio is

    min over r in the window of  sum_i log(2 r / (j * D_ir)),

where ``D_ir`` is the pooled empirical CDF increment between the
``(i+r)``-th and ``(i-r)``-th order statistics of the arm, indices
clamped to ``[1, j]``.  Written with pooled ranks ``R``, ``D_ir`` equals
``(R[i+r] - R[i-r]) / N``, so the statistic only needs integer rank gaps.

Logarithms of the gaps are summed in 40-bit fixed point.  Integer sums
are exact, which makes every evaluation path (reference, numpy kernel,
compiled kernel, incremental updates) return the same double.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _lines
from .errors import DimensionMismatchError, ParameterError, SampleTooSmallError
from .samples import MultivariateSample, PooledProjection, pool

__all__ = [
    "DEFAULT_DELTA",
    "FIXED_BITS",
    "FIXED_INV",
    "Arm",
    "DbelParams",
    "ElrValue",
    "window_bounds",
    "MIN_ARM_SIZE",
    "check_arm_size",
    "arm_constants",
    "log_table",
    "floor_gaps",
    "spacings",
    "elr_arm",
    "normalize_direction",
    "log_ts_for_direction",
]

DEFAULT_DELTA = 0.1
FIXED_BITS = 40
FIXED_INV = 2.0 ** -FIXED_BITS


class Arm(enum.Enum):
    X = "x"
    Y = "y"


@dataclass(frozen=True)
class DbelParams:
    """Tuning of the ELR statistic.

    Parameters
    ----------
    delta : float
        Window exponent, strictly inside (0, 0.25).
    spacing_floor_enabled : bool
        Replace zero spacings by ``1/N`` before taking logs.
    """

    delta: float = DEFAULT_DELTA
    spacing_floor_enabled: bool = True

    def __post_init__(self) -> None:
        if not (isinstance(self.delta, (int, float)) and 0.0 < self.delta < 0.25):
            raise ParameterError(f"delta must lie in (0, 0.25), got {self.delta!r}")


@dataclass(frozen=True)
class ElrValue:
    log_value: float
    arg_r: int


def window_bounds(j: int, delta: float = DEFAULT_DELTA) -> tuple[int, int]:
    """Integer window ``(lo, hi)`` searched by the ELR minimisation.

    ``a = round(j ** (0.5 + delta))`` and
    ``b = min(round(j ** (1 - delta)), round(j / 2))`` with round half to
    even.  For small ``j`` it can happen that ``a > b``; the window then
    spans the integers between the two bounds, i.e. ``(b, a)``.

    Examples
    --------
    >>> window_bounds(10)
    (4, 5)
    >>> window_bounds(5)
    (2, 3)
    """
    if int(j) != j or j < 2:
        raise SampleTooSmallError(f"window needs at least 2 observations, got {j}")
    if not 0.0 < delta < 0.25:
        raise ParameterError(f"delta must lie in (0, 0.25), got {delta!r}")
    j = int(j)
    a = round(j ** (0.5 + delta))
    b = min(round(j ** (1.0 - delta)), round(j / 2))
    return (a, b) if a <= b else (b, a)


MIN_ARM_SIZE = 4


def check_arm_size(j: int, delta: float = DEFAULT_DELTA) -> tuple[int, int]:
    """Window of an arm used by the full test, refusing arms below 4 observations."""
    if j < MIN_ARM_SIZE:
        raise SampleTooSmallError(
            f"sample too small for DBEL window: arm of size {j}, need at least {MIN_ARM_SIZE}"
        )
    return window_bounds(j, delta)


@lru_cache(maxsize=64)
def _log_table_cached(size: int) -> np.ndarray:
    k = np.arange(size + 1, dtype=np.float64)
    k[0] = 1.0
    table = np.rint(np.log(k) * 2.0 ** FIXED_BITS).astype(np.int64)
    table.setflags(write=False)
    return table


def log_table(total: int) -> np.ndarray:
    """Fixed-point ``log(k)`` for ``k = 0..total`` (entry 0 is unused and 0)."""
    return _log_table_cached(int(total))


@lru_cache(maxsize=256)
def _arm_constants_cached(j: int, total: int, lo: int, hi: int) -> np.ndarray:
    r = np.arange(lo, hi + 1, dtype=np.float64)
    out = j * (np.log(2.0 * r) + math.log(total) - math.log(j))
    out.setflags(write=False)
    return out


def arm_constants(j: int, total: int, lo: int, hi: int) -> np.ndarray:
    """``j * log(2 r N / j)`` for each ``r`` in the window, the part of the
    log ratio that does not depend on the data."""
    return _arm_constants_cached(int(j), int(total), int(lo), int(hi))


def floor_gaps(gaps: np.ndarray, enabled: bool = True) -> np.ndarray:
    """Apply the spacing floor: zero rank gaps become 1 (a spacing of ``1/N``)."""
    gaps = np.asarray(gaps, dtype=np.int64)
    return np.maximum(gaps, 1) if enabled else gaps


def _ranks_of(arm: Arm, pooled: PooledProjection) -> np.ndarray:
    return pooled.rank_x if Arm(arm) is Arm.X else pooled.rank_y


def spacings(arm: Arm, pooled: PooledProjection, r: int) -> np.ndarray:
    """Pooled CDF spacings ``D_ir`` of one arm at half-width ``r`` (no floor)."""
    ranks = _ranks_of(arm, pooled)
    j = ranks.shape[0]
    idx = np.arange(j)
    gaps = ranks[np.minimum(idx + r, j - 1)] - ranks[np.maximum(idx - r, 0)]
    return gaps / pooled.total


def elr_arm(arm: Arm, pooled: PooledProjection, params: DbelParams = DbelParams()) -> ElrValue:
    """Log ELR of one arm, minimised over the integer window.

    Ties in the minimum resolve to the smallest ``r``.
    """
    ranks = _ranks_of(arm, pooled)
    j = int(ranks.shape[0])
    lo, hi = window_bounds(j, params.delta)
    table = log_table(pooled.total)
    cst = arm_constants(j, pooled.total, lo, hi)
    idx = np.arange(j)
    best, best_r = math.inf, lo
    for q, r in enumerate(range(lo, hi + 1)):
        gaps = ranks[np.minimum(idx + r, j - 1)] - ranks[np.maximum(idx - r, 0)]
        gaps = floor_gaps(gaps, params.spacing_floor_enabled)
        if np.any(gaps <= 0):
            value = math.inf
        else:
            value = float(cst[q] - float(table[gaps].sum()) * FIXED_INV)
        if value < best:
            best, best_r = value, r
    return ElrValue(best, best_r)


def normalize_direction(u) -> tuple[np.ndarray, int]:
    """Scale ``u`` so its first nonzero coordinate is 1.

    Returns the scaled vector and the index of that coordinate.
    """
    u = np.asarray(getattr(u, "coords", u), dtype=np.float64)
    if u.ndim != 1 or not np.all(np.isfinite(u)):
        raise ParameterError("direction must be a finite vector")
    nz = np.flatnonzero(u)
    if nz.size == 0:
        raise ParameterError("direction must have a nonzero coordinate")
    s = int(nz[0])
    v = u / u[s]
    v[:s] = 0.0
    v[s] = 1.0
    return v, s


def _direction_projections(values: np.ndarray, u) -> np.ndarray:
    """Projections of a stacked sample along ``u`` with the right-cell rule.

    The statistic is piecewise constant in the last coordinate of the
    normalised direction.  When that coordinate sits exactly on a tie
    point the configuration of the cell to its right is used; this is a
    one-sided perturbation, so exact ties created by the direction itself
    are resolved deterministically instead of by rounding noise.
    """
    v, s = normalize_direction(u)
    p = values.shape[1]
    if v.shape[0] != p:
        raise DimensionMismatchError(
            f"direction has {v.shape[0]} coordinates, samples have {p} components"
        )
    last = values[:, p - 1]
    if s == p - 1:
        return last.copy()
    z0 = _lines.partial_projection(values, v, p - 1)
    w = _lines.breakpoints(z0, last)
    t = _lines.cell_point(w, float(v[p - 1]))
    return z0 + t * last


def log_ts_for_direction(
    x: MultivariateSample,
    y: MultivariateSample,
    u,
    params: DbelParams = DbelParams(),
) -> float:
    """Log DBEL statistic ``log ELR_X + log ELR_Y`` of the projections along ``u``.

    Invariant under positive or negative rescaling of ``u``.  At a
    direction where two observations tie, the value of the adjacent cell
    reached by increasing the last coordinate is returned.
    """
    if x.dim != y.dim:
        raise DimensionMismatchError(f"arms have {x.dim} and {y.dim} components")
    stacked = np.vstack([x.values, y.values])
    z = _direction_projections(stacked, u)
    pooled = pool(z[: x.rows], z[x.rows:])
    return elr_arm(Arm.X, pooled, params).log_value + elr_arm(Arm.Y, pooled, params).log_value
