"""Pure numpy implementation of the line-scan kernel.

Same contract as the compiled ``_kernel.scan_line``.  Each evaluation
point is handled from scratch, vectorised over blocks of points.  Since
the spacing sums are fixed-point integers, both implementations return
bit-identical values.
"""

from __future__ import annotations

import numpy as np

from .dbel import FIXED_INV

_BLOCK_BYTES = 1 << 24


def _ranks_le(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Row-wise pooled ranks of ``first`` with ties to ``second`` counted (<=)."""
    rows, k = first.shape
    # a stable sort puts `second` ahead of `first` within tied values
    order = np.argsort(np.concatenate([second, first], axis=1), axis=1, kind="stable")
    _, cols = np.nonzero(order >= second.shape[1])
    return cols.reshape(rows, k) + 1


def _window_sums(R: np.ndarray, lo: int, hi: int, logfix: np.ndarray) -> np.ndarray:
    k = R.shape[1]
    idx = np.arange(k)
    sums = np.empty((R.shape[0], hi - lo + 1), dtype=np.int64)
    for q, r in enumerate(range(lo, hi + 1)):
        upper = np.minimum(idx + r, k - 1)
        lower = np.maximum(idx - r, 0)
        gaps = np.maximum(R[:, upper] - R[:, lower], 1)
        sums[:, q] = logfix[gaps].sum(axis=1)
    return sums


def _arm_values(sums: np.ndarray, cst: np.ndarray) -> np.ndarray:
    return (cst[None, :] - sums.astype(np.float64) * FIXED_INV).min(axis=1)


def scan_line(z0, c, n, tpts, lox, hix, loy, hiy, logfix, cx, cy):
    """Log statistic of ``z0 + t * c`` (first ``n`` entries are arm X) at each t."""
    z0 = np.asarray(z0, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    tpts = np.asarray(tpts, dtype=np.float64)
    logfix = np.asarray(logfix, dtype=np.int64)
    cx = np.asarray(cx, dtype=np.float64)
    cy = np.asarray(cy, dtype=np.float64)
    N = z0.shape[0]
    out = np.empty(tpts.shape[0], dtype=np.float64)
    block = max(1, _BLOCK_BYTES // (8 * N * 4))
    for start in range(0, tpts.shape[0], block):
        t = tpts[start:start + block]
        Z = z0[None, :] + t[:, None] * c[None, :]
        zx = np.sort(Z[:, :n], axis=1)
        zy = np.sort(Z[:, n:], axis=1)
        Rx = _ranks_le(zx, zy)
        Ry = _ranks_le(zy, zx)
        vx = _arm_values(_window_sums(Rx, lox, hix, logfix), cx)
        vy = _arm_values(_window_sums(Ry, loy, hiy, logfix), cy)
        out[start:start + block] = vx + vy
    return out
