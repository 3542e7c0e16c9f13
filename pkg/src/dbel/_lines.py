"""Geometry of one-parameter families of projections ``z0 + t * c``.

Along such a line the pooled order changes only where two observations
tie, i.e. at ``t = (z0[a] - z0[b]) / (c[b] - c[a])``.  Every helper
here computes those breakpoints and the evaluation points with one fixed
sequence of floating point operations, so that the candidate
enumeration, the per-direction evaluation and both kernels agree
bit for bit on which cell a given breakpoint refers to.
"""

from __future__ import annotations

import numpy as np


def partial_projection(values: np.ndarray, v: np.ndarray, upto: int) -> np.ndarray:
    """``sum(values[:, h] * v[h] for h < upto)``, accumulated left to right."""
    z = values[:, 0] * v[0]
    for h in range(1, upto):
        z = z + values[:, h] * v[h]
    return z


def breakpoints(z0: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Sorted distinct finite tie points of the line over all unordered pairs.

    Negative zero is folded into positive zero so that deduplication by
    value is also deduplication by bit pattern.
    """
    a, b = np.triu_indices(z0.shape[0], k=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = (z0[a] - z0[b]) / (c[b] - c[a])
    w = w[np.isfinite(w)] + 0.0
    return np.unique(w)


def right_points(w: np.ndarray) -> np.ndarray:
    """One point strictly inside the open cell to the right of each breakpoint."""
    t = np.empty_like(w)
    if w.size:
        t[:-1] = (w[:-1] + w[1:]) * 0.5
        t[-1] = w[-1] + max(1.0, abs(float(w[-1])))
    return t


def left_point(w: np.ndarray) -> float:
    """A point in the unbounded cell left of every breakpoint."""
    if w.size == 0:
        return 0.0
    return float(w[0] - max(1.0, abs(float(w[0]))))


def cell_point(w: np.ndarray, target: float) -> float:
    """Evaluation point of the cell immediately to the right of ``target``.

    ``w`` must be the sorted breakpoint array of the line.  When
    ``target`` is itself a breakpoint the cell on its right is used; when
    it lies strictly inside a cell, a point of that same cell is returned.
    """
    k = int(np.searchsorted(w, target, side="right"))
    if k < w.size:
        return float((target + w[k]) * 0.5)
    return float(target + max(1.0, abs(float(target))))
