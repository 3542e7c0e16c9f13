"""Independent reference implementations used only by the tests.

Nothing here imports the package's candidate or kernel code: the
oracles are written from the defining formulas with plain loops.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def naive_window(j: int, delta: float = 0.1) -> range:
    a = round(j ** (0.5 + delta))
    b = min(round(j ** (1 - delta)), round(j / 2))
    return range(min(a, b), max(a, b) + 1)


def naive_log_ts(xp, yp, delta: float = 0.1) -> float:
    """Log DBEL statistic of two projected samples from the product formula.

    Every spacing is obtained by evaluating the pooled empirical CDF with
    explicit indicator loops; logs are summed in plain floating point.
    """
    xs, ys = sorted(xp), sorted(yp)
    n, m = len(xs), len(ys)
    N = n + m

    def F(t):
        return (sum(1 for v in xp if v <= t) + sum(1 for v in yp if v <= t)) / N

    def F_own(arm, other, i):
        # own-arm count by order index, other arm by indicator
        return (i + 1 + sum(1 for v in other if v <= arm[i])) / N

    def elr(arm, other):
        k = len(arm)
        best = math.inf
        for r in naive_window(k, delta):
            total = 0.0
            for i in range(k):
                hi = min(i + r, k - 1)
                lo = max(i - r, 0)
                d = F_own(arm, other, hi) - F_own(arm, other, lo)
                if d <= 0:
                    d = 1.0 / N
                total += math.log(2 * r / (k * d))
            best = min(best, total)
        return best

    del F
    return elr(xs, ys) + elr(ys, xs)


def naive_slopes(X, Y):
    pts = [tuple(r) for r in X] + [tuple(r) for r in Y]
    out = set()
    for a, b in itertools.permutations(range(len(pts)), 2):
        den = pts[b][1] - pts[a][1]
        if den != 0:
            out.add((pts[a][0] - pts[b][0]) / den)
    return sorted(out)


def naive_compute_ts(X, Y, delta: float = 0.1) -> float:
    """Maximum over the open cells of the slope arrangement and both axes.

    Cells are sampled at generic points (midpoints and points beyond the
    extremes), where no projected ties occur.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    w = naive_slopes(X, Y)
    pts = [(w[i] + w[i + 1]) / 2 for i in range(len(w) - 1)]
    if w:
        pts += [w[0] - 1 - abs(w[0]), w[-1] + 1 + abs(w[-1])]
    else:
        pts = [0.0]
    best = naive_log_ts([r[1] for r in X], [r[1] for r in Y], delta)
    for t in pts:
        xp = [r[0] + t * r[1] for r in X]
        yp = [r[0] + t * r[1] for r in Y]
        best = max(best, naive_log_ts(xp, yp, delta))
    return best


def transcribed_p3_candidates(X, Y):
    """The p = 3 candidate directions written out family by family."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n, m = len(X), len(Y)

    def ratio(num, den):
        return num / den if den != 0 else None

    # first-level pairs: W over (i, j), U over (i, r), V over (j, s)
    W1 = []
    for i in range(n):
        for j in range(m):
            den = Y[j, 2] - X[i, 2]
            if den != 0:
                W1.append(((X[i, 0] - Y[j, 0]) / den, (X[i, 1] - Y[j, 1]) / den))
    U1 = []
    for i in range(n):
        for r in range(n):
            if i != r and X[r, 2] - X[i, 2] != 0:
                den = X[r, 2] - X[i, 2]
                U1.append(((X[i, 0] - X[r, 0]) / den, (X[i, 1] - X[r, 1]) / den))
    V1 = []
    for j in range(m):
        for s in range(m):
            if j != s and Y[s, 2] - Y[j, 2] != 0:
                den = Y[s, 2] - Y[j, 2]
                V1.append(((Y[j, 0] - Y[s, 0]) / den, (Y[j, 1] - Y[s, 1]) / den))

    def second_level(fam):
        vals = set()
        for a, b in itertools.permutations(range(len(fam)), 2):
            v = ratio(fam[a][0] - fam[b][0], fam[b][1] - fam[a][1])
            if v is not None and math.isfinite(v):
                vals.add(v)
        return vals

    u2_values = second_level(W1) | second_level(U1) | second_level(V1)
    first = W1 + U1 + V1
    dirs = set()
    for u2 in u2_values:
        for c1, c2 in first:
            u3 = c1 + u2 * c2
            if math.isfinite(u3):
                dirs.add((1.0, u2, u3))
    for _, c2 in first:
        dirs.add((0.0, 1.0, c2))
    dirs.add((0.0, 0.0, 1.0))
    return dirs


def sets_match(a, b, rtol: float = 1e-9, atol: float = 1e-12) -> tuple[int, int]:
    """Count members of ``a`` without a close partner in ``b`` and vice versa."""
    A = np.array(sorted(a), dtype=float)
    B = np.array(sorted(b), dtype=float)

    def unmatched(P, Q):
        miss = 0
        for row in P:
            close = np.all(np.abs(Q - row) <= atol + rtol * np.abs(row), axis=1)
            if not close.any():
                miss += 1
        return miss

    return unmatched(A, B), unmatched(B, A)
