"""Candidate projection directions.

The statistic is piecewise constant in the direction: it only changes
when two projected observations swap order.  For two components every
such swap happens at one of the pairwise slopes of the pooled sample,
so a finite list of directions is enough (``candidates_p2``).  For more
components the same argument applies coordinate by coordinate and gives
a recursive finite construction (``candidates_recursive``), whose size
grows doubly exponentially with the dimension.  ``candidates_multistart``
is the approximate alternative: coordinate-wise exact line searches from
a handful of quantile-based starting points.

Directions are reported in normal form, scaled so that the first nonzero
coordinate equals one.  A direction whose last free coordinate sits on a
tie point stands for the cell immediately to its right (see
``log_ts_for_direction``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _lines
from ._engine import Evaluator
from .dbel import DbelParams
from .errors import BudgetExceededError, DimensionMismatchError, ParameterError
from .samples import MultivariateSample

__all__ = [
    "Construction",
    "Direction",
    "CandidateSet",
    "DEFAULT_MAX_EVALS",
    "candidates_p2",
    "candidates_recursive",
    "candidates_multistart",
    "projected_evaluations",
]

DEFAULT_MAX_EVALS = 10**6
DEFAULT_STARTS = 12
DEFAULT_SWEEPS = 4
_START_PAIRS = 400


class Construction(enum.Enum):
    P2_EXACT = "p2_exact"
    RECURSIVE_EXACT = "recursive_exact"
    MULTISTART_APPROX = "multistart_approx"


@dataclass(frozen=True, order=True)
class Direction:
    """A projection vector; ordering is lexicographic on the coordinates."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        coords = tuple(float(c) + 0.0 for c in self.coords)
        if not coords:
            raise ParameterError("direction needs at least one coordinate")
        if not all(math.isfinite(c) for c in coords):
            raise ParameterError(f"direction has non-finite coordinates: {coords}")
        if not any(c != 0.0 for c in coords):
            raise ParameterError("direction must have a nonzero coordinate")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, values: Iterable[float]) -> "Direction":
        return cls(tuple(values))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.float64)


def axis(p: int, s: int) -> Direction:
    e = [0.0] * p
    e[s] = 1.0
    return Direction(tuple(e))


@dataclass(frozen=True)
class CandidateSet:
    directions: tuple[Direction, ...]
    construction: Construction
    exact: bool

    def __len__(self) -> int:
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)

    def as_array(self) -> np.ndarray:
        return np.array([d.coords for d in self.directions], dtype=np.float64)


def _canonical(dirs: Iterable[Direction]) -> tuple[Direction, ...]:
    return tuple(sorted(set(dirs)))


def _check_dims(x: MultivariateSample, y: MultivariateSample) -> int:
    if x.dim != y.dim:
        raise DimensionMismatchError(f"arms have {x.dim} and {y.dim} components")
    return x.dim


# ---------------------------------------------------------------------------
# p = 2


def candidates_p2(x: MultivariateSample, y: MultivariateSample) -> CandidateSet:
    """All slope directions ``(1, w)`` of the pooled sample plus both axes.

    Examples
    --------
    >>> import numpy as np
    >>> from dbel.samples import MultivariateSample as S
    >>> cs = candidates_p2(S(np.array([[0.0, 0.0]])), S(np.array([[1.0, 1.0]])))
    >>> [d.coords for d in cs]
    [(0.0, 1.0), (1.0, -1.0), (1.0, 0.0)]
    """
    if _check_dims(x, y) != 2:
        raise DimensionMismatchError("candidates_p2 needs bivariate samples")
    P = np.vstack([x.values, y.values])
    w = _lines.breakpoints(P[:, 0], P[:, 1])
    dirs = [Direction((1.0, float(v))) for v in w]
    dirs += [Direction((0.0, 1.0)), Direction((1.0, 0.0))]
    return CandidateSet(_canonical(dirs), Construction.P2_EXACT, True)


# ---------------------------------------------------------------------------
# general p, exact recursive construction


def _finite_rows(d: np.ndarray) -> np.ndarray:
    """Eliminate the last column of difference vectors and keep finite rows."""
    with np.errstate(divide="ignore", invalid="ignore"):
        rows = d[:, :-1] / (-d[:, -1:])
    rows = rows[np.all(np.isfinite(rows), axis=1)] + 0.0
    if rows.shape[0] == 0:
        return rows
    return np.unique(rows, axis=0)


def _level_one(P: np.ndarray, n: int) -> list[np.ndarray]:
    """First-level ratios per family: X-Y pairs, X-X pairs, Y-Y pairs."""
    X, Y = P[:n], P[n:]
    i, j = np.meshgrid(np.arange(X.shape[0]), np.arange(Y.shape[0]), indexing="ij")
    cross = X[i.ravel()] - Y[j.ravel()]
    a, b = np.triu_indices(X.shape[0], k=1)
    within_x = X[a] - X[b]
    a, b = np.triu_indices(Y.shape[0], k=1)
    within_y = Y[a] - Y[b]
    return [_finite_rows(d) for d in (cross, within_x, within_y)]


def _next_level(family: np.ndarray) -> np.ndarray:
    a, b = np.triu_indices(family.shape[0], k=1)
    return _finite_rows(family[a] - family[b])


def projected_evaluations(total: int, p: int) -> float:
    """Upper bound on the size of the recursive candidate set.

    Uses ``tau_1 = N (N - 1) / 2`` first-level ratios and
    ``tau_h = tau_{h-1} (tau_{h-1} - 1) / 2`` at deeper levels; a set with
    leading coordinate ``s`` draws one value from each of the levels
    ``1 .. p - s``.
    """
    tau = [0.0, total * (total - 1) / 2.0]
    for _ in range(2, p):
        tau.append(tau[-1] * (tau[-1] - 1.0) / 2.0)
    count = 1.0
    for s in range(1, p):
        count += math.prod(tau[1: p - s + 1])
    return count


def _levels(P: np.ndarray, n: int, depth: int) -> dict[int, list[np.ndarray]]:
    levels = {1: _level_one(P, n)}
    for lvl in range(2, depth + 1):
        levels[lvl] = [_next_level(f) for f in levels[lvl - 1]]
    return levels


def _recursive_prefixes(P: np.ndarray, n: int, p: int) -> list[np.ndarray]:
    """All candidate prefixes ``(0, .., 0, 1, u_{s+1}, .., u_{p-1})``.

    The last coordinate is left at zero; it is chosen afterwards among
    the tie points of the line obtained by freeing it.
    """
    levels = _levels(P, n, p - 1)
    out: list[np.ndarray] = []
    for s in range(p - 1):
        base = np.zeros(p)
        base[s] = 1.0
        prefixes = [base]
        for d in range(1, p - s - 1):
            rows = np.vstack(levels[p - d - s])
            grown = []
            for u in prefixes:
                vals = rows[:, s] * u[s]
                for h in range(s + 1, s + d):
                    vals = vals + rows[:, h] * u[h]
                vals = np.unique(vals[np.isfinite(vals)] + 0.0)
                for val in vals:
                    nu = u.copy()
                    nu[s + d] = val
                    grown.append(nu)
            prefixes = grown
        out.extend(prefixes)
    return out


def _prefix_line(P: np.ndarray, prefix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = P.shape[1]
    return _lines.partial_projection(P, prefix, p - 1), P[:, p - 1]


def candidates_recursive(
    x: MultivariateSample,
    y: MultivariateSample,
    max_evals: int = DEFAULT_MAX_EVALS,
    include_axes: bool = True,
) -> CandidateSet:
    """Exact finite candidate set for any dimension.

    For each leading position ``s`` the coordinates after it are chosen
    one at a time from ratio families built recursively from pairwise
    differences (X-Y, X-X and Y-Y pairs are kept as separate families);
    the final coordinate ranges over the tie points of the remaining
    line.  The last unit vector completes the set.

    Parameters
    ----------
    max_evals : int
        Budget on the projected number of directions.
    include_axes : bool
        Also emit every coordinate axis, as ``candidates_p2`` does.

    Raises
    ------
    BudgetExceededError
        If the projected enumeration exceeds ``max_evals``.
    """
    p = _check_dims(x, y)
    if p < 2:
        raise DimensionMismatchError("need at least two components")
    P = np.vstack([x.values, y.values])
    required = projected_evaluations(P.shape[0], p)
    if required > max_evals:
        raise BudgetExceededError(required, max_evals)
    dirs: list[Direction] = []
    for prefix in _recursive_prefixes(P, x.rows, p):
        z0, c = _prefix_line(P, prefix)
        for w in _lines.breakpoints(z0, c):
            u = prefix.copy()
            u[p - 1] = w
            dirs.append(Direction(tuple(u)))
    dirs.append(axis(p, p - 1))
    if include_axes:
        dirs.extend(axis(p, s) for s in range(p))
    return CandidateSet(_canonical(dirs), Construction.RECURSIVE_EXACT, True)


# ---------------------------------------------------------------------------
# approximate multistart search


def _starting_points(P: np.ndarray, n_starts: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Axes plus quantile starts built from subsampled first-level slopes."""
    N, p = P.shape
    starts = [np.eye(p)[s] for s in range(p)]
    n_q = max(n_starts - p, 0)
    if n_q == 0:
        return starts
    probs = (np.arange(n_q) + 0.5) / n_q
    a = rng.integers(0, N, size=_START_PAIRS)
    b = rng.integers(0, N - 1, size=_START_PAIRS)
    b = b + (b >= a)  # distinct second index
    coords = np.ones((n_q, p))
    for k in range(1, p):
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = (P[a, 0] - P[b, 0]) / (P[b, k] - P[a, k])
        slopes = slopes[np.isfinite(slopes)]
        if slopes.size == 0:
            coords[:, k] = 0.0
            continue
        coords[:, k] = np.quantile(slopes, rng.permutation(probs))
    starts.extend(coords[i] for i in range(n_q))
    return starts


def _ascend(ev: Evaluator, start: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, float]:
    """Coordinate ascent with exact line maximisation along each free coordinate."""
    v = start.astype(np.float64).copy()
    lead = int(np.flatnonzero(v)[0])
    v = v / v[lead]
    free = range(lead + 1, ev.p)
    current = -math.inf
    if not free:
        return v, ev.value_of_direction(v)
    for _ in range(max_sweeps):
        improved = False
        for k in free:
            z0, c = ev.line(v, k)
            scan = ev.scan_cells(z0, c, include_left=True)
            values = np.concatenate([[scan.left_value], scan.values])
            tpts = np.concatenate([[scan.left_t], scan.tpts])
            best = int(np.argmax(values))
            if values[best] > current:
                current = float(values[best])
                v[k] = tpts[best]
                improved = True
        if not improved:
            break
    return v, current


def candidates_multistart(
    x: MultivariateSample,
    y: MultivariateSample,
    n_starts: int = DEFAULT_STARTS,
    seed: int = 0,
    max_sweeps: int = DEFAULT_SWEEPS,
    params: DbelParams = DbelParams(),
) -> CandidateSet:
    """Local optima of coordinate-wise exact ascent from quantile starts.

    The coordinate axes are always among the starts.  The remaining
    starts use empirical quantiles of pairwise slopes computed on a
    random subsample of pooled pairs, with the quantile levels shuffled
    per coordinate.  Starts and the optima reached from them are
    returned, sorted lexicographically.  Deterministic given ``seed``.
    """
    _check_dims(x, y)
    if n_starts < 1:
        raise ParameterError("n_starts must be positive")
    ev = Evaluator(x, y, params)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    dirs: list[Direction] = []
    for start in _starting_points(ev.P, n_starts, rng):
        dirs.append(Direction(tuple(start)))
        optimum, _ = _ascend(ev, start, max_sweeps)
        dirs.append(Direction(tuple(optimum)))
    return CandidateSet(_canonical(dirs), Construction.MULTISTART_APPROX, False)


def evaluate_directions(ev: Evaluator, directions: Sequence[Direction]) -> np.ndarray:
    """Values of ``log_ts_for_direction`` at each direction."""
    return np.array([ev.value_of_direction(d.coords) for d in directions])
