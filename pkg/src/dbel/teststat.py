"""The maximised statistic ``log TS`` and the retrospective decision rule."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ._engine import Evaluator
from .dbel import DbelParams
from .directions import (
    DEFAULT_MAX_EVALS,
    DEFAULT_STARTS,
    Construction,
    Direction,
    _prefix_line,
    _recursive_prefixes,
    axis,
    candidates_multistart,
    evaluate_directions,
    projected_evaluations,
)
from .errors import BudgetExceededError, CalibrationMismatchError, DimensionMismatchError
from .samples import MultivariateSample

__all__ = ["Mode", "Decision", "TestResult", "compute_ts", "retrospective_test"]


class Mode(enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


class Decision(enum.Enum):
    REJECT = "reject"
    RETAIN = "retain"


@dataclass(frozen=True)
class TestResult:
    """Outcome of one evaluation of the maximised statistic.

    Attributes
    ----------
    log_ts : float
        Maximum of the per-direction log statistic over the candidates.
    argmax_direction : Direction
        Lexicographically smallest candidate attaining the maximum.
    candidate_count : int
        Number of distinct candidate directions evaluated.
    exact : bool
        False when the candidates came from the multistart search.
    decision, threshold, p_value, provenance
        Filled in when a threshold or calibration is supplied.
    """

    __test__ = False  # not a pytest class

    log_ts: float
    argmax_direction: Direction
    candidate_count: int
    exact: bool
    decision: Decision | None = None
    threshold: float | None = None
    p_value: float | None = None
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def with_decision(self, threshold: float, provenance: Mapping[str, Any] | None = None,
                      p_value: float | None = None) -> "TestResult":
        decision = Decision.REJECT if self.log_ts > threshold else Decision.RETAIN
        return TestResult(
            self.log_ts, self.argmax_direction, self.candidate_count, self.exact,
            decision, float(threshold), p_value, dict(provenance or {}),
        )


def _best(pairs: list[tuple[Direction, float]]) -> tuple[Direction, float]:
    """Maximum value; ties go to the lexicographically smallest direction."""
    top = max(v for _, v in pairs)
    return min(d for d, v in pairs if v == top), top


def _exact_p2(ev: Evaluator) -> tuple[Direction, float, int]:
    # candidates in lexicographic order: (0, 1) first, then (1, w) by w
    vertical = ev.value_of_projection(ev.P[:, 1])
    scan = ev.scan_cells(ev.P[:, 0], ev.P[:, 1], extra=0.0)
    k = int(np.argmax(scan.values))
    count = scan.w.size + 1
    if vertical >= scan.values[k]:
        return Direction((0.0, 1.0)), vertical, count
    return Direction((1.0, float(scan.w[k]))), float(scan.values[k]), count


def _exact_recursive(ev: Evaluator, budget: int) -> tuple[Direction, float, int]:
    p = ev.p
    required = projected_evaluations(ev.P.shape[0], p)
    if required > budget:
        raise BudgetExceededError(required, budget)
    pairs: dict[Direction, float] = {}
    for prefix in _recursive_prefixes(ev.P, ev.n, p):
        z0, c = _prefix_line(ev.P, prefix)
        scan = ev.scan_cells(z0, c)
        for w, value in zip(scan.w, scan.values):
            u = prefix.copy()
            u[p - 1] = w
            pairs[Direction(tuple(u))] = float(value)
    for s in range(p):
        e = axis(p, s)
        if e not in pairs:
            pairs[e] = ev.value_of_direction(e.coords)
    best, value = _best(list(pairs.items()))
    return best, value, len(pairs)


def compute_ts(
    x: MultivariateSample,
    y: MultivariateSample,
    params: DbelParams = DbelParams(),
    mode: Mode | str = Mode.EXACT,
    budget: int = DEFAULT_MAX_EVALS,
    seed: int = 0,
    n_starts: int = DEFAULT_STARTS,
) -> TestResult:
    """Maximise the log DBEL statistic over candidate directions.

    Bivariate data always use the closed-form slope candidates.  In
    higher dimension ``EXACT`` enumerates the recursive candidate set and
    raises ``BudgetExceededError`` when it would exceed ``budget``;
    ``APPROX`` runs the multistart search instead.

    Raises
    ------
    SampleTooSmallError
        If either arm has fewer than 4 observations.
    """
    if x.dim != y.dim:
        raise DimensionMismatchError(f"arms have {x.dim} and {y.dim} components")
    mode = Mode(mode)
    ev = Evaluator(x, y, params)
    if x.dim == 2 and mode is Mode.EXACT:
        best, value, count = _exact_p2(ev)
        return TestResult(value, best, count, True)
    if mode is Mode.EXACT:
        best, value, count = _exact_recursive(ev, budget)
        return TestResult(value, best, count, True)
    cands = candidates_multistart(x, y, n_starts=n_starts, seed=seed, params=params)
    values = evaluate_directions(ev, cands.directions)
    best, value = _best(list(zip(cands.directions, values.tolist())))
    return TestResult(value, best, len(cands), False)


def retrospective_test(
    x: MultivariateSample,
    y: MultivariateSample,
    params: DbelParams = DbelParams(),
    threshold: float | None = None,
    *,
    table=None,
    alpha: float | None = None,
    mode: Mode | str = Mode.EXACT,
    budget: int = DEFAULT_MAX_EVALS,
    seed: int = 0,
) -> TestResult:
    """Reject when ``log_ts`` strictly exceeds the threshold.

    The threshold is either given directly or looked up in a calibration
    table, which must match the sample sizes, dimension, delta and mode.
    A table that stores its raw null statistics also yields a Monte Carlo
    p-value.
    """
    mode = Mode(mode)
    p_value = None
    provenance: dict[str, Any] = {}
    if table is not None:
        if alpha is None:
            raise CalibrationMismatchError("alpha is required with a calibration table")
        table.require_match(n=x.rows, m=y.rows, p=x.dim, delta=params.delta, mode=mode.value)
        threshold = table.threshold(alpha)
        provenance = table.provenance()
    if threshold is None:
        raise CalibrationMismatchError("either threshold or a calibration table is required")
    result = compute_ts(x, y, params, mode, budget, seed)
    if table is not None and table.null_stats is not None:
        from .calibration import mc_p_value

        p_value = mc_p_value(result.log_ts, table.null_stats)
    if not provenance:
        provenance = {"source": "explicit threshold"}
    return result.with_decision(threshold, provenance, p_value)
