"""Group-sequential version of the test.

Groups of ``m`` observations per arm arrive one at a time.  After group
``k`` the statistic is recomputed from scratch on all ``k * m`` rows of
each arm, and the procedure stops to reject as soon as it reaches the
threshold ``C``.  The threshold is calibrated on the maximum of the
stage statistics over ``k = 1..K`` under the null.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

import numpy as np

from .calibration import CalibrationTable, McConfig, run_replicates, table_from_statistics
from .dbel import MIN_ARM_SIZE, DbelParams
from .designs import Law, null_pair, standard_normal
from .directions import DEFAULT_MAX_EVALS
from .errors import ParameterError, SequentialError
from .rng import replicate_stream
from .samples import MultivariateSample
from .teststat import Decision, Mode, compute_ts

__all__ = [
    "StageDecision",
    "SequentialPlan",
    "StageRecord",
    "SequentialState",
    "SequentialReport",
    "sequential_step",
    "run_sequential",
    "stage_statistics",
    "sequential_null_statistics",
    "calibrate_sequential",
]


class StageDecision(enum.Enum):
    CONTINUE = "continue"
    STOP_REJECT = "stop_reject"
    STOP_RETAIN = "stop_retain"


@dataclass(frozen=True)
class SequentialPlan:
    """Shape and threshold of a group-sequential analysis.

    Parameters
    ----------
    K : int
        Maximum number of groups.
    m_per_group : int
        Observations per arm in every group; the first stage must already
        support a DBEL window, so at least 4.
    threshold : float
        Stopping boundary for ``log R_km``; reached means ``>=``.
    """

    K: int
    m_per_group: int
    threshold: float
    params: DbelParams = DbelParams()
    mode: Mode = Mode.EXACT
    budget: int = DEFAULT_MAX_EVALS
    seed: int = 0
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if int(self.K) != self.K or self.K < 1:
            raise ParameterError(f"K must be a positive integer, got {self.K}")
        if int(self.m_per_group) != self.m_per_group or self.m_per_group < 2:
            raise ParameterError(f"m_per_group must be an integer >= 2, got {self.m_per_group}")
        if self.m_per_group < MIN_ARM_SIZE:
            raise ParameterError(
                f"stage 1 would have {self.m_per_group} observations per arm; "
                f"the DBEL window needs at least {MIN_ARM_SIZE}"
            )
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True)
class StageRecord:
    k: int
    log_r: float
    crossed: bool


@dataclass(frozen=True)
class SequentialState:
    """Accumulated data and history; replaced, never mutated, at each stage."""

    plan: SequentialPlan
    stage: int = 0
    x_accum: MultivariateSample | None = None
    y_accum: MultivariateSample | None = None
    history: tuple[StageRecord, ...] = ()

    @property
    def stopped(self) -> bool:
        return bool(self.history) and (self.history[-1].crossed or self.stage >= self.plan.K)


def _as_group(group, m: int, label: str) -> np.ndarray:
    values = group.values if isinstance(group, MultivariateSample) else np.asarray(group, float)
    if values.ndim != 2 or values.shape[0] != m:
        rows = values.shape[0] if values.ndim == 2 else values.size
        raise SequentialError(f"{label} group has {rows} rows, expected exactly {m}")
    return values


def sequential_step(state: SequentialState, x_group, y_group) -> tuple[SequentialState, StageDecision]:
    """Add one group per arm and apply the stopping rule.

    Raises
    ------
    SequentialError
        Wrong group size or a step after the procedure stopped.
    """
    plan = state.plan
    if state.stopped:
        raise SequentialError("the procedure has already stopped; no further stages accepted")
    xg = _as_group(x_group, plan.m_per_group, "X")
    yg = _as_group(y_group, plan.m_per_group, "Y")
    x_acc = xg if state.x_accum is None else np.vstack([state.x_accum.values, xg])
    y_acc = yg if state.y_accum is None else np.vstack([state.y_accum.values, yg])
    x_s, y_s = MultivariateSample(x_acc), MultivariateSample(y_acc)
    stage = state.stage + 1
    log_r = compute_ts(x_s, y_s, plan.params, plan.mode, plan.budget, plan.seed).log_ts
    crossed = log_r >= plan.threshold
    new_state = replace(state, stage=stage, x_accum=x_s, y_accum=y_s,
                        history=state.history + (StageRecord(stage, log_r, crossed),))
    if crossed:
        return new_state, StageDecision.STOP_REJECT
    if stage >= plan.K:
        return new_state, StageDecision.STOP_RETAIN
    return new_state, StageDecision.CONTINUE


@dataclass(frozen=True)
class SequentialReport:
    stopping_stage: int
    decision: Decision
    history: tuple[StageRecord, ...]
    threshold: float
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "stopping_stage": self.stopping_stage,
            "decision": self.decision.value,
            "threshold": self.threshold,
            "trajectory": [
                {"stage": r.k, "log_r": r.log_r, "crossed": r.crossed} for r in self.history
            ],
            "provenance": dict(self.provenance),
        }


def run_sequential(plan: SequentialPlan, x_stream: Iterable, y_stream: Iterable) -> SequentialReport:
    """Feed groups until the procedure stops and summarise the trajectory."""
    state = SequentialState(plan)
    xs, ys = iter(x_stream), iter(y_stream)
    while True:
        try:
            xg, yg = next(xs), next(ys)
        except StopIteration:
            raise SequentialError(
                f"group streams ended after {state.stage} stage(s) without a stopping decision"
            ) from None
        state, decision = sequential_step(state, xg, yg)
        if decision is not StageDecision.CONTINUE:
            outcome = Decision.REJECT if decision is StageDecision.STOP_REJECT else Decision.RETAIN
            return SequentialReport(state.stage, outcome, state.history, plan.threshold,
                                    plan.provenance)


def stage_statistics(x: MultivariateSample, y: MultivariateSample, K: int, m_per_group: int,
                     params: DbelParams = DbelParams(), mode: Mode | str = Mode.EXACT,
                     seed: int = 0) -> np.ndarray:
    """``log R_km`` for ``k = 1..K``, each from the first ``k * m`` rows of both arms."""
    out = np.empty(K)
    for k in range(1, K + 1):
        rows = k * m_per_group
        out[k - 1] = compute_ts(x.head(rows), y.head(rows), params, mode, seed=seed).log_ts
    return out


def sequential_null_statistics(
    K: int, m_per_group: int, p: int = 2, params: DbelParams = DbelParams(), *,
    reps: int, seed: int, law: Law | None = None, mode: Mode | str = Mode.EXACT,
    threads: int | None = None,
) -> np.ndarray:
    """Stage statistics of null replicates, shape ``(reps, K)``."""
    law = law or standard_normal(p)
    total = K * m_per_group

    def one(k: int) -> np.ndarray:
        x, y = null_pair(law, total, total, replicate_stream(seed, k))
        return stage_statistics(x, y, K, m_per_group, params, mode, seed=k)

    return np.array(run_replicates(one, reps, threads), dtype=np.float64).reshape(reps, K)


def calibrate_sequential(
    K: int, m_per_group: int, p: int = 2, params: DbelParams = DbelParams(),
    cfg: McConfig = McConfig(), *, mode: Mode | str = Mode.EXACT, threads: int | None = None,
    keep_stats: bool = True,
) -> CalibrationTable:
    """Null quantiles of ``max_k log R_km``."""
    SequentialPlan(K, m_per_group, 0.0, params)  # validates the shape
    stages = sequential_null_statistics(K, m_per_group, p, params, reps=cfg.reps, seed=cfg.seed,
                                        mode=mode, threads=threads)
    return table_from_statistics(stages.max(axis=1), cfg, kind="sequential", p=p, params=params,
                                 mode=mode, K=K, m_per_group=m_per_group, keep_stats=keep_stats)
