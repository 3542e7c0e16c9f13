"""Empirical power at a calibrated threshold.

Two harnesses share one report type: ``power_study`` draws fresh samples
from a design, and ``resampling_power`` subsamples two fixed populations
without replacement.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .calibration import CalibrationTable, run_replicates
from .dbel import DbelParams
from .designs import DesignSpec, sample_design
from .errors import ParameterError
from .rng import ARM_X, ARM_Y, replicate_stream
from .samples import MultivariateSample
from .teststat import Mode, compute_ts

__all__ = [
    "DEFAULT_POWER_REPS",
    "DEFAULT_RESAMPLING_REPS",
    "PowerReport",
    "power_study",
    "resampling_power",
    "power_table",
]

DEFAULT_POWER_REPS = 10000
DEFAULT_RESAMPLING_REPS = 5000


@dataclass(frozen=True)
class PowerReport:
    """Rejection frequency of the retrospective test.

    ``wall_clock`` is informational and is left out of ``to_dict`` so
    that reports of identical runs compare equal byte for byte.
    """

    design: str
    n: int
    m: int
    alpha: float
    reps: int
    rejections: int
    threshold: float
    provenance: Mapping[str, Any] = field(default_factory=dict)
    mode: str = Mode.EXACT.value
    wall_clock: float = field(default=0.0, compare=False)

    @property
    def power(self) -> float:
        return self.rejections / self.reps

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.power * (1.0 - self.power) / self.reps)

    def binomial_ci(self, level: float = 0.95) -> tuple[float, float]:
        """Clopper-Pearson interval for the rejection probability."""
        from scipy.stats import binomtest

        ci = binomtest(self.rejections, self.reps).proportion_ci(confidence_level=level)
        return float(ci.low), float(ci.high)

    def to_dict(self) -> dict[str, Any]:
        return {
            "design": self.design,
            "n": self.n,
            "m": self.m,
            "alpha": self.alpha,
            "reps": self.reps,
            "rejections": self.rejections,
            "power": self.power,
            "threshold": self.threshold,
            "mode": self.mode,
            "provenance": dict(self.provenance),
        }


def _rejections(flags: Sequence[bool]) -> int:
    return int(np.count_nonzero(np.asarray(flags, dtype=bool)))


def _check_reps(reps: int) -> int:
    if int(reps) != reps or reps < 1:
        raise ParameterError(f"reps must be a positive integer, got {reps}")
    return int(reps)


def power_study(
    spec: DesignSpec, n: int, m: int, alpha: float, table: CalibrationTable,
    reps: int = DEFAULT_POWER_REPS, seed: int = 0, *, params: DbelParams = DbelParams(),
    mode: Mode | str = Mode.EXACT, threads: int | None = None,
) -> PowerReport:
    """Fraction of ``reps`` design draws for which ``log_ts > C_alpha``.

    Raises
    ------
    CalibrationMismatchError
        If the table was built for other sizes, dimension, delta or mode.
    """
    mode = Mode(mode)
    reps = _check_reps(reps)
    table.require_match(n=n, m=m, p=spec.p, delta=params.delta, mode=mode.value)
    c = table.threshold(alpha)

    def one(k: int) -> bool:
        stream = replicate_stream(seed, k)
        x = sample_design(spec, ARM_X, n, stream)
        y = sample_design(spec, ARM_Y, m, stream)
        return compute_ts(x, y, params, mode, seed=k).log_ts > c

    start = time.perf_counter()
    flags = run_replicates(one, reps, threads)
    return PowerReport(spec.id, n, m, float(alpha), reps, _rejections(flags), c,
                       table.provenance(), mode.value, time.perf_counter() - start)


def resampling_power(
    x_pop: MultivariateSample, y_pop: MultivariateSample, subsample: tuple[int, int],
    alpha: float, table: CalibrationTable, reps: int = DEFAULT_RESAMPLING_REPS, seed: int = 0,
    *, params: DbelParams = DbelParams(), mode: Mode | str = Mode.EXACT,
    threads: int | None = None, label: str = "resampling",
) -> PowerReport:
    """Rejection frequency over random subsamples drawn without replacement.

    Each replicate picks ``n`` distinct rows of ``x_pop`` and ``m``
    distinct rows of ``y_pop`` and applies the test at level ``alpha``.
    """
    mode = Mode(mode)
    reps = _check_reps(reps)
    n, m = (int(s) for s in subsample)
    if n > x_pop.rows or m > y_pop.rows:
        raise ParameterError(
            f"subsample ({n}, {m}) exceeds population sizes ({x_pop.rows}, {y_pop.rows})"
        )
    table.require_match(n=n, m=m, p=x_pop.dim, delta=params.delta, mode=mode.value)
    c = table.threshold(alpha)

    def one(k: int) -> bool:
        stream = replicate_stream(seed, k)
        ix = stream.child(ARM_X).generator().choice(x_pop.rows, size=n, replace=False)
        iy = stream.child(ARM_Y).generator().choice(y_pop.rows, size=m, replace=False)
        x = MultivariateSample(x_pop.values[ix])
        y = MultivariateSample(y_pop.values[iy])
        return compute_ts(x, y, params, mode, seed=k).log_ts > c

    start = time.perf_counter()
    flags = run_replicates(one, reps, threads)
    return PowerReport(label, n, m, float(alpha), reps, _rejections(flags), c,
                       table.provenance(), mode.value, time.perf_counter() - start)


def power_table(reports: Sequence[PowerReport]) -> str:
    """Aligned plain-text table, one row per report.

    Examples
    --------
    >>> r = PowerReport("D4", 30, 50, 0.05, 10, 8, 20.0)
    >>> print(power_table([r]))
    design   n   m  alpha  reps  power
    D4      30  50   0.05    10  0.800
    """
    header = ("design", "n", "m", "alpha", "reps", "power")
    rows = [(r.design, str(r.n), str(r.m), f"{r.alpha:g}", str(r.reps), f"{r.power:.3f}")
            for r in reports]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(header)]

    def fmt(cells: Sequence[str]) -> str:
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join([first, *rest]).rstrip()

    return "\n".join([fmt(header), *(fmt(r) for r in rows)])
