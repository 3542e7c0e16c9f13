"""Distribution-free multivariate two-sample testing with density-based empirical likelihood."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .calibration import (
    CalibrationTable,
    McConfig,
    calibrate_retrospective,
    distribution_freeness_check,
    load_table,
    mc_p_value,
    save_table,
)
from .dbel import DbelParams, elr_arm, log_ts_for_direction
from .designs import DesignSpec, get_design, null_pair, sample_design
from .directions import (
    CandidateSet,
    Direction,
    candidates_multistart,
    candidates_p2,
    candidates_recursive,
)
from .errors import DbelError
from .power import PowerReport, power_study, resampling_power
from .samples import MultivariateSample, load_sample, pool, project
from .sequential import (
    SequentialPlan,
    SequentialState,
    StageDecision,
    calibrate_sequential,
    run_sequential,
    sequential_step,
)
from .teststat import Decision, Mode, TestResult, compute_ts, retrospective_test

__all__ = [
    "__version__",
    "BACKEND",
    "CalibrationTable",
    "CandidateSet",
    "DbelError",
    "DbelParams",
    "Decision",
    "DesignSpec",
    "Direction",
    "McConfig",
    "Mode",
    "MultivariateSample",
    "PowerReport",
    "SequentialPlan",
    "SequentialState",
    "StageDecision",
    "TestResult",
    "calibrate_retrospective",
    "calibrate_sequential",
    "candidates_multistart",
    "candidates_p2",
    "candidates_recursive",
    "compute_ts",
    "distribution_freeness_check",
    "elr_arm",
    "get_design",
    "load_sample",
    "load_table",
    "log_ts_for_direction",
    "mc_p_value",
    "null_pair",
    "pool",
    "power_study",
    "project",
    "resampling_power",
    "retrospective_test",
    "run_sequential",
    "sample_design",
    "save_table",
    "sequential_step",
]
