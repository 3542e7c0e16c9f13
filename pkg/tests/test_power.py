import numpy as np
import pytest

from dbel.calibration import McConfig, calibrate_retrospective
from dbel.designs import get_design
from dbel.errors import CalibrationMismatchError, ParameterError
from dbel.power import PowerReport, power_study, power_table, resampling_power
from dbel.samples import MultivariateSample as S


@pytest.fixture(scope="module")
def table():
    return calibrate_retrospective(8, 8, cfg=McConfig(reps=1000, seed=11), threads=1)


def test_report_fields():
    r = PowerReport("D4", 30, 50, 0.05, 200, 50, 20.0)
    assert r.power == 0.25
    lo, hi = r.binomial_ci()
    assert lo < 0.25 < hi
    assert "wall_clock" not in r.to_dict()


def test_null_design_near_alpha(table):
    rep = power_study(get_design("NULL_NORMAL"), 8, 8, 0.1, table, reps=600, seed=3, threads=1)
    assert abs(rep.power - 0.1) <= 3 * np.sqrt(0.1 * 0.9 / 600) + 3 * np.sqrt(0.1 * 0.9 / 1000)


def test_shift_monotone(table):
    powers = [power_study(get_design("D4", shift_scale=s), 8, 8, 0.1, table, reps=300, seed=1,
                          threads=1).power for s in (0.0, 1.0, 3.0)]
    assert powers[0] <= powers[1] + 0.05 and powers[1] <= powers[2]
    assert powers[2] > 0.8


def test_mismatch(table):
    with pytest.raises(CalibrationMismatchError):
        power_study(get_design("D4"), 8, 9, 0.1, table, reps=5)
    with pytest.raises(CalibrationMismatchError):
        power_study(get_design("S1"), 8, 8, 0.1, table, reps=5)


def test_thread_invariance(table):
    a = power_study(get_design("D5"), 8, 8, 0.05, table, reps=60, seed=2, threads=1)
    b = power_study(get_design("D5"), 8, 8, 0.05, table, reps=60, seed=2, threads=3)
    assert a.to_dict() == b.to_dict()


class TestResampling:
    def test_same_population_near_alpha(self, table):
        pop = S(np.random.default_rng(0).normal(size=(35, 2)))
        rep = resampling_power(pop, pop, (8, 8), 0.1, table, reps=500, seed=5, threads=1)
        assert abs(rep.power - 0.1) <= 3 * np.sqrt(0.1 * 0.9 / 500) + 0.03

    def test_strong_shift(self, table):
        rng = np.random.default_rng(1)
        x, y = S(rng.normal(size=(35, 2))), S(rng.normal(size=(35, 2)) + 3.0)
        rep = resampling_power(x, y, (8, 8), 0.1, table, reps=50, seed=5, threads=1)
        assert rep.power > 0.9

    def test_single_rep(self, table):
        pop = S(np.random.default_rng(0).normal(size=(10, 2)))
        assert resampling_power(pop, pop, (8, 8), 0.1, table, reps=1).power in (0.0, 1.0)

    def test_without_replacement(self, table):
        # with populations of exactly n rows every subsample is a permutation
        rng = np.random.default_rng(2)
        x, y = S(rng.normal(size=(8, 2))), S(rng.normal(size=(8, 2)))
        from dbel.teststat import compute_ts
        observed = compute_ts(x, y).log_ts > table.threshold(0.1)
        rep = resampling_power(x, y, (8, 8), 0.1, table, reps=5)
        assert rep.rejections == (5 if observed else 0)

    def test_too_large(self, table):
        pop = S(np.ones((5, 2)) + np.arange(10).reshape(5, 2))
        with pytest.raises(ParameterError):
            resampling_power(pop, pop, (8, 8), 0.1, table, reps=1)


def test_power_table_alignment():
    rows = [PowerReport("D4", 30, 50, 0.05, 2000, 1650, 20.0),
            PowerReport("NULL_NORMAL", 10, 15, 0.05, 2000, 100, 12.0)]
    lines = power_table(rows).splitlines()
    assert len(lines) == 3
    assert len({len(l) for l in lines}) == 1
    assert lines[1].split()[-1] == "0.825"
