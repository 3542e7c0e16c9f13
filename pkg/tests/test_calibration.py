import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dbel.calibration import (
    CalibrationTable,
    McConfig,
    calibrate_retrospective,
    calibration_dir,
    default_table_name,
    distribution_freeness_check,
    load_table,
    mc_p_value,
    null_statistics,
    run_replicates,
    save_table,
)
from dbel.dbel import DbelParams
from dbel.designs import MultivariateNormal, law_from_dict, standard_normal
from dbel.errors import CalibrationMismatchError, CorruptTableError, ParameterError, SchemaVersionError


@pytest.fixture(scope="module")
def table():
    return calibrate_retrospective(6, 7, cfg=McConfig(reps=300, seed=3), threads=1)


class TestConfig:
    def test_reps_floor(self):
        with pytest.raises(ParameterError):
            McConfig(reps=50)

    @pytest.mark.parametrize("alphas", [(0.0,), (1.0,), (0.5, 1.2), ()])
    def test_alpha_range(self, alphas):
        with pytest.raises(ParameterError):
            McConfig(alpha_grid=alphas)

    def test_sorted(self):
        assert McConfig(alpha_grid=(0.01, 0.1, 0.05)).alpha_grid == (0.1, 0.05, 0.01)


class TestMcPValue:
    def test_above_all(self):
        assert mc_p_value(100.0, np.arange(19.0)) == pytest.approx(0.05)

    def test_at_min(self):
        assert mc_p_value(0.0, np.arange(19.0)) == 1.0

    def test_tie_with_max(self):
        stats = np.arange(9999.0)
        assert mc_p_value(stats.max(), stats) == pytest.approx(2 / 10000)

    def test_empty(self):
        with pytest.raises(ParameterError):
            mc_p_value(1.0, [])

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=50), st.floats(-10, 10))
    def test_range(self, stats, obs):
        p = mc_p_value(obs, stats)
        assert 1 / (len(stats) + 1) <= p <= 1


class TestTable:
    def test_monotone_in_alpha(self, table):
        cs = [c for _, c in table.entries]
        assert cs == sorted(cs)  # alphas descending, thresholds ascending

    def test_type7_quantiles(self, table):
        for a, c in table.entries:
            assert c == pytest.approx(np.quantile(table.null_stats, 1 - a))

    def test_round_trip(self, table, tmp_path):
        path = tmp_path / "t.json"
        save_table(table, path)
        back = load_table(path)
        assert back == table
        np.testing.assert_array_equal(back.null_stats, table.null_stats)
        save_table(back, tmp_path / "u.json")
        assert path.read_bytes() == (tmp_path / "u.json").read_bytes()

    def test_truncated(self, table, tmp_path):
        path = tmp_path / "t.json"
        save_table(table, path)
        path.write_bytes(path.read_bytes()[:200])
        with pytest.raises(CorruptTableError):
            load_table(path)

    def test_tampered(self, table, tmp_path):
        path = tmp_path / "t.json"
        save_table(table, path)
        doc = json.loads(path.read_text())
        doc["entries"][0]["c"] += 1.0
        path.write_text(json.dumps(doc))
        with pytest.raises(CorruptTableError):
            load_table(path)

    def test_schema_version(self, table, tmp_path):
        path = tmp_path / "t.json"
        save_table(table, path)
        doc = json.loads(path.read_text())
        doc["schema_version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaVersionError):
            load_table(path)

    def test_key_mismatch_refused(self, table):
        with pytest.raises(CalibrationMismatchError):
            table.require_match(n=6, m=7, p=2, delta=0.2, mode="exact")
        table.require_match(n=6, m=7, p=2, delta=0.1, mode="exact")

    def test_provenance_reproduces(self, table):
        again = calibrate_retrospective(6, 7, cfg=McConfig(reps=table.reps, seed=table.seed), threads=2)
        assert again.entries == table.entries and again.stats_sha256 == table.stats_sha256

    def test_default_name(self):
        name = default_table_name(kind="retrospective", p=2, delta=0.1, mode="exact", n=10, m=10)
        assert name == "retro_n10_m10_p2_delta0.1_exact.json"

    def test_calibration_dir_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv("DBEL_CALIBRATION_DIR", str(tmp_path))
        assert calibration_dir() == tmp_path
        monkeypatch.delenv("DBEL_CALIBRATION_DIR")
        assert calibration_dir() is None


class TestDeterminism:
    def test_thread_count_irrelevant(self):
        a = null_statistics(5, 5, reps=40, seed=2, threads=1)
        b = null_statistics(5, 5, reps=40, seed=2, threads=3)
        np.testing.assert_array_equal(a, b)

    def test_run_replicates_order(self):
        assert run_replicates(lambda k: k * k, 10, threads=4) == [k * k for k in range(10)]


class TestFreeness:
    def test_same_law_same_seed(self):
        law = standard_normal(2)
        rep = distribution_freeness_check(5, 5, 2, DbelParams(), (law, law), reps=60, seed=1)
        assert rep.ks_statistic == 0.0

    def test_detects_misuse(self):
        # a shifted "null" for one arm only is not a null at all
        class Shifted:
            p = 2

            def sample(self, count, stream):
                base = standard_normal(2).sample(count, stream)
                return base + (3.0 if stream.key[-1] == 1 else 0.0)

        rep = distribution_freeness_check(6, 6, 2, DbelParams(), (standard_normal(2), Shifted()),
                                          reps=300, seed=1, seed_b=2)
        assert rep.p_value < 0.01

    def test_monotone_law_same_statistics(self):
        # the statistic only sees ranks of projections along axes and slopes;
        # a common affine map of the data keeps them all
        law_a = standard_normal(2)
        law_b = MultivariateNormal((3.0, -1.0), ((4.0, 0.0), (0.0, 4.0)))
        rep = distribution_freeness_check(5, 6, 2, DbelParams(), (law_a, law_b), reps=80, seed=4)
        assert rep.ks_statistic == 0.0
