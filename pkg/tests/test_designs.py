import json

import numpy as np
import pytest
from scipy import stats

from dbel.designs import (
    DESIGN_IDS,
    MultivariateNormal,
    MultivariateT,
    get_design,
    law_from_dict,
    load_law,
    null_pair,
    sample_design,
    standard_normal,
)
from dbel.errors import ParameterError
from dbel.rng import ARM_X, ARM_Y, RngStream, replicate_stream

BIG = 100_000


def draw(design, arm, count=BIG, seed=1):
    return sample_design(get_design(design), arm, count, replicate_stream(seed, 0)).values


def assert_moments(v, mean, cov, k=4.0):
    """Mean and covariance within k Monte Carlo standard errors."""
    n = v.shape[0]
    mean = np.asarray(mean, float)
    se_mean = v.std(axis=0, ddof=1) / np.sqrt(n)
    assert np.all(np.abs(v.mean(axis=0) - mean) <= k * se_mean + 1e-12)
    c = v - mean
    for i in range(v.shape[1]):
        for j in range(v.shape[1]):
            prod = c[:, i] * c[:, j]
            se = prod.std(ddof=1) / np.sqrt(n)
            assert abs(prod.mean() - cov[i][j]) <= k * se, (i, j, prod.mean(), cov[i][j])


class TestMoments:
    def test_d1_t_covariance(self):
        scale = np.array([[1.0, 0.9], [0.9, 1.0]])
        assert_moments(draw("D1", ARM_Y), [0, 0], scale * 7 / 5)
        assert_moments(draw("D1", ARM_X), [0, 0], np.eye(2))

    def test_d2(self):
        x, y = draw("D2", ARM_X), draw("D2", ARM_Y)
        assert_moments(x, [0, 1], [[1, 0], [0, 1]])
        e = np.e
        assert_moments(y, [0, np.sqrt(e)], [[1, 0], [0, (e - 1) * e]])
        assert y[:, 1].min() > 0 and x[:, 1].min() > 0

    def test_d3(self):
        assert_moments(draw("D3", ARM_X), [0, 0], [[1 / 3, 0], [0, 2.25]])
        assert_moments(draw("D3", ARM_Y), [0, 0], np.eye(2))

    def test_d4_d6_shift(self):
        assert_moments(draw("D4", ARM_Y), [0.5, 0.7], np.eye(2))
        assert_moments(draw("D6", ARM_Y), [0.5, 0.7], [[1, 0.5], [0.5, 1]])

    def test_d5_covariance(self):
        assert_moments(draw("D5", ARM_Y), [0, 0], [[1, 0.5], [0.5, 1]])

    def test_d7_centered_exponential(self):
        assert_moments(draw("D7", ARM_Y), [0, 0], np.eye(2))

    def test_d9_unit_variance_and_normal_margins(self):
        y = draw("D9", ARM_Y)
        # E[xi] + E[1 - xi] = 1, and Cov(Y1, Y2) = E[1 - xi] = 1/2
        assert_moments(y, [0, 0], [[1, 0.5], [0.5, 1]])
        for k in range(2):
            assert stats.kstest(y[:, k], "norm").pvalue > 0.001

    def test_trivariate(self):
        assert_moments(draw("S1", ARM_Y), [0.5, 0.7, 0.5], np.eye(3))
        rho = [[1, 0.5, 0.5], [0.5, 1, 0.5], [0.5, 0.5, 1]]
        assert_moments(draw("S2", ARM_Y), [0, 0, 0], rho)
        assert_moments(draw("S3", ARM_Y), [0.5, 0.7, 0.5], rho)


class TestCouplings:
    def test_d8_exact_square(self):
        y = draw("D8", ARM_Y, 5000)
        np.testing.assert_array_equal(y[:, 1] ** 2, y[:, 0] ** 2)
        assert np.any(y[:, 1] != y[:, 0])
        assert stats.kstest(draw("D8", ARM_Y)[:, 1], "norm").pvalue > 0.001

    @pytest.mark.parametrize("design", ["D8", "D9"])
    def test_margins_match_x(self, design):
        x, y = draw(design, ARM_X, 20000, seed=2), draw(design, ARM_Y, 20000, seed=3)
        for k in range(2):
            assert stats.ks_2samp(x[:, k], y[:, k]).pvalue > 0.001


class TestContracts:
    def test_all_ids_resolve(self):
        for design in DESIGN_IDS:
            if design == "NULL_CUSTOM":
                continue
            spec = get_design(design)
            assert spec.p == (3 if design.startswith("S") else 2)

    def test_null_custom_needs_law(self):
        with pytest.raises(ParameterError):
            get_design("NULL_CUSTOM")
        spec = get_design("NULL_CUSTOM", law=standard_normal(3))
        assert spec.is_null and spec.p == 3

    def test_unknown(self):
        with pytest.raises(ParameterError):
            get_design("D10")

    def test_non_spd(self):
        with pytest.raises(ParameterError):
            MultivariateNormal((0.0, 0.0), ((1.0, 2.0), (2.0, 1.0)))
        with pytest.raises(ParameterError):
            MultivariateT(((1.0, 0.0), (1.0, 1.0)), 5.0)

    def test_reproducible(self):
        a = draw("D2", ARM_Y, 50, seed=4)
        b = draw("D2", ARM_Y, 50, seed=4)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, draw("D2", ARM_Y, 50, seed=5))

    def test_shift_scale(self):
        spec = get_design("D4", shift_scale=0.0)
        assert spec.parameters["shift_scale"] == 0.0
        y = sample_design(spec, ARM_Y, BIG, RngStream(0)).values
        assert_moments(y, [0, 0], np.eye(2))


class TestNullPair:
    def test_shapes(self):
        x, y = null_pair(standard_normal(2), 10, 10, RngStream(0, (3,)))
        assert x.values.shape == (10, 2) and y.values.shape == (10, 2)

    def test_lognormal_positive(self):
        law = law_from_dict({"components": [{"dist": "lognormal"}, {"dist": "lognormal"}]})
        x, y = null_pair(law, 200, 200, RngStream(1))
        assert x.values.min() > 0 and y.values.min() > 0

    def test_arms_disjoint_streams(self):
        x, y = null_pair(standard_normal(2), 10, 10, RngStream(0))
        assert not np.array_equal(x.values, y.values)

    def test_load_law(self, tmp_path):
        path = tmp_path / "law.json"
        path.write_text(json.dumps({"mean": [0, 0], "cov": [[1, 0.5], [0.5, 1]]}))
        law = load_law(path)
        assert law.p == 2
        path.write_text("{nope")
        with pytest.raises(ParameterError):
            load_law(path)
