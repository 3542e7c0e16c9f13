import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dbel.dbel import log_ts_for_direction
from dbel.directions import (
    Construction,
    Direction,
    axis,
    candidates_multistart,
    candidates_p2,
    candidates_recursive,
    projected_evaluations,
)
from dbel.errors import BudgetExceededError, DimensionMismatchError, ParameterError
from dbel.samples import MultivariateSample as S
from dbel.teststat import compute_ts


def pair(seed, n, m, p=2):
    rng = np.random.default_rng(seed)
    return S(rng.normal(size=(n, p))), S(rng.normal(size=(m, p)))


class TestDirection:
    def test_validation(self):
        with pytest.raises(ParameterError):
            Direction((0.0, 0.0))
        with pytest.raises(ParameterError):
            Direction((1.0, math.nan))

    def test_negative_zero_normalised(self):
        assert Direction((1.0, -0.0)) == Direction((1.0, 0.0))
        assert hash(Direction((1.0, -0.0))) == hash(Direction((1.0, 0.0)))

    def test_lexicographic_order(self):
        assert sorted([Direction((1, 2)), Direction((0, 1)), Direction((1, -3))]) == [
            Direction((0, 1)), Direction((1, -3)), Direction((1, 2))]

    def test_axis(self):
        assert axis(3, 1).coords == (0.0, 1.0, 0.0)


class TestCandidatesP2:
    def test_single_pair(self):
        cs = candidates_p2(S(np.array([[0.0, 0.0]])), S(np.array([[1.0, 1.0]])))
        assert set(d.coords for d in cs) == {(1.0, -1.0), (0.0, 1.0), (1.0, 0.0)}
        assert cs.exact and cs.construction is Construction.P2_EXACT

    def test_zero_denominator_dropped(self):
        cs = candidates_p2(S(np.array([[0.0, 0.0]])), S(np.array([[1.0, 0.0]])))
        assert set(d.coords for d in cs) == {(0.0, 1.0), (1.0, 0.0)}

    def test_count_generic(self):
        x, y = pair(0, 10, 10)
        assert len(candidates_p2(x, y)) == 20 * 19 // 2 + 2

    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_bound_and_normal_form(self, n, m, seed):
        x, y = pair(seed, n, m)
        cs = candidates_p2(x, y)
        N = n + m
        assert len(cs) <= N * (N - 1) // 2 + 2
        for d in cs:
            lead = next(c for c in d.coords if c != 0.0)
            assert lead == 1.0
        assert list(cs.directions) == sorted(cs.directions)

    def test_dim(self):
        x, y = pair(0, 4, 4, p=3)
        with pytest.raises(DimensionMismatchError):
            candidates_p2(x, y)


class TestCandidatesRecursive:
    @pytest.mark.parametrize("seed", range(20))
    def test_p2_equals_closed_form(self, seed):
        rng = np.random.default_rng(seed)
        x, y = pair(seed, int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        assert candidates_recursive(x, y).directions == candidates_p2(x, y).directions

    def test_budget_error_reports_counts(self):
        x, y = pair(0, 30, 30, p=3)
        with pytest.raises(BudgetExceededError) as err:
            candidates_recursive(x, y, max_evals=10**6)
        tau2 = 60 * 59 // 2
        assert err.value.required >= tau2 * (tau2 - 1) // 2
        assert err.value.allowed == 10**6

    def test_projected_counts(self):
        assert projected_evaluations(20, 2) == 1 + 190
        tau1 = 6 * 5 // 2
        assert projected_evaluations(6, 3) == 1 + tau1 * (tau1 * (tau1 - 1) // 2) + tau1

    def test_includes_last_axis(self):
        x, y = pair(3, 3, 3, p=3)
        cs = candidates_recursive(x, y, include_axes=False)
        assert axis(3, 2) in cs.directions
        assert cs.exact

    def test_label_swap_keeps_value_set(self):
        x, y = pair(11, 3, 3)
        values = lambda a, b: {round(log_ts_for_direction(a, b, d), 9) for d in candidates_p2(a, b)}
        assert values(x, y) == values(y, x)


class TestMultistart:
    @pytest.mark.parametrize("seed", range(6))
    def test_p2_dominated_by_exact(self, seed):
        x, y = pair(seed, 7, 8)
        cs = candidates_multistart(x, y, seed=seed)
        best = max(log_ts_for_direction(x, y, d) for d in cs)
        assert best <= compute_ts(x, y).log_ts + 1e-12
        assert not cs.exact and cs.construction is Construction.MULTISTART_APPROX

    def test_p3_at_least_axes(self):
        x, y = pair(5, 5, 5, p=3)
        cs = candidates_multistart(x, y, n_starts=8, seed=1)
        axes = [axis(3, s) for s in range(3)]
        assert all(a in cs.directions for a in axes)
        best = max(log_ts_for_direction(x, y, d) for d in cs)
        assert best >= max(log_ts_for_direction(x, y, a) for a in axes)

    def test_deterministic(self):
        x, y = pair(2, 6, 6, p=3)
        assert candidates_multistart(x, y, seed=9).directions == candidates_multistart(x, y, seed=9).directions

    def test_invalid_starts(self):
        x, y = pair(2, 6, 6, p=3)
        with pytest.raises(ParameterError):
            candidates_multistart(x, y, n_starts=0)
