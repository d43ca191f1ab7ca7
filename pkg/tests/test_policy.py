import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csucb.oracles import topk_oracle
from csucb.policy import ArmState, PolicyState, as_super_arm, step, ucb_index, update
from csucb.rewards import TopKParams, topk_reward


def state_with(pulls, sums, t):
    return PolicyState(np.array(pulls, dtype=np.int64), np.array(sums, dtype=float), t)


class TestUcbIndex:
    def test_bonus_vanishes_at_round_one(self):
        assert ucb_index(ArmState(6, 3.0), 1) == 0.5

    @pytest.mark.parametrize(
        "pulls, total, t, expected",
        [
            # frozen from 30-digit mpmath evaluation of mean + sqrt(3 ln t / (2 n))
            (3, 0.6, 8, 1.21966699016880896776767859995),
            (1, 0.0, 2, 1.01966699016880896776767859995),
        ],
    )
    def test_closed_form(self, pulls, total, t, expected):
        assert ucb_index(ArmState(pulls, total), t) == pytest.approx(expected, rel=1e-12)

    def test_rejects_unpulled_arm(self):
        with pytest.raises(ValueError):
            ucb_index(ArmState(0, 0.0), 5)

    def test_vectorized_matches_scalar(self):
        s = state_with([1, 4, 9, 2], [0.0, 3.0, 4.0, 2.0], 17)
        vec = s.ucb_indices()
        for i in range(4):
            assert vec[i] == pytest.approx(ucb_index(s.arm(i), 17), rel=1e-14)

    def test_unpulled_arms_are_infinite_in_vector(self):
        s = state_with([0, 3], [0.0, 1.0], 4)
        assert math.isinf(s.ucb_indices()[0])

    @given(
        mean=st.floats(0, 1),
        n=st.integers(1, 10_000),
        t=st.integers(2, 10**7),
    )
    def test_bonus_monotone(self, mean, n, t):
        arm, more = ArmState(n, mean * n), ArmState(n + 1, mean * (n + 1))
        assert ucb_index(more, t) < ucb_index(arm, t)
        assert ucb_index(arm, t + 1) > ucb_index(arm, t)


class TestStep:
    oracle = staticmethod(lambda A, w: topk_oracle(A, w, 1))

    def test_cold_start_pulls_everything_available(self):
        s = PolicyState.initial(4)
        assert step(s, {0, 2}, self.oracle) == (0, 2)

    def test_singleton(self):
        s = state_with([1, 1, 1, 1], [0, 0, 0, 0], 3)
        assert step(s, {3}, self.oracle) == (3,)

    def test_oracle_on_ucb_indices(self):
        # indices (1.2, 0.9) at round 1 (zero bonus)
        s = state_with([5, 10], [6.0, 9.0], 1)
        model = topk_reward(TopKParams(1, 2))
        assert step(s, {0, 1}, self.oracle, model) == (0,)

    def test_zero_pull_arm_never_reaches_oracle(self):
        def boom(A, w):
            raise AssertionError("oracle must not be called")

        s = state_with([3, 0, 2], [1.0, 0.0, 1.0], 9)
        assert step(s, [0, 1, 2], boom) == (0, 1, 2)

    def test_empty_availability_rejected(self):
        with pytest.raises(ValueError):
            step(PolicyState.initial(2), set(), self.oracle)

    def test_pure(self):
        s = state_with([2, 2, 2], [1.0, 2.0, 0.0], 6)
        before = (s.pulls.copy(), s.sums.copy(), s.round)
        step(s, {0, 1, 2}, self.oracle)
        assert np.array_equal(s.pulls, before[0]) and np.array_equal(s.sums, before[1]) and s.round == before[2]


class TestUpdate:
    def test_first_pull(self):
        s = update(PolicyState.initial(2), (0,), {0: 1})
        assert s.arm(0) == ArmState(1, 1.0)
        assert s.arm(0).empirical_mean == 1.0
        assert s.round == 2

    def test_untouched_arm(self):
        s = state_with([0, 4], [0.0, 2.0], 5)
        s2 = update(s, (0,), {0: 0})
        assert s2.arm(1) == ArmState(4, 2.0)

    def test_running_mean(self):
        s = state_with([9], [3.0], 10)
        assert update(s, (0,), {0: 1}).arm(0).empirical_mean == pytest.approx(0.4)

    @pytest.mark.parametrize("fb", [{}, {0: 1, 1: 0}, {0: 1.5}, {0: -0.1}])
    def test_bad_feedback(self, fb):
        with pytest.raises(ValueError):
            update(PolicyState.initial(3), (0,), fb)

    def test_does_not_mutate_input(self):
        s = PolicyState.initial(3)
        update(s, (0, 1), {0: 1, 1: 0})
        assert s.pulls.sum() == 0 and s.round == 1

    @settings(max_examples=200)
    @given(st.data())
    def test_conservation(self, data):
        k = data.draw(st.integers(1, 8))
        S = data.draw(st.sets(st.integers(0, k - 1), min_size=1))
        fb = {i: data.draw(st.sampled_from([0, 1])) for i in S}
        s = PolicyState.initial(k)
        s2 = update(s, S, fb)
        assert int(s2.pulls.sum() - s.pulls.sum()) == len(S)
        assert all(0 <= a.feedback_sum <= a.pulls for a in s2.arms)


def test_super_arm_validation():
    assert as_super_arm([2, 0], 3) == (0, 2)
    for bad in ([], [1, 1], [3], [-1]):
        with pytest.raises(ValueError):
            as_super_arm(bad, 3)
