import numpy as np
import pytest

from conftest import ref_gaps
from csucb.analysis import instance_gaps
from csucb.environment import (
    InstanceConfig,
    RewardSpec,
    RunEnvironment,
    ScriptError,
    draw_availability,
    draw_feedback,
    load_availability_script,
    sample_exp_one,
    sample_exp_two,
)

TOPK1 = RewardSpec("topk", K=1)


class TestExpOne:
    @pytest.mark.parametrize("seed", range(5))
    def test_ranges(self, seed):
        cfg = sample_exp_one(10, seed)
        assert all(0.3 <= m <= 0.8 for m in cfg.mu)
        assert all(0.4 <= p <= 0.9 for p in cfg.avail_p)

    def test_seeded(self):
        assert sample_exp_one(6, 3) == sample_exp_one(6, 3)
        assert sample_exp_one(6, 3).mu != sample_exp_one(6, 4).mu

    def test_needs_two_arms(self):
        with pytest.raises(ValueError):
            sample_exp_one(1, 0)


class TestExpTwo:
    def test_two_arm_gap(self):
        cfg = sample_exp_two(2, 0.1, 0, TOPK1)
        g = instance_gaps(cfg.mu, cfg.model())
        assert g.delta_min == pytest.approx(0.1, rel=0.1)
        assert abs(cfg.mu[0] - cfg.mu[1]) == pytest.approx(g.delta_min)
        assert g.sigma == 1.0

    def test_tiny_gap_regime(self):
        cfg = sample_exp_two(4, 0.001, 1, RewardSpec("topk", K=2))
        g = instance_gaps(cfg.mu, cfg.model())
        assert g.delta_min == pytest.approx(0.001, rel=0.1)

    def test_sigma_pinned(self):
        cfg = sample_exp_two(6, 0.02, 2, TOPK1, sigma_target=1.0)
        g = instance_gaps(cfg.mu, cfg.model())
        assert g.delta_min == pytest.approx(0.02, rel=0.1)
        assert g.sigma == pytest.approx(1.0, rel=0.1)

    def test_gap_checked_by_independent_enumeration(self):
        cfg = sample_exp_two(5, 0.03, 3, RewardSpec("topk", K=2))
        mu = cfg.mu
        dmin, dmax = ref_gaps(5, lambda S: sum(mu[i] for i in S), lambda S: len(S) <= 2)
        g = instance_gaps(mu, cfg.model())
        assert g.delta_min == pytest.approx(dmin, abs=1e-12)
        assert g.delta_max == pytest.approx(dmax, abs=1e-12)

    def test_unreachable_target_reports(self):
        # two arms, K=1: sigma is always exactly 1
        with pytest.raises(ValueError, match="could not reach"):
            sample_exp_two(2, 0.1, 0, TOPK1, sigma_target=3.0)


class TestDraws:
    def cfg(self, p, mu=None):
        k = len(p)
        return InstanceConfig(k=k, mu=mu or (0.5,) * k, avail_p=p, reward=TOPK1, horizon=10)

    def test_always_available(self, rng):
        cfg = self.cfg((1.0, 1.0, 1.0))
        assert all(draw_availability(cfg, t, rng) == (0, 1, 2) for t in range(1, 50))

    def test_zero_probability_rejected(self):
        with pytest.raises(ValueError):
            self.cfg((0.0, 0.5))

    def test_bernoulli_availability(self, rng):
        cfg = self.cfg((0.5, 0.5))
        present = sum(0 in draw_availability(cfg, t, rng) for t in range(1, 10_001))
        assert abs(present - 5000) <= 150

    def test_feedback(self, rng):
        mu = np.array([1.0, 0.0, 0.7])
        for _ in range(100):
            fb = draw_feedback((0, 1), mu, rng)
            assert fb == {0: 1, 1: 0}
        mean = np.mean([draw_feedback((2,), mu, rng)[2] for _ in range(10_000)])
        assert abs(mean - 0.7) <= 0.015


class TestScript:
    def test_parse(self, tmp_path):
        p = tmp_path / "a.txt"
        p.write_text("0 2\n\n1\n")
        assert load_availability_script(p, 3) == ((0, 2), (), (1,))

    def test_out_of_range(self, tmp_path):
        p = tmp_path / "a.txt"
        p.write_text("0\n7\n")
        with pytest.raises(ScriptError, match=":2:"):
            load_availability_script(p, 3)

    def test_garbage(self, tmp_path):
        p = tmp_path / "a.txt"
        p.write_text("0 x\n")
        with pytest.raises(ScriptError, match=":1:"):
            load_availability_script(p, 3)

    def test_replay_cycles(self):
        cfg = InstanceConfig(k=3, mu=(0.5,) * 3, availability_script=((0, 2), ()), reward=TOPK1)
        env = RunEnvironment(cfg, 0)
        assert [env.availability(t) for t in range(1, 5)] == [(0, 2), (), (0, 2), ()]


class TestStreams:
    cfg = sample_exp_one(5, 0, horizon=100)

    def trace(self, run):
        env = RunEnvironment(self.cfg, run)
        return [(env.availability(t), env.feedback(range(5), t)) for t in range(1, 101)]

    def test_same_seed_same_trace(self):
        assert self.trace(0) == self.trace(0)

    def test_runs_differ(self):
        assert self.trace(0) != self.trace(1)

    def test_other_runs_do_not_perturb(self):
        first = self.trace(0)
        self.trace(1)
        self.trace(2)
        assert self.trace(0) == first
