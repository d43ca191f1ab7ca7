"""Ground-truth instances, availability processes and Bernoulli feedback.

Seeding rule: run ``r`` of an experiment with master seed ``s`` draws from
``numpy.random.SeedSequence([s, r])`` (whose entropy pool hashes both words
with a 32-bit multiply-xorshift mixer), spawned into three independent
children: availability, feedback and oracle. Adding runs therefore never
changes the streams of earlier runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .rewards import RewardModel, TopKParams, UtilParams, topk_reward, util_reward

EXP_ONE_MU = (0.3, 0.8)
EXP_ONE_AVAIL = (0.4, 0.9)
EXP_TWO_CENTER = 0.55
EXP_TWO_BUDGET = 10_000
CHUNK = 1 << 15


class ScriptError(ValueError):
    pass


@dataclass(frozen=True)
class RewardSpec:
    """Tagged reward parameters: ``kind`` is ``"topk"`` or ``"util"``."""

    kind: str
    K: Optional[int] = None
    a: Optional[tuple] = None
    b: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("topk", "util"):
            raise ValueError(f"unknown reward kind {self.kind!r}")
        if self.kind == "topk" and (self.K is None or self.K < 1):
            raise ValueError("topk reward needs K >= 1")
        if self.kind == "util" and (self.a is None or self.b is None):
            raise ValueError("util reward needs gains a and costs b")

    def build(self, k: int) -> RewardModel:
        if self.kind == "topk":
            return topk_reward(TopKParams(self.K, k))
        params = UtilParams(self.a, self.b)
        if params.k != k:
            raise ValueError(f"util parameters have length {params.k}, expected k={k}")
        return util_reward(params)

    def to_dict(self) -> dict:
        if self.kind == "topk":
            return {"type": "topk", "K": self.K}
        return {"type": "util", "a": list(self.a), "b": list(self.b)}

    @classmethod
    def from_dict(cls, d: dict) -> "RewardSpec":
        kind = d.get("type")
        if kind == "topk":
            return cls("topk", K=int(d["K"]))
        if kind == "util":
            return cls("util", a=tuple(d["a"]), b=tuple(d["b"]))
        raise ValueError(f"reward.type must be 'topk' or 'util', got {kind!r}")


@dataclass(frozen=True)
class InstanceConfig:
    k: int
    mu: tuple
    reward: RewardSpec
    avail_p: Optional[tuple] = None
    availability_script: Optional[tuple] = None
    horizon: int = 100_000
    gamma: float = 1.0
    beta: float = 1.0
    runs: int = 20
    master_seed: int = 0

    def __post_init__(self):
        mu = tuple(float(x) for x in self.mu)
        object.__setattr__(self, "mu", mu)
        if self.k < 1 or len(mu) != self.k:
            raise ValueError(f"mu must have k={self.k} entries")
        if any(not 0.0 <= x <= 1.0 for x in mu):
            raise ValueError("every mu_i must lie in [0, 1]")
        if (self.avail_p is None) == (self.availability_script is None):
            raise ValueError("give exactly one of avail_p or availability_script")
        if self.avail_p is not None:
            p = tuple(float(x) for x in self.avail_p)
            object.__setattr__(self, "avail_p", p)
            if len(p) != self.k or any(not 0.0 < x <= 1.0 for x in p):
                raise ValueError("avail_p needs k probabilities in (0, 1]")
        if self.availability_script is not None and not self.availability_script:
            raise ValueError("availability script is empty")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        for name in ("gamma", "beta"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    def model(self) -> RewardModel:
        return self.reward.build(self.k)


def run_streams(master_seed: int, run_index: int) -> tuple:
    """(availability, feedback, oracle) generators for one replicate run."""
    children = np.random.SeedSequence([master_seed, run_index]).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


def sample_exp_one(k: int, rng, reward: Optional[RewardSpec] = None, **overrides) -> InstanceConfig:
    """Qualities iid Uniform[0.3, 0.8], availabilities iid Uniform[0.4, 0.9]."""
    if k < 2:
        raise ValueError("ExpOne needs k >= 2")
    rng = np.random.default_rng(rng)
    mu = rng.uniform(*EXP_ONE_MU, size=k)
    p = rng.uniform(*EXP_ONE_AVAIL, size=k)
    if reward is None:
        reward = RewardSpec("topk", K=min(3, k))
    return InstanceConfig(k=k, mu=tuple(mu), avail_p=tuple(p), reward=reward, **overrides)


def default_util_spec(k: int, rng) -> RewardSpec:
    """Unit gains and costs iid Uniform[0.3, 0.8], so utilities straddle zero."""
    rng = np.random.default_rng(rng)
    return RewardSpec("util", a=(1.0,) * k, b=tuple(rng.uniform(*EXP_ONE_MU, size=k)))


def _exp_two_shapes(k, sigma_target, rng):
    even = np.linspace(0.0, 1.0, k)
    one_high = np.zeros(k)
    one_high[0] = 1.0
    half = (np.arange(k) < k // 2).astype(float)
    structured = [one_high, half, even] if sigma_target is not None else [even, one_high, half]
    for z in structured:
        yield z, EXP_TWO_CENTER
    while True:
        yield rng.random(k), rng.uniform(*EXP_ONE_MU)


def sample_exp_two(k: int, delta_min_target: float, rng, reward: Optional[RewardSpec] = None,
                   sigma_target: Optional[float] = None, **overrides) -> InstanceConfig:
    """Near-equal qualities tuned so the exact Δmin (and optionally σ) hit targets.

    Candidate quality vectors have the form ``center + d * (z - mid(z))`` for
    a shape ``z``; ``d`` is bisected until the enumerated Δmin is within 1%
    of the target. A candidate is accepted when Δmin is within 10% of the
    target and, if requested, σ within 10% of ``sigma_target``. Availability
    probabilities are drawn as in ExpOne.
    """
    from .analysis import instance_gaps

    if delta_min_target <= 0:
        raise ValueError("delta_min_target must be positive")
    if sigma_target is not None and sigma_target < 1:
        raise ValueError("sigma_target must be >= 1")
    rng = np.random.default_rng(rng)
    if reward is None:
        reward = RewardSpec("topk", K=min(3, k))
    model = reward.build(k)
    p = tuple(rng.uniform(*EXP_ONE_AVAIL, size=k))
    order = rng.permutation(k)

    evaluations = 0

    def gaps_for(mu):
        nonlocal evaluations
        evaluations += 1
        return instance_gaps(mu, model)

    def accept(g):
        if not g.defined or abs(g.delta_min / delta_min_target - 1) > 0.1:
            return False
        return sigma_target is None or abs(g.sigma / sigma_target - 1) <= 0.1

    best = None
    for z, center in _exp_two_shapes(k, sigma_target, rng):
        if evaluations >= EXP_TWO_BUDGET:
            break
        z = z[order]
        span = z.max() - z.min()
        if span == 0:
            continue
        z = (z - (z.max() + z.min()) / 2) / span
        d_hi = 2 * min(center, 1 - center)

        def mu_at(d):
            return np.clip(center + d * z, 0.0, 1.0)

        lo, hi = 0.0, d_hi
        for _ in range(40):
            if evaluations >= EXP_TWO_BUDGET:
                break
            d = 0.5 * (lo + hi)
            g = gaps_for(mu_at(d))
            if not g.defined or g.delta_min < delta_min_target:
                lo = d
            else:
                hi = d
            if g.defined:
                err = abs(g.delta_min / delta_min_target - 1)
                if best is None or err < best[0]:
                    best = (err, g)
                if accept(g) and err <= 0.01:
                    return InstanceConfig(k=k, mu=tuple(mu_at(d)), avail_p=p, reward=reward, **overrides)
        g = gaps_for(mu_at(hi))
        if accept(g):
            return InstanceConfig(k=k, mu=tuple(mu_at(hi)), avail_p=p, reward=reward, **overrides)
    detail = "no candidate had a defined gap" if best is None else (
        f"closest candidate: delta_min={best[1].delta_min:.4g}, sigma={best[1].sigma:.4g}")
    raise ValueError(
        f"could not reach delta_min={delta_min_target}"
        + (f", sigma={sigma_target}" if sigma_target is not None else "")
        + f" within {evaluations} candidate quality vectors ({detail})"
    )


def draw_availability(config: InstanceConfig, t: int, rng: np.random.Generator) -> tuple:
    """One round's availability set: independent Bernoulli(avail_p_i) per arm."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if config.availability_script is not None:
        script = config.availability_script
        return script[(t - 1) % len(script)]
    p = np.asarray(config.avail_p)
    return tuple(np.flatnonzero(rng.random(config.k) < p).tolist())


def draw_feedback(S, mu, rng: np.random.Generator) -> dict:
    S = tuple(S)
    if not S:
        raise ValueError("feedback requested for an empty super-arm")
    mu = np.asarray(mu, dtype=float)
    u = rng.random(len(S))
    return {i: int(x < mu[i]) for i, x in zip(S, u)}


def load_availability_script(path, k: int) -> tuple:
    """Parse a script: one round per line, whitespace-separated 0-based arm
    indices; a blank line is an empty round."""
    rounds = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        try:
            idx = [int(tok) for tok in line.split()]
        except ValueError:
            raise ScriptError(f"{path}:{lineno}: expected integers, got {line.strip()!r}") from None
        for i in idx:
            if not 0 <= i < k:
                raise ScriptError(f"{path}:{lineno}: arm index {i} out of range [0, {k})")
        if len(set(idx)) != len(idx):
            raise ScriptError(f"{path}:{lineno}: duplicate arm index")
        rounds.append(tuple(sorted(idx)))
    if not rounds:
        raise ScriptError(f"{path}: availability script has no rounds")
    return tuple(rounds)


class RunEnvironment:
    """Availability and feedback for one replicate run.

    Uniform variates are drawn in fixed-size chunks per stream, so the
    draws for round ``t`` depend only on the seed and ``t``. Feedback for
    arm ``i`` at round ``t`` is ``U[t, i] < mu_i`` whether or not the arm is
    pulled, which lets two policies be compared on the same stream.
    """

    def __init__(self, config: InstanceConfig, run_index: int, mu=None):
        self.config = config
        self.k = config.k
        self.mu = np.asarray(config.mu if mu is None else mu, dtype=float)
        self.avail_rng, self.feedback_rng, self.oracle_rng = run_streams(config.master_seed, run_index)
        self._p = None if config.avail_p is None else np.asarray(config.avail_p)
        self._powers = 1 << np.arange(self.k, dtype=np.int64)
        self._sets = [tuple(i for i in range(self.k) if m >> i & 1) for m in range(1 << self.k)] \
            if self.k <= 12 else None
        self._chunk_start = None
        self._avail_masks = None
        self._fb = None

    def _load_chunk(self, t):
        start = ((t - 1) // CHUNK) * CHUNK + 1
        if start == self._chunk_start:
            return
        if self._chunk_start is not None and start != self._chunk_start + CHUNK:
            raise ValueError("rounds must be visited in order")
        if self._p is not None:
            avail = self.avail_rng.random((CHUNK, self.k)) < self._p
            self._avail_masks = (avail.astype(np.int64) @ self._powers).tolist()
        self._fb = self.feedback_rng.random((CHUNK, self.k)) < self.mu
        self._chunk_start = start

    def availability(self, t: int) -> tuple:
        if self.config.availability_script is not None:
            script = self.config.availability_script
            self._load_chunk(t)
            return script[(t - 1) % len(script)]
        self._load_chunk(t)
        mask = self._avail_masks[t - self._chunk_start]
        if self._sets is not None:
            return self._sets[mask]
        return tuple(i for i in range(self.k) if mask >> i & 1)

    def feedback(self, S, t: int) -> dict:
        self._load_chunk(t)
        row = self._fb[t - self._chunk_start]
        return {i: int(row[i]) for i in S}
