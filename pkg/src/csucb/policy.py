"""CS-UCB: UCB selection of super-arms under sleeping (volatile) availability.

The policy is split into two pure functions over a :class:`PolicyState`:
``step`` picks the super-arm for the current round and ``update`` folds in
the semi-bandit feedback and advances the round counter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from .rewards import RewardModel

SuperArm = tuple


def as_super_arm(members: Iterable[int], k: int) -> SuperArm:
    """Validate and normalize a super-arm to a sorted tuple of indices."""
    members = list(members)
    S = tuple(sorted(set(int(i) for i in members)))
    if not S:
        raise ValueError("a super-arm must be nonempty")
    if len(S) != len(members):
        raise ValueError(f"duplicate arm indices in {members}")
    if S[0] < 0 or S[-1] >= k:
        raise ValueError(f"arm index out of range [0, {k}) in {members}")
    return S


@dataclass(frozen=True)
class ArmState:
    pulls: int = 0
    feedback_sum: float = 0.0

    def __post_init__(self):
        if self.pulls < 0:
            raise ValueError("pulls must be nonnegative")

    @property
    def empirical_mean(self) -> float:
        if self.pulls == 0:
            raise ValueError("empirical mean undefined for a never-pulled arm")
        return self.feedback_sum / self.pulls


@dataclass(frozen=True, eq=False)
class PolicyState:
    """Pull counts and feedback sums for all ``k`` arms, plus the round ``t``.

    Arrays are treated as read-only; ``update`` returns a fresh state.
    """

    pulls: np.ndarray
    sums: np.ndarray
    round: int = 1

    @classmethod
    def initial(cls, k: int) -> "PolicyState":
        if k < 1:
            raise ValueError("k must be positive")
        return cls(np.zeros(k, dtype=np.int64), np.zeros(k, dtype=float), 1)

    @property
    def k(self) -> int:
        return len(self.pulls)

    @property
    def arms(self) -> list:
        return [ArmState(int(n), float(s)) for n, s in zip(self.pulls, self.sums)]

    def arm(self, i: int) -> ArmState:
        return ArmState(int(self.pulls[i]), float(self.sums[i]))

    def ucb_indices(self) -> np.ndarray:
        """UCB index of every arm; never-pulled arms get +inf."""
        n = np.maximum(self.pulls, 1)
        out = self.sums / n + np.sqrt((1.5 * math.log(self.round)) / n)
        if self.pulls.min() == 0:
            out[self.pulls == 0] = np.inf
        return out

    def __eq__(self, other):
        if not isinstance(other, PolicyState):
            return NotImplemented
        return (
            self.round == other.round
            and np.array_equal(self.pulls, other.pulls)
            and np.array_equal(self.sums, other.sums)
        )


def ucb_index(arm: ArmState, t: int) -> float:
    if arm.pulls <= 0:
        raise ValueError("UCB index undefined for a never-pulled arm")
    if t < 1:
        raise ValueError("round t must be >= 1")
    return arm.empirical_mean + math.sqrt(3.0 * math.log(t) / (2.0 * arm.pulls))


def step(state: PolicyState, available, oracle, model: Optional[RewardModel] = None) -> SuperArm:
    """Choose the super-arm to pull this round.

    Any never-pulled available arm sends the whole availability set back
    (cold start, possibly infeasible under ``model``); a singleton is
    returned as-is; otherwise the oracle maximizes over UCB indices.
    """
    avail = sorted(set(int(i) for i in available))
    if not avail:
        raise ValueError("step needs a nonempty availability set; skip empty rounds")
    if avail[0] < 0 or avail[-1] >= state.k:
        raise ValueError(f"available arm out of range [0, {state.k})")
    pulls = state.pulls
    if any(pulls[i] == 0 for i in avail):
        return tuple(avail)
    if len(avail) == 1:
        return tuple(avail)
    return tuple(oracle(avail, state.ucb_indices()))


def update(state: PolicyState, pulled, feedback: Mapping[int, float]) -> PolicyState:
    S = as_super_arm(pulled, state.k)
    if set(feedback) != set(S):
        raise ValueError(f"feedback keys {sorted(feedback)} do not match pulled arms {list(S)}")
    pulls = state.pulls.copy()
    sums = state.sums.copy()
    for i in S:
        x = float(feedback[i])
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"feedback for arm {i} outside [0, 1]: {x}")
        pulls[i] += 1
        sums[i] += x
    return PolicyState(pulls, sums, state.round + 1)
