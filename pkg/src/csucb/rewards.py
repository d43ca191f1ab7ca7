"""Reward models for combinatorial super-arms.

A reward model maps a super-arm ``S`` and a quality vector ``mu`` to the
scalar reward ``R_S(mu)``, decides which super-arms are feasible within an
availability set, and declares its smoothness (a Lipschitz constant and/or
a strictly increasing bound function with its inverse).

Two shipped models:

* :func:`util_reward` -- ``sum_{i in S} a_i * mu_i - b_i``, any nonempty subset.
* :func:`topk_reward` -- ``sum_{i in S} mu_i`` with ``1 <= |S| <= K``.

The ``check_*`` functions are randomized property checkers; each returns a
list of violations, empty meaning the property held on every trial.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

TOL = 1e-12

Evaluate = Callable[[Sequence[int], np.ndarray], float]
Feasible = Callable[[Sequence[int], Sequence[int]], bool]


@dataclass(frozen=True)
class UtilParams:
    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        if len(a) != len(b) or not a:
            raise ValueError("UtilParams: a and b must be nonempty and of equal length")
        if any(x <= 0 for x in a):
            raise ValueError("UtilParams: every gain a_i must be positive")
        if any(x < 0 for x in b):
            raise ValueError("UtilParams: every cost b_i must be nonnegative")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def k(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class TopKParams:
    K: int
    k: int

    def __post_init__(self):
        if not 1 <= self.K <= self.k:
            raise ValueError(f"TopKParams: need 1 <= K <= k, got K={self.K}, k={self.k}")


@dataclass(frozen=True, eq=False)
class RewardModel:
    """Reward evaluator, feasibility predicate and smoothness descriptor.

    ``evaluate(S, mu)`` must only read ``mu[i]`` for ``i in S``.
    ``feasible(S, A)`` answers whether ``S`` may be pulled when ``A`` is
    available. ``sample_feasible(A, rng)``, when given, draws a uniformly
    random feasible super-arm; otherwise feasible subsets are enumerated.
    """

    k: int
    evaluate: Evaluate
    feasible: Feasible
    lipschitz_C: Optional[float] = None
    smoothness_f: Optional[Callable[[float], float]] = None
    smoothness_f_inv: Optional[Callable[[float], float]] = None
    params: object = None
    name: str = "custom"
    sample_feasible_fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("RewardModel: k must be positive")
        if self.lipschitz_C is not None and self.lipschitz_C < 1:
            raise ValueError(f"RewardModel: Lipschitz constant must be >= 1, got {self.lipschitz_C}")
        if (self.smoothness_f is None) != (self.smoothness_f_inv is None):
            raise ValueError("RewardModel: smoothness_f and its inverse must be given together")

    def feasible_subsets(self, available: Sequence[int]):
        """All feasible super-arms within ``available``, smallest first."""
        avail = sorted(available)
        for size in range(1, len(avail) + 1):
            for S in itertools.combinations(avail, size):
                if self.feasible(S, avail):
                    yield S

    def sample_feasible(self, available: Sequence[int], rng: np.random.Generator) -> tuple:
        if self.sample_feasible_fn is not None:
            return self.sample_feasible_fn(available, rng)
        options = list(self.feasible_subsets(available))
        if not options:
            raise ValueError(f"no feasible super-arm within {sorted(available)}")
        return options[int(rng.integers(len(options)))]


def _subset_of(S, A) -> bool:
    return len(S) > 0 and set(S) <= set(A)


def util_reward(params: UtilParams) -> RewardModel:
    a, b = params.a, params.b
    C = max(1.0, float(sum(a)))

    def evaluate(S, mu):
        return float(sum(a[i] * mu[i] - b[i] for i in S))

    def sample(available, rng):
        avail = sorted(available)
        while True:
            mask = rng.random(len(avail)) < 0.5
            if mask.any():
                return tuple(i for i, m in zip(avail, mask) if m)

    return RewardModel(
        k=params.k,
        evaluate=evaluate,
        feasible=_subset_of,
        lipschitz_C=C,
        smoothness_f=lambda x: C * x,
        smoothness_f_inv=lambda y: y / C,
        params=params,
        name="util",
        sample_feasible_fn=sample,
    )


def topk_reward(params: TopKParams) -> RewardModel:
    K = params.K

    def evaluate(S, mu):
        return float(sum(mu[i] for i in S))

    def feasible(S, A):
        return 1 <= len(S) <= K and set(S) <= set(A)

    def sample(available, rng):
        avail = sorted(available)
        n = len(avail)
        sizes = np.arange(1, min(K, n) + 1)
        weights = np.array([math.comb(n, s) for s in sizes], dtype=float)
        size = int(rng.choice(sizes, p=weights / weights.sum()))
        picked = rng.choice(n, size=size, replace=False)
        return tuple(sorted(avail[j] for j in picked))

    return RewardModel(
        k=params.k,
        evaluate=evaluate,
        feasible=feasible,
        lipschitz_C=float(K),
        smoothness_f=lambda x: K * x,
        smoothness_f_inv=lambda y: y / K,
        params=params,
        name="topk",
        sample_feasible_fn=sample,
    )


@dataclass(frozen=True)
class Violation:
    S: tuple
    mu: np.ndarray
    mu_prime: np.ndarray
    lhs: float
    rhs: float


def _perturbed_pair(model: RewardModel, rng: np.random.Generator, nonnegative: bool):
    """Random (S, mu, mu') with S feasible in [k].

    Half of the draws shift every coordinate by the same amount, which is
    the extremal case for additive rewards.
    """
    k = model.k
    mu = rng.random(k)
    scale = rng.random()
    if rng.random() < 0.5:
        delta = np.full(k, scale * rng.random())
    else:
        delta = scale * rng.random(k)
    if not nonnegative and rng.random() < 0.5:
        delta = delta * rng.choice([-1.0, 1.0], size=k)
    mu_prime = np.clip(mu + delta, 0.0, 1.0)
    S = model.sample_feasible(range(k), rng)
    return S, mu, mu_prime


def check_monotonicity(model: RewardModel, trials: int, rng_seed=None) -> list:
    if trials <= 0:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(rng_seed)
    report = []
    for _ in range(trials):
        S, mu, mu_prime = _perturbed_pair(model, rng, nonnegative=True)
        lo, hi = model.evaluate(S, mu), model.evaluate(S, mu_prime)
        if hi < lo - TOL:
            report.append(Violation(S, mu, mu_prime, hi, lo))
    return report


def check_lipschitz(model: RewardModel, trials: int, rng_seed=None, C: Optional[float] = None) -> list:
    """Check ``|R_S(mu) - R_S(mu')| <= C * max_{i in S} |mu_i - mu'_i|``.

    ``C`` defaults to the model's declared constant; passing a different
    value tests a candidate constant against the same model.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if C is None:
        C = model.lipschitz_C
    if C is None:
        raise ValueError(f"model {model.name!r} declares no Lipschitz constant")
    rng = np.random.default_rng(rng_seed)
    report = []
    for _ in range(trials):
        S, mu, mu_prime = _perturbed_pair(model, rng, nonnegative=False)
        lhs = abs(model.evaluate(S, mu) - model.evaluate(S, mu_prime))
        idx = list(S)
        rhs = C * float(np.max(np.abs(mu[idx] - mu_prime[idx])))
        if lhs > rhs + TOL:
            report.append(Violation(S, mu, mu_prime, lhs, rhs))
    return report


def check_bounded_smoothness(model: RewardModel, trials: int, rng_seed=None, f=None) -> list:
    if trials <= 0:
        raise ValueError("trials must be positive")
    if f is None:
        f = model.smoothness_f
    if f is None:
        raise ValueError(f"model {model.name!r} declares no smoothness function")
    rng = np.random.default_rng(rng_seed)
    report = []
    for _ in range(trials):
        S, mu, mu_prime = _perturbed_pair(model, rng, nonnegative=False)
        lhs = abs(model.evaluate(S, mu) - model.evaluate(S, mu_prime))
        idx = list(S)
        rhs = f(float(np.max(np.abs(mu[idx] - mu_prime[idx]))))
        if lhs > rhs + TOL:
            report.append(Violation(S, mu, mu_prime, lhs, rhs))
    return report
