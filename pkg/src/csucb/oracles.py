"""Maximization oracles over availability sets.

An oracle is any callable ``oracle(available, weights) -> SuperArm``. The
exact oracles here are deterministic; :func:`degrade` wraps one into a
randomized (gamma, beta)-oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .rewards import RewardModel, TopKParams, UtilParams

MAX_BRUTE_FORCE = 20

Oracle = Callable[[Sequence[int], np.ndarray], tuple]


class BudgetExceeded(ValueError):
    """An enumeration would exceed its size cap."""


@dataclass(frozen=True)
class OracleSpec:
    gamma: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("gamma", "beta"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"OracleSpec.{name} must lie in (0, 1], got {v}")


def _check_available(available) -> list:
    avail = sorted(set(int(i) for i in available))
    if not avail:
        raise ValueError("oracle called with an empty availability set")
    return avail


def brute_force_oracle(available, weights, model: RewardModel) -> tuple:
    """Exact maximizer by enumerating every feasible subset of ``available``.

    Ties go to the smaller super-arm, then to the lexicographically
    smallest member list (the enumeration order).
    """
    avail = _check_available(available)
    if len(avail) > MAX_BRUTE_FORCE:
        raise BudgetExceeded(
            f"brute-force oracle limited to {MAX_BRUTE_FORCE} available arms, got {len(avail)}"
        )
    weights = np.asarray(weights, dtype=float)
    best, best_val = None, -np.inf
    for size in range(1, len(avail) + 1):
        for S in itertools.combinations(avail, size):
            if not model.feasible(S, avail):
                continue
            val = model.evaluate(S, weights)
            if val > best_val:
                best, best_val = S, val
    if best is None:
        raise ValueError(f"no feasible super-arm within {avail}")
    return best


def topk_oracle(available, weights, K: int) -> tuple:
    avail = _check_available(available)
    ranked = sorted(avail, key=lambda i: (-weights[i], i))
    return tuple(sorted(ranked[:K]))


def util_oracle(available, weights, params: UtilParams) -> tuple:
    avail = _check_available(available)
    a, b = params.a, params.b
    utils = [(a[i] * weights[i] - b[i], i) for i in avail]
    chosen = tuple(i for u, i in utils if u > 0)
    if chosen:
        return chosen
    # nonempty pull required: least-bad singleton, lowest index on ties
    return (max(utils, key=lambda ui: (ui[0], -ui[1]))[1],)


def exact_oracle(model: RewardModel) -> Oracle:
    """Fast exact oracle for a shipped model, brute force otherwise."""
    if isinstance(model.params, TopKParams):
        K = model.params.K
        return lambda available, weights: topk_oracle(available, weights, K)
    if isinstance(model.params, UtilParams):
        params = model.params
        return lambda available, weights: util_oracle(available, weights, params)
    return lambda available, weights: brute_force_oracle(available, weights, model)


class DegradedOracle:
    """Returns the inner oracle's answer with probability ``beta``.

    Otherwise a uniformly random feasible super-arm is returned. The
    wrapper owns its generator, so its outputs depend only on the seed and
    the call index.
    """

    def __init__(self, inner: Oracle, spec: OracleSpec, model: RewardModel, rng: np.random.Generator):
        self.inner = inner
        self.spec = spec
        self.model = model
        self.rng = rng
        self.calls = 0
        self.inner_hits = 0

    def __call__(self, available, weights) -> tuple:
        self.calls += 1
        if self.spec.beta >= 1.0 or self.rng.random() < self.spec.beta:
            self.inner_hits += 1
            return self.inner(available, weights)
        return tuple(self.model.sample_feasible(sorted(available), self.rng))


def degrade(oracle: Oracle, spec: OracleSpec, rng, model: RewardModel) -> DegradedOracle:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return DegradedOracle(oracle, spec, model, rng)
