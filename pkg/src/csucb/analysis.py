"""Sleeping-regret accounting, instance gaps and closed-form regret bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .oracles import BudgetExceeded, brute_force_oracle
from .rewards import RewardModel

ZETA3 = 1.2020569031595942854
MAX_GAP_ARMS = 15
# Δ_S at or below this is treated as zero when deciding whether S is bad
GAP_TOL = 1e-12


class RegretLedger:
    """Per-round optimal reward, realized reward and regret increment.

    Optimal rewards are computed by brute force on the true qualities and
    cached per availability set.
    """

    def __init__(self, model: RewardModel, mu, gamma: float = 1.0, beta: float = 1.0):
        self.model = model
        self.mu = np.asarray(mu, dtype=float)
        self.gamma = gamma
        self.beta = beta
        self.t: list = []
        self.opt: list = []
        self.realized: list = []
        self.increments: list = []
        self._opt_cache: dict = {}

    def optimal_reward(self, available: tuple) -> float:
        val = self._opt_cache.get(available)
        if val is None:
            S = brute_force_oracle(available, self.mu, self.model)
            val = self._opt_cache[available] = self.model.evaluate(S, self.mu)
        return val

    def record(self, available, pulled) -> float:
        return record_round(self, available, pulled)

    @property
    def cumulative(self) -> np.ndarray:
        """Cumulative regret after each recorded round; index 0 is round 1."""
        return np.cumsum(np.asarray(self.increments, dtype=float))

    def __len__(self):
        return len(self.increments)


def record_round(ledger: RegretLedger, available, pulled) -> float:
    """Append one round to ``ledger`` and return its regret increment.

    Empty and singleton availability rounds cost nothing. ``pulled`` must be
    feasible in ``available`` unless it is the whole availability set (the
    policy's cold-start pull).
    """
    avail = tuple(sorted(available))
    ledger.t.append(len(ledger.increments) + 1)
    if len(avail) <= 1:
        value = ledger.model.evaluate(avail, ledger.mu) if avail else 0.0
        ledger.opt.append(value)
        ledger.realized.append(value)
        ledger.increments.append(0.0)
        return 0.0
    S = tuple(sorted(pulled))
    if S != avail and not ledger.model.feasible(S, avail):
        ledger.t.pop()
        raise ValueError(f"pulled super-arm {list(S)} is infeasible within {list(avail)}")
    opt = ledger.optimal_reward(avail)
    realized = ledger.model.evaluate(S, ledger.mu)
    inc = ledger.gamma * ledger.beta * opt - realized
    ledger.opt.append(opt)
    ledger.realized.append(realized)
    ledger.increments.append(inc)
    return inc


@dataclass
class GapSummary:
    delta_min: Optional[float]
    delta_max: Optional[float]
    table: dict = field(default_factory=dict)
    exact: bool = True

    @property
    def defined(self) -> bool:
        return self.delta_min is not None

    @property
    def sigma(self) -> Optional[float]:
        if not self.defined:
            return None
        return self.delta_max / self.delta_min


def _submasks(A: int) -> np.ndarray:
    subs = np.zeros(1, dtype=np.int64)
    bit = 1
    while bit <= A:
        if A & bit:
            subs = np.concatenate([subs, subs | bit])
        bit <<= 1
    return subs[1:]


def _members(mask: int) -> tuple:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def instance_gaps(mu, model: RewardModel, availability_family="all_subsets", gamma: float = 1.0) -> GapSummary:
    """Exact Δmin, Δmax over availability sets.

    For every availability set ``A`` in the family, every feasible
    ``S ⊆ A`` is scored; ``S`` is bad when ``gamma * OPT_A - R_S > 0``.
    Feasibility of ``S`` inside ``A`` is taken to be ``S ⊆ A`` together with
    ``model.feasible(S, [k])``, which holds for the shipped models.
    """
    mu = np.asarray(mu, dtype=float)
    k = model.k
    if availability_family == "all_subsets":
        if k > MAX_GAP_ARMS:
            raise BudgetExceeded(
                f"all-subsets gap enumeration is capped at k={MAX_GAP_ARMS} arms (got k={k}); "
                "pass an explicit availability list instead"
            )
        masks = range(1, 1 << k)
    else:
        masks = []
        for A in availability_family:
            A = set(int(i) for i in A)
            if any(i < 0 or i >= k for i in A):
                raise ValueError(f"availability set {sorted(A)} out of range [0, {k})")
            if A:
                masks.append(sum(1 << i for i in A))
        masks = sorted(set(masks))
        if max((bin(m).count("1") for m in masks), default=0) > 20:
            raise BudgetExceeded("availability sets larger than 20 arms cannot be enumerated")

    full = tuple(range(k))
    values: dict = {}

    def value(mask):
        if mask not in values:
            S = _members(mask)
            values[mask] = model.evaluate(S, mu) if model.feasible(S, full) else np.nan
        return values[mask]

    table = {}
    dmin, dmax = math.inf, -math.inf
    for A in masks:
        subs = _submasks(A)
        vals = np.array([value(int(s)) for s in subs])
        vals = vals[~np.isnan(vals)]
        if vals.size == 0:
            continue
        target = gamma * vals.max()
        gaps = target - vals
        bad = gaps > GAP_TOL
        if not bad.any():
            continue
        a_min = float(target - vals[bad].max())
        a_max = float(target - vals[bad].min())
        table[_members(A)] = (a_min, a_max)
        dmin = min(dmin, a_min)
        dmax = max(dmax, a_max)
    if not table:
        return GapSummary(None, None, table, availability_family == "all_subsets")
    return GapSummary(dmin, dmax, table, availability_family == "all_subsets")


def _check_T(T):
    if T < 2:
        raise ValueError(f"horizon T must be >= 2, got {T}")


def bound_thm1(k, C, sigma, delta_min, beta, T, form: str = "theorem") -> float:
    """Logarithmic instance-dependent bound.

    ``form="theorem"`` is the stated bound; ``form="proof"`` is the final
    line of its derivation, which carries ``6 C^2 k sigma ln T / Δmin``.
    """
    _check_T(T)
    if delta_min <= 0:
        raise ValueError("delta_min must be positive")
    if min(k, C, sigma) <= 0 or beta < 0:
        raise ValueError("k, C, sigma must be positive and beta nonnegative")
    lnT = math.log(T)
    lam = 1.0 + math.sqrt(3.0 * lnT / 2.0)
    if form == "theorem":
        return 2.0 * beta * k * C * (ZETA3 * lam + 3.0 * sigma * C * lnT / delta_min)
    if form == "proof":
        return beta * (2.0 * k * C * ZETA3 * lam + 6.0 * C * C * k * sigma * lnT / delta_min)
    raise ValueError(f"unknown form {form!r}")


def bound_thm2(k, C, sigma, T) -> float:
    _check_T(T)
    if min(k, C, sigma) <= 0:
        raise ValueError("k, C, sigma must be positive")
    return 4.0 * C * math.sqrt(6.0 * k * sigma * T * math.log(T)) + 2.0 * k * C * ZETA3


def bound_thm3(k, C, T) -> float:
    _check_T(T)
    if min(k, C) <= 0:
        raise ValueError("k, C must be positive")
    lnT = math.log(T)
    lam = 1.0 + math.sqrt(3.0 * lnT / 2.0)
    return C * (1.0 + lam) * (6.0 * k * T * T * lnT) ** (1.0 / 3.0) + 2.0 * k * lam * C * ZETA3


def bound_thm4(k, delta_min, delta_max, f_inverse: Callable[[float], float], T) -> float:
    _check_T(T)
    x = f_inverse(delta_min)
    if x <= 0:
        raise ValueError("f_inverse(delta_min) must be positive")
    return (6.0 * math.log(T) / (x * x) + 2.0 * ZETA3) * k * delta_max


def observation2_cap(C, T) -> float:
    if T < 1:
        raise ValueError("T must be >= 1")
    return C * (1.0 + math.sqrt(3.0 * math.log(T) / 2.0))


def growth_exponent(cumulative: Sequence[float], t_lo: int, t_hi: int, ts: Optional[Sequence[int]] = None,
                    points: int = 20) -> float:
    """Least-squares slope of ln(cumulative) against ln(t) over [t_lo, t_hi].

    Without ``ts`` the series is indexed by round (``cumulative[t-1]`` is the
    value after round ``t``) and sampled at ``points`` geometrically spaced
    rounds. With ``ts`` the series is taken to be sampled at those rounds and
    every sample inside the window is used.
    """
    values = np.asarray(cumulative, dtype=float)
    if ts is None:
        if not 1 <= t_lo < t_hi <= len(values):
            raise ValueError(f"need 1 <= t_lo < t_hi <= {len(values)}, got [{t_lo}, {t_hi}]")
        grid = np.unique(np.round(np.geomspace(t_lo, t_hi, points)).astype(np.int64))
        x, y = grid.astype(float), values[grid - 1]
    else:
        ts = np.asarray(ts, dtype=float)
        if not t_lo < t_hi:
            raise ValueError("t_lo must be below t_hi")
        keep = (ts >= t_lo) & (ts <= t_hi)
        x, y = ts[keep], values[keep]
        if x.size < 2:
            raise ValueError(f"fewer than two samples in [{t_lo}, {t_hi}]")
    if np.any(y <= 0):
        raise ValueError("cumulative values must be positive on the fit window; move the window later")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)
