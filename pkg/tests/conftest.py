"""Shared reference implementations used as independent oracles.

Nothing here imports the package's enumeration code: rewards are plain sums
and subsets come straight from a bitmask loop.
"""

import numpy as np
import pytest


def all_subsets(items):
    items = sorted(items)
    for mask in range(1, 1 << len(items)):
        yield tuple(items[j] for j in range(len(items)) if mask >> j & 1)


def ref_topk_value(S, mu):
    return sum(mu[i] for i in S)


def ref_util_value(S, mu, a, b):
    return sum(a[i] * mu[i] - b[i] for i in S)


def ref_best_value(A, value, feasible):
    return max(value(S) for S in all_subsets(A) if feasible(S))


def ref_gaps(k, value, feasible, gamma=1.0, tol=1e-12):
    """(delta_min, delta_max) by brute force over every availability set."""
    dmin, dmax = None, None
    for A in all_subsets(range(k)):
        vals = [value(S) for S in all_subsets(A) if feasible(S)]
        opt = gamma * max(vals)
        bad = [v for v in vals if opt - v > tol]
        if not bad:
            continue
        lo, hi = opt - max(bad), opt - min(bad)
        dmin = lo if dmin is None else min(dmin, lo)
        dmax = hi if dmax is None else max(dmax, hi)
    return dmin, dmax


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
