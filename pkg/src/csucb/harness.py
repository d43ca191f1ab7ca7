"""Replicated seeded experiments: simulate, aggregate, write CSV and figures."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis
from .environment import InstanceConfig, RunEnvironment, sample_exp_one
from .oracles import OracleSpec, degrade, exact_oracle
from .policy import PolicyState, step, update

log = logging.getLogger(__name__)

CSV_COLUMNS = ("t", "regret_mean", "regret_std", "bound_thm1", "bound_thm2", "bound_thm3", "bound_thm4")
N_CHECKPOINTS = 50


def geometric_checkpoints(T: int, n: int = N_CHECKPOINTS) -> tuple:
    """``n`` geometrically spaced rounds in [1, T] (deduplicated), plus T."""
    pts = np.unique(np.round(np.geomspace(1, T, n)).astype(np.int64))
    pts = sorted(set(pts.tolist()) | {T})
    return tuple(int(t) for t in pts)


@dataclass(frozen=True)
class ExperimentSpec:
    instance: InstanceConfig
    tag: str = "Custom"
    checkpoints: tuple = ()
    out_dir: Optional[str] = None
    resample_instance: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.tag not in ("ExpOne", "ExpTwo", "Custom"):
            raise ValueError(f"unknown experiment tag {self.tag!r}")
        cps = tuple(self.checkpoints) or geometric_checkpoints(self.instance.horizon)
        if list(cps) != sorted(set(cps)) or cps[0] < 1 or cps[-1] > self.instance.horizon:
            raise ValueError("checkpoints must be strictly increasing within [1, T]")
        object.__setattr__(self, "checkpoints", cps)
        if self.resample_instance and self.instance.avail_p is None:
            raise ValueError("resampling the instance needs Bernoulli availability")


@dataclass
class RunResult:
    run_index: int
    cumulative: np.ndarray  # at checkpoints
    max_increment: float
    trace: Optional[list] = None


@dataclass
class AggregateResult:
    checkpoints: tuple
    mean: np.ndarray
    std: np.ndarray
    per_run: np.ndarray
    bounds: dict
    gaps: Optional[analysis.GapSummary]
    max_increment: float
    metadata: dict = field(default_factory=dict)

    @property
    def runs(self) -> int:
        return self.per_run.shape[0]


def simulate_run(config: InstanceConfig, run_index: int, checkpoints, mu=None,
                 keep_trace: bool = False) -> RunResult:
    """One CS-UCB run; cumulative sleeping regret is sampled at ``checkpoints``."""
    env = RunEnvironment(config, run_index, mu=mu)
    model = config.model()
    oracle = exact_oracle(model)
    if config.beta < 1.0:
        oracle = degrade(oracle, OracleSpec(config.gamma, config.beta), env.oracle_rng, model)
    ledger = analysis.RegretLedger(model, env.mu, config.gamma, config.beta)
    state = PolicyState.initial(config.k)
    cps = list(checkpoints)
    out = np.empty(len(cps))
    trace = [] if keep_trace else None
    total, max_inc, j = 0.0, -math.inf, 0
    for t in range(1, config.horizon + 1):
        available = env.availability(t)
        if available:
            S = step(state, available, oracle, model)
            state = update(state, S, env.feedback(S, t))
        else:
            # empty round: clock advances, statistics do not
            S = ()
            state = PolicyState(state.pulls, state.sums, state.round + 1)
        inc = analysis.record_round(ledger, available, S)
        total += inc
        if inc > max_inc:
            max_inc = inc
        if keep_trace:
            trace.append((available, S))
        if t == cps[j]:
            out[j] = total
            j += 1
            if j == len(cps):
                break
    return RunResult(run_index, out, max_inc, trace)


def _run_one(args):
    config, run_index, checkpoints, resample = args
    mu = None
    if resample:
        mu = sample_exp_one(config.k, [config.master_seed, run_index, 1]).mu
    try:
        return simulate_run(config, run_index, checkpoints, mu=mu)
    except Exception as exc:
        raise RuntimeError(f"run {run_index} (master seed {config.master_seed}) failed: {exc}") from exc


def bound_overlays(config: InstanceConfig, gaps: Optional[analysis.GapSummary], ts) -> dict:
    """Bound curves at ``ts``; a theorem is omitted when its inputs are missing."""
    model = config.model()
    C, k = model.lipschitz_C, config.k
    out = {}
    ts = [t for t in ts]
    if C is not None:
        out["bound_thm3"] = [analysis.bound_thm3(k, C, t) if t >= 2 else math.nan for t in ts]
    if gaps is not None and gaps.defined:
        if C is not None:
            out["bound_thm1"] = [analysis.bound_thm1(k, C, gaps.sigma, gaps.delta_min, config.beta, t)
                                 if t >= 2 else math.nan for t in ts]
            out["bound_thm2"] = [analysis.bound_thm2(k, C, gaps.sigma, t) if t >= 2 else math.nan for t in ts]
        if model.smoothness_f_inv is not None:
            out["bound_thm4"] = [analysis.bound_thm4(k, gaps.delta_min, gaps.delta_max, model.smoothness_f_inv, t)
                                 if t >= 2 else math.nan for t in ts]
    return {c: np.asarray(out[c]) for c in CSV_COLUMNS[3:] if c in out}


def config_hash(config: InstanceConfig) -> str:
    blob = json.dumps(config_to_dict(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def config_to_dict(config: InstanceConfig) -> dict:
    d = asdict(config)
    d["reward"] = config.reward.to_dict()
    if config.availability_script is not None:
        d["availability_script"] = [list(a) for a in config.availability_script]
    return d


def run_experiment(spec: ExperimentSpec) -> AggregateResult:
    config = spec.instance
    t0 = time.perf_counter()
    tasks = [(config, r, spec.checkpoints, spec.resample_instance) for r in range(config.runs)]
    if spec.jobs > 1 and config.runs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(task) for task in tasks]
    per_run = np.vstack([r.cumulative for r in results])
    mean = per_run.mean(axis=0)
    std = per_run.std(axis=0, ddof=1) if len(results) > 1 else np.zeros_like(mean)

    gaps = None
    if not spec.resample_instance:
        model = config.model()
        if config.k <= analysis.MAX_GAP_ARMS:
            gaps = analysis.instance_gaps(config.mu, model, "all_subsets", config.gamma)
        elif config.availability_script is not None:
            gaps = analysis.instance_gaps(config.mu, model, config.availability_script, config.gamma)
    bounds = bound_overlays(config, gaps, spec.checkpoints)
    result = AggregateResult(
        checkpoints=spec.checkpoints,
        mean=mean,
        std=std,
        per_run=per_run,
        bounds=bounds,
        gaps=gaps,
        max_increment=max(r.max_increment for r in results),
        metadata={
            "tag": spec.tag,
            "master_seed": config.master_seed,
            "runs": config.runs,
            "config_hash": config_hash(config),
            "wall_time_s": time.perf_counter() - t0,
        },
    )
    log.info("experiment %s: %d runs in %.1fs", spec.tag, config.runs, result.metadata["wall_time_s"])
    if spec.out_dir is not None:
        out = Path(spec.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(result, out / "regret.csv")
        from .plotting import render_chart

        render_chart(result, out / "regret.svg")
    return result


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def format_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) if i else str(int(v)) for i, v in enumerate(row)) for row in rows]
    return "\n".join(lines) + "\n"


def write_csv(result: AggregateResult, path) -> Path:
    rows = []
    for j, t in enumerate(result.checkpoints):
        row = [t, result.mean[j], result.std[j]]
        for col in CSV_COLUMNS[3:]:
            series = result.bounds.get(col)
            row.append(None if series is None else series[j])
        rows.append(row)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(CSV_COLUMNS, rows))
    return path


def bounds_table(k, C, T_grid, sigma=None, delta_min=None, delta_max=None, beta=1.0, f_inverse=None) -> str:
    """CSV of bound curves, one row per horizon in ``T_grid``."""
    if f_inverse is None:
        f_inverse = lambda y: y / C  # noqa: E731  linear smoothness
    rows = []
    for T in T_grid:
        row = [T]
        row.append(analysis.bound_thm1(k, C, sigma, delta_min, beta, T)
                   if sigma is not None and delta_min is not None else None)
        row.append(analysis.bound_thm2(k, C, sigma, T) if sigma is not None else None)
        row.append(analysis.bound_thm3(k, C, T))
        row.append(analysis.bound_thm4(k, delta_min, delta_max, f_inverse, T)
                   if delta_min is not None and delta_max is not None else None)
        rows.append(row)
    return format_csv(("T",) + CSV_COLUMNS[3:], rows)


def with_overrides(config: InstanceConfig, **kw) -> InstanceConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(config, **kw) if kw else config
