"""Command-line entry point: ``csucb run|gaps|bounds|check-smoothness``.

Config files are JSON objects:

    {
      "experiment": "ExpOne" | "ExpTwo" | "Custom",   optional, default "Custom"
      "k": 8,                                          required
      "reward": {"type": "topk", "K": 3}               required; or
                {"type": "util", "a": [...], "b": [...]}
      "mu": [...],                                     required for Custom
      "avail_p": [...],                                required for Custom unless a script is given
      "availability_script": "path",                   optional
      "horizon": 100000, "runs": 20,                   optional
      "gamma": 1.0, "beta": 1.0,                       optional
      "master_seed": 0,                                optional
      "instance_seed": 0,                              optional, ExpOne/ExpTwo sampling seed
      "delta_min_target": 0.01,                        required for ExpTwo
      "sigma_target": 1.0,                             optional, ExpTwo
      "resample_instance": false                       optional
    }
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis, harness
from .environment import (
    InstanceConfig,
    RewardSpec,
    ScriptError,
    load_availability_script,
    sample_exp_one,
    sample_exp_two,
)
from .oracles import BudgetExceeded
from .rewards import check_bounded_smoothness, check_lipschitz, check_monotonicity

EXIT_OK, EXIT_CHECK_FAILED, EXIT_VALIDATION, EXIT_BUDGET, EXIT_IO = 0, 1, 2, 3, 4

CONFIG_KEYS = {
    "experiment", "k", "reward", "mu", "avail_p", "availability_script", "horizon", "runs",
    "gamma", "beta", "master_seed", "instance_seed", "delta_min_target", "sigma_target",
    "resample_instance",
}


def load_config(path, args=None) -> tuple:
    """Build (InstanceConfig, experiment tag, resample flag) from a JSON file and CLI overrides."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    for key in ("k", "reward"):
        if key not in raw:
            raise ValueError(f"{path}: missing required key {key!r}")
    k = int(raw["k"])
    reward = RewardSpec.from_dict(raw["reward"])
    tag = raw.get("experiment", "Custom")
    over = {
        "horizon": int(raw.get("horizon", 100_000)),
        "runs": int(raw.get("runs", 20)),
        "gamma": float(raw.get("gamma", 1.0)),
        "beta": float(raw.get("beta", 1.0)),
        "master_seed": int(raw.get("master_seed", 0)),
    }
    if args is not None:
        for name, attr in (("horizon", "horizon"), ("runs", "runs"), ("gamma", "gamma"),
                           ("beta", "beta"), ("master_seed", "seed")):
            value = getattr(args, attr, None)
            if value is not None:
                over[name] = value
    instance_seed = int(raw.get("instance_seed", over["master_seed"]))

    script_path = raw.get("availability_script")
    if args is not None and getattr(args, "availability_script", None):
        script_path = args.availability_script
    script = None
    if script_path is not None:
        script_path = Path(script_path)
        if not script_path.is_absolute():
            script_path = path.parent / script_path if not script_path.exists() else script_path
        script = load_availability_script(script_path, k)

    if tag == "ExpOne":
        config = sample_exp_one(k, instance_seed, reward, **over)
    elif tag == "ExpTwo":
        if "delta_min_target" not in raw:
            raise ValueError(f"{path}: ExpTwo needs delta_min_target")
        config = sample_exp_two(k, float(raw["delta_min_target"]), instance_seed, reward,
                                sigma_target=raw.get("sigma_target"), **over)
    elif tag == "Custom":
        if "mu" not in raw:
            raise ValueError(f"{path}: Custom experiments need mu")
        if script is None and "avail_p" not in raw:
            raise ValueError(f"{path}: Custom experiments need avail_p or availability_script")
        config = InstanceConfig(k=k, mu=tuple(raw["mu"]), reward=reward,
                                avail_p=None if script is not None else tuple(raw["avail_p"]),
                                availability_script=script, **over)
    else:
        raise ValueError(f"{path}: unknown experiment {tag!r}")
    if script is not None and config.availability_script is None:
        config = replace(config, avail_p=None, availability_script=script)
    resample = bool(raw.get("resample_instance", False))
    if args is not None and getattr(args, "resample_instance", False):
        resample = True
    return config, tag, resample


def cmd_run(args) -> int:
    config, tag, resample = load_config(args.config, args)
    spec = harness.ExperimentSpec(config, tag=tag, out_dir=args.out, resample_instance=resample,
                                  jobs=args.jobs)
    result = harness.run_experiment(spec)
    out = Path(args.out)
    print(f"wrote {out / 'regret.csv'} and {out / 'regret.svg'}")
    print(f"runs={result.runs} T={config.horizon} final mean regret={result.mean[-1]:.6g} "
          f"(std {result.std[-1]:.6g})")
    if result.gaps is not None:
        print(format_gaps(result.gaps))
    return EXIT_OK


def format_gaps(gaps: analysis.GapSummary, verbose: int = 0) -> str:
    if not gaps.defined:
        return "delta_min=undefined delta_max=undefined sigma=undefined"
    note = "" if gaps.exact else " (realized availability sets only: lower-bound estimate)"
    lines = [f"delta_min={gaps.delta_min:.12g} delta_max={gaps.delta_max:.12g} sigma={gaps.sigma:.12g}{note}"]
    if verbose:
        lines.append("available_set,delta_min,delta_max")
        for A, (lo, hi) in sorted(gaps.table.items(), key=lambda kv: (len(kv[0]), kv[0])):
            lines.append(f"{' '.join(map(str, A))},{lo:.12g},{hi:.12g}")
    return "\n".join(lines)


def cmd_gaps(args) -> int:
    config, _, _ = load_config(args.config, args)
    model = config.model()
    if config.k > analysis.MAX_GAP_ARMS and config.availability_script is not None:
        family = config.availability_script
    else:
        family = "all_subsets"
    try:
        gaps = analysis.instance_gaps(config.mu, model, family, config.gamma)
    except BudgetExceeded as exc:
        raise BudgetExceeded(f"{exc}. Hint: supply --availability-script to enumerate only "
                             "the scripted availability sets, or reduce k.") from None
    print(format_gaps(gaps, args.verbose))
    return EXIT_OK


def _grid(text: str) -> list:
    return [int(float(x)) for x in text.split(",") if x.strip()]


def cmd_bounds(args) -> int:
    table = harness.bounds_table(args.k, args.C, _grid(args.T_grid), sigma=args.sigma,
                                 delta_min=args.delta_min, delta_max=args.delta_max, beta=args.beta_bound)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "bounds.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    return EXIT_OK


def cmd_check_smoothness(args) -> int:
    config, _, _ = load_config(args.config, args)
    model = config.model()
    seed = config.master_seed
    checks = [("monotonicity", check_monotonicity(model, args.trials, seed))]
    if model.lipschitz_C is not None:
        checks.append((f"lipschitz(C={model.lipschitz_C:g})", check_lipschitz(model, args.trials, seed)))
    if model.smoothness_f is not None:
        checks.append(("bounded_smoothness", check_bounded_smoothness(model, args.trials, seed)))
    failed = False
    for name, report in checks:
        status = "ok" if not report else "FAIL"
        failed |= bool(report)
        print(f"{name}: {len(report)} violations in {args.trials} trials [{status}]")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON instance config")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--horizon", type=int, help="horizon T")
    common.add_argument("--runs", type=int, help="replicate runs")
    common.add_argument("--gamma", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--availability-script", help="replay availability sets from a file")
    common.add_argument("--resample-instance", action="store_true", help="redraw ExpOne qualities per run")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="csucb", description="CS-UCB sleeping combinatorial bandit harness")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="replicated simulation, CSV + SVG output")
    run.add_argument("--out", default="results", help="output directory")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.set_defaults(func=cmd_run)

    gaps = sub.add_parser("gaps", parents=[common], help="exact instance gaps")
    gaps.set_defaults(func=cmd_gaps)

    chk = sub.add_parser("check-smoothness", parents=[common], help="randomized property checks")
    chk.add_argument("--trials", type=int, default=10_000)
    chk.set_defaults(func=cmd_check_smoothness)

    b = sub.add_parser("bounds", help="bound curves over a horizon grid")
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--C", type=float, default=1.0)
    b.add_argument("--sigma", type=float)
    b.add_argument("--delta-min", type=float)
    b.add_argument("--delta-max", type=float)
    b.add_argument("--beta", dest="beta_bound", type=float, default=1.0)
    b.add_argument("--T-grid", default="100,1000,10000,100000")
    b.add_argument("--out", help="write bounds.csv here instead of stdout")
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", 0) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (OSError, ScriptError) as exc:
        code = EXIT_VALIDATION if isinstance(exc, ScriptError) else EXIT_IO
        print(f"error: {exc}", file=sys.stderr)
        return code
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
