"""Command line entry point: ``rdrmc {tune,run,bench,hull}``.

Exit codes: 0 on success, 2 for configuration errors, 3 for numeric failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .harness import ConfigError, ExperimentConfig, NumericFailure, emit_report, run_experiment, tune_experiment
from .tuning import DegenerateVarianceError, lower_hull, optimal_q

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

# CLI flag -> config key
_OVERRIDES = {
    "model": "model",
    "algorithm": "algorithm",
    "seed": "master_seed",
    "reps": "replications",
    "out": "output",
    "format": "format",
    "workers": "workers",
    "budget_multiplier": "budget_multiplier",
    "tuning_samples": "tuning_samples",
    "var_f_samples": "var_f_samples",
    "period": "period",
}


def _parse_param(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError("model_params", f"expected key=value, got {text!r}")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None


def _apply_overrides(data: dict, args) -> dict:
    data = dict(data)
    for flag, key in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    if getattr(args, "param", None):
        params = dict(data.get("model_params") or {})
        params.update(_parse_param(p) for p in args.param)
        data["model_params"] = params
    if getattr(args, "include_tuning_cost", False):
        data["include_tuning_cost"] = True
    return data


def _single_config(args) -> ExperimentConfig:
    data = _load_json(args.config) if args.config else {}
    if not isinstance(data, dict):
        raise ConfigError("config", "expected a single experiment object")
    return ExperimentConfig.from_dict(_apply_overrides(data, args))


def _bench_configs(args) -> list[ExperimentConfig]:
    data = _load_json(args.config)
    if isinstance(data, dict):
        defaults = {k: v for k, v in data.items() if k != "experiments"}
        entries = data.get("experiments")
        if not isinstance(entries, list):
            raise ConfigError("experiments", "expected a list of experiments")
        entries = [{**defaults, **e} if isinstance(e, dict) else e for e in entries]
    elif isinstance(data, list):
        entries = data
    else:
        raise ConfigError("config", "expected a list of experiments")
    if not entries:
        raise ConfigError("experiments", "empty")
    out = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise ConfigError("experiments", "each experiment must be an object")
        out.append(ExperimentConfig.from_dict(_apply_overrides(entry, args)))
    return out


def _write(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise ConfigError("output", f"cannot write {path}: {exc.strerror}") from None


def _cmd_tune(args) -> None:
    config = _single_config(args)
    fitted = tune_experiment(config)
    payload = {"model": config.model, "d": int(fitted.d_), "algorithm": config.algorithm,
               "n": int(fitted.n_), "tuning_cost": float(fitted.tuning_cost_)}
    plan = getattr(fitted, "plan_", None)
    if plan is not None:
        payload["plan"] = plan.to_dict()
    elif hasattr(fitted, "q_"):
        payload["plan"] = {"q": fitted.q_.tolist(), "T": float(fitted.T_)}
    if hasattr(fitted, "mu_"):
        payload["mu"] = fitted.mu_.mu.tolist()
    _write(json.dumps(payload, indent=2) + "\n", config.output)


def _emit(reports, config_format, path):
    try:
        text = emit_report(reports, config_format, None)
    except ValueError as exc:
        raise ConfigError("format", str(exc)) from None
    _write(text, path)


def _cmd_run(args) -> None:
    config = _single_config(args)
    report = run_experiment(config)
    _emit([report], config.format, config.output)


def _cmd_bench(args) -> None:
    configs = _bench_configs(args)
    reports = []
    for config in configs:
        reports.append(run_experiment(config))
        print(f"{config.model} {config.algorithm}: done in {reports[-1].wall_time:.1f}s", file=sys.stderr)
    _emit(reports, configs[0].format, args.out if args.out is not None else configs[0].output)


def _read_profiles(text: str):
    text = text.strip()
    if not text:
        raise ConfigError("hull", "no input")
    if text.startswith("{"):
        try:
            data = json.loads(text)
            return data["t"], data["nu"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError("hull", f"expected {{\"t\": [...], \"nu\": [...]}}: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise ConfigError("hull", "expected two lines: costs t_0..t_d, then variances nu_0..nu_d")
    try:
        return [[float(x) for x in ln.replace(",", " ").split()] for ln in lines]
    except ValueError as exc:
        raise ConfigError("hull", str(exc)) from None


def _cmd_hull(args) -> None:
    t, nu = _read_profiles(sys.stdin.read())
    hull = lower_hull(t, nu)
    q, r = optimal_q(t, nu)
    t = np.asarray(t, dtype=float)
    payload = {
        "nu_prime": hull.nu_prime.tolist(),
        "support": hull.support.tolist(),
        "q": q.tolist(),
        "R": r,
        "T": float(np.dot(q, np.diff(t))),
    }
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _add_experiment_flags(p, bench=False):
    p.add_argument("--config", required=bench, help="JSON config file" + (" (list of experiments)" if bench else ""))
    p.add_argument("--model", help="model name: sum, lipschitz_sum, garch, gtd1, mtgi1")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="model parameter, value parsed as JSON when possible (repeatable)")
    p.add_argument("--algorithm", help="rdr, ddr, mlmc, mc or longrun")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--reps", type=int, help="number of replications")
    p.add_argument("--budget-multiplier", type=float)
    p.add_argument("--tuning-samples", type=int)
    p.add_argument("--var-f-samples", type=int)
    p.add_argument("--period", type=int, help="spacing of the long-run average")
    p.add_argument("--workers", type=int, help="replication threads")
    p.add_argument("--include-tuning-cost", action="store_true", help="add the pilot cost to the Cost column")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rdrmc", description="Monte Carlo with randomized input reuse.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("tune", help="run the pilot phase and print the tuned plan as JSON")
    _add_experiment_flags(p)
    p = sub.add_parser("run", help="run one replicated experiment")
    _add_experiment_flags(p)
    p = sub.add_parser("bench", help="run a list of experiments into one table")
    _add_experiment_flags(p, bench=True)
    sub.add_parser("hull", help="read t and nu from stdin; print the hull, optimal q and its value")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"tune": _cmd_tune, "run": _cmd_run, "bench": _cmd_bench, "hull": _cmd_hull}[args.command]
    try:
        handler(args)
    except (NumericFailure, DegenerateVarianceError, FloatingPointError) as exc:
        print(f"rdrmc: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"rdrmc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
