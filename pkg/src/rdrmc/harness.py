"""Replicated experiments, summary statistics and report files."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import baseline_mc, long_run_average
from .estimators import DDREstimator, MLMCEstimator, MonteCarloEstimator, RDREstimator
from .models import MODEL_NAMES, ReversedChainModel, make_model
from .tuning import DegenerateVarianceError

__all__ = [
    "ALGORITHMS",
    "CSV_COLUMNS",
    "ConfigError",
    "NumericFailure",
    "ExperimentConfig",
    "RunReport",
    "run_experiment",
    "tune_experiment",
    "emit_report",
    "format_report",
    "replication_rng",
    "baseline_mc",
    "long_run_average",
]

ALGORITHMS = ("rdr", "ddr", "mlmc", "mc", "longrun")
CSV_COLUMNS = ("model", "d", "algorithm", "n", "estimate", "ci90", "std", "cost_mean", "cost_ci90",
               "cost_times_var", "vrf", "tuning_cost", "seed")
Z90 = 1.645


class ConfigError(ValueError):
    """Invalid experiment configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class NumericFailure(RuntimeError):
    """A replication produced a non-finite estimate."""


@dataclass
class ExperimentConfig:
    model: str
    model_params: dict = field(default_factory=dict)
    algorithm: str = "rdr"
    replications: int = 1000
    budget_multiplier: float = 10.0
    tuning_samples: int = 1000
    master_seed: int = 0
    output: str | None = None
    var_f_samples: int = 10_000
    period: int = 100
    workers: int = 1
    include_tuning_cost: bool = False
    format: str = "csv"

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ConfigError("model", f"unknown model {self.model!r}; choose from {', '.join(MODEL_NAMES)}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError("algorithm", f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if not isinstance(self.model_params, dict):
            raise ConfigError("model_params", "must be a mapping")
        for key, low in (("replications", 2), ("tuning_samples", 2), ("var_f_samples", 2), ("period", 1),
                         ("workers", 1)):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < low:
                raise ConfigError(key, f"must be an integer >= {low}, got {value!r}")
        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, (int, np.integer)) \
                or self.master_seed < 0:
            raise ConfigError("master_seed", f"must be a nonnegative integer, got {self.master_seed!r}")
        if not (isinstance(self.budget_multiplier, (int, float)) and self.budget_multiplier > 0):
            raise ConfigError("budget_multiplier", f"must be positive, got {self.budget_multiplier!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", f"must be 'csv' or 'json', got {self.format!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "an experiment must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        if "model" not in data:
            raise ConfigError("model", "missing")
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunReport:
    model: str
    d: int
    algorithm: str
    n: int
    estimate: float
    ci90: float
    std: float
    cost_mean: float
    cost_ci90: float
    cost_times_var: float
    vrf: float
    tuning_cost: float
    seed: int
    replications: int = 0
    var_f: float = float("nan")
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)


# ------------------------------------------------------------------ seeds


def _stream_id(*parts) -> tuple[int, int]:
    digest = hashlib.sha256("|".join(parts).encode()).digest()
    return int.from_bytes(digest[:4], "little"), int.from_bytes(digest[4:8], "little")


def _phase_id(config: ExperimentConfig, phase: str) -> tuple[int, int]:
    params = json.dumps(config.model_params, sort_keys=True)
    # the variance of f does not depend on the algorithm, so all arms share it
    algorithm = "" if phase == "varf" else config.algorithm
    return _stream_id(config.model, params, algorithm, phase)


def replication_rng(master_seed: int, experiment_id: tuple[int, int], r: int) -> np.random.Generator:
    """Independent stream for replication r of one experiment phase."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(*experiment_id, int(r)))
    return np.random.Generator(np.random.PCG64(seq))


# ------------------------------------------------------------------ moments


class _Welford:
    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    @property
    def std(self) -> float:
        return math.sqrt(self.m2 / (self.count - 1)) if self.count > 1 else float("nan")


# ------------------------------------------------------------------ runner


def _build_model(config: ExperimentConfig):
    try:
        return make_model(config.model, **config.model_params)
    except ValueError as exc:
        raise ConfigError("model_params", str(exc)) from None


def _fit(config: ExperimentConfig, model, rng):
    common = dict(budget_multiplier=config.budget_multiplier)
    algorithm = config.algorithm
    if algorithm in ("rdr", "ddr"):
        cls = RDREstimator if algorithm == "rdr" else DDREstimator
        return cls(tuning_samples=config.tuning_samples, random_state=rng, **common).fit(model)
    if algorithm == "mlmc":
        return MLMCEstimator(tuning_samples=config.tuning_samples, random_state=rng, **common).fit(model)
    return MonteCarloEstimator(**common).fit(model)


def tune_experiment(config: ExperimentConfig):
    """Run only the pilot phase of an experiment and return the fitted estimator."""
    model = _build_model(config)
    if config.algorithm == "longrun":
        raise ConfigError("algorithm", "the long-run average has nothing to tune")
    return _fit(config, model, replication_rng(config.master_seed, _phase_id(config, "tune"), 0))


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> RunReport:
    """Tune once, run independent replications and summarize them.

    Replication r draws from a stream derived from ``(master_seed, phase, r)``,
    and results are folded in replication order, so the report does not
    depend on the number of worker threads.
    """
    start = time.perf_counter()
    workers = config.workers if workers is None else int(workers)
    model = _build_model(config)
    d = model.d
    if config.algorithm == "longrun" and not isinstance(model, ReversedChainModel):
        raise ConfigError("algorithm", f"the long-run average needs a Markov chain model, not {config.model!r}")
    if config.algorithm == "longrun" and not config.period < d:
        raise ConfigError("period", f"must be below d={d}")

    varf_rng = replication_rng(config.master_seed, _phase_id(config, "varf"), 0)
    var_f = float(np.var(model.sample_iid(config.var_f_samples, varf_rng), ddof=1))

    if config.algorithm == "longrun":
        estimator = None
        tuning_cost = 0.0
        n = math.ceil(d / config.period)
    else:
        try:
            estimator = _fit(config, model, replication_rng(config.master_seed, _phase_id(config, "tune"), 0))
        except DegenerateVarianceError as exc:
            raise NumericFailure(f"tuning failed: {exc}") from None
        tuning_cost = float(estimator.tuning_cost_)
        n = int(estimator.n_)

    run_id = _phase_id(config, "run")

    def replicate(r: int):
        rng = replication_rng(config.master_seed, run_id, r)
        local = model.clone()
        try:
            if estimator is None:
                res = long_run_average(local, config.period, rng)
            else:
                res = estimator.estimate(local, rng)
        except FloatingPointError as exc:
            raise NumericFailure(f"replication {r}: {exc} (master_seed={config.master_seed}, stream {run_id})") \
                from None
        return res.estimate, res.total_cost

    reps = range(config.replications)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(replicate, reps))
    else:
        outcomes = [replicate(r) for r in reps]

    est_stats, cost_stats = _Welford(), _Welford()
    for r, (value, cost) in enumerate(outcomes):
        if not math.isfinite(value):
            raise NumericFailure(
                f"replication {r} returned a non-finite estimate (master_seed={config.master_seed}, stream {run_id})")
        est_stats.add(value)
        cost_stats.add(cost)

    R = config.replications
    std = est_stats.std
    cost_mean = cost_stats.mean + (tuning_cost if config.include_tuning_cost else 0.0)
    cost_times_var = cost_mean * std**2
    extra = {}
    if config.algorithm == "mlmc":
        extra["n_levels"] = estimator.plan_.n.tolist()
        extra["levels"] = estimator.plan_.m.tolist()
    elif config.algorithm in ("rdr", "ddr"):
        extra["T"] = float(estimator.T_)
    return RunReport(
        model=config.model,
        d=int(d),
        algorithm=config.algorithm,
        n=n,
        estimate=est_stats.mean,
        ci90=Z90 * std / math.sqrt(R),
        std=std,
        cost_mean=cost_mean,
        cost_ci90=Z90 * cost_stats.std / math.sqrt(R),
        cost_times_var=cost_times_var,
        vrf=d * var_f / cost_times_var if cost_times_var > 0 else float("inf"),
        tuning_cost=tuning_cost,
        seed=int(config.master_seed),
        replications=R,
        var_f=var_f,
        wall_time=time.perf_counter() - start,
        extra=extra,
    )


# ------------------------------------------------------------------ output


def _g6(x) -> str:
    return f"{float(x):.6g}"


def _json_value(x):
    if isinstance(x, (bool, str, int, np.integer)) or x is None:
        return x.item() if isinstance(x, np.integer) else x
    if isinstance(x, (float, np.floating)):
        x = float(f"{float(x):.6g}")
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in x]
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    return str(x)


def _sorted(reports):
    return sorted(reports, key=lambda r: (r.model, r.d, r.algorithm))


def format_report(reports, fmt: str = "csv") -> str:
    """Render reports as CSV (fixed columns) or JSON, sorted by model, d and algorithm."""
    reports = _sorted(list(reports))
    if not reports:
        raise ValueError("no reports to emit")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rep in reports:
            row = []
            for col in CSV_COLUMNS:
                value = getattr(rep, col)
                row.append(str(value) if isinstance(value, (str, int, np.integer)) else _g6(value))
            writer.writerow(row)
        return buf.getvalue()
    if fmt == "json":
        rows = [_json_value(dataclasses.asdict(rep)) for rep in reports]
        return json.dumps(rows, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(reports, fmt: str = "csv", path=None) -> str:
    """Write the rendered reports to ``path`` (or return them only, when ``path`` is None)."""
    text = format_report(reports, fmt)
    if path is not None and str(path) != "-":
        Path(path).write_text(text)
    return text
