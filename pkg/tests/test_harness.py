import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rdrmc import harness
from rdrmc.baselines import baseline_mc, long_run_average
from rdrmc.harness import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    NumericFailure,
    RunReport,
    emit_report,
    format_report,
    replication_rng,
    run_experiment,
)
from rdrmc.models import MarkovSpec, gtd1_model, reverse, sum_model


def _quick(**overrides):
    base = dict(model="sum", model_params={"d": 16}, algorithm="rdr", replications=200, tuning_samples=100,
                var_f_samples=2000, master_seed=7)
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------- config


@pytest.mark.parametrize(
    "overrides, key",
    [({"model": "brownian"}, "model"), ({"algorithm": "qmc"}, "algorithm"), ({"replications": 1}, "replications"),
     ({"budget_multiplier": 0}, "budget_multiplier"), ({"master_seed": -1}, "master_seed"),
     ({"format": "xml"}, "format")],
)
def test_config_errors_name_the_key(overrides, key):
    with pytest.raises(ConfigError) as info:
        _quick(**overrides)
    assert info.value.key == key


def test_config_from_dict_rejects_unknown_keys_and_round_trips():
    with pytest.raises(ConfigError, match="colour"):
        ExperimentConfig.from_dict({"model": "sum", "colour": "red"})
    with pytest.raises(ConfigError, match="model"):
        ExperimentConfig.from_dict({"algorithm": "rdr"})
    cfg = _quick()
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_bad_model_parameters_are_config_errors():
    with pytest.raises(ConfigError) as info:
        run_experiment(_quick(model_params={"d": 16, "gamma": 2}))
    assert info.value.key == "model_params"


def test_longrun_needs_a_chain():
    with pytest.raises(ConfigError, match="Markov chain"):
        run_experiment(_quick(algorithm="longrun"))
    with pytest.raises(ConfigError) as info:
        run_experiment(_quick(model="gtd1", model_params={"d": 50}, algorithm="longrun", period=50))
    assert info.value.key == "period"


# ---------------------------------------------------------------- seeds


def test_phase_streams_are_disjoint():
    cfg = _quick()
    ids = {phase: harness._phase_id(cfg, phase) for phase in ("varf", "tune", "run")}
    assert len(set(ids.values())) == 3
    assert harness._phase_id(_quick(algorithm="mc"), "varf") == ids["varf"]
    assert harness._phase_id(_quick(algorithm="mc"), "run") != ids["run"]
    a = replication_rng(7, ids["run"], 0).random(4)
    b = replication_rng(7, ids["run"], 1).random(4)
    c = replication_rng(8, ids["run"], 0).random(4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.array_equal(a, replication_rng(7, ids["run"], 0).random(4))


def test_output_is_identical_for_any_worker_count():
    texts = {w: format_report([run_experiment(_quick(), workers=w)]) for w in (1, 8)}
    assert texts[1] == texts[8]
    chain = _quick(model="gtd1", model_params={"d": 200}, algorithm="ddr", replications=40)
    assert format_report([run_experiment(chain, workers=1)]) == format_report([run_experiment(chain, workers=3)])


# ---------------------------------------------------------------- statistics


def test_report_fields_follow_their_definitions():
    rep = run_experiment(_quick())
    assert rep.ci90 == pytest.approx(1.645 * rep.std / math.sqrt(rep.replications))
    assert rep.cost_times_var == pytest.approx(rep.cost_mean * rep.std**2)
    assert rep.vrf == pytest.approx(rep.d * rep.var_f / rep.cost_times_var)
    with_tuning = run_experiment(_quick(include_tuning_cost=True))
    assert with_tuning.cost_mean == pytest.approx(rep.cost_mean + rep.tuning_cost)


def test_plain_monte_carlo_has_unit_vrf():
    rep = run_experiment(_quick(algorithm="mc", replications=4000, var_f_samples=20_000))
    tol = 3 * math.sqrt(2 / 4000 + 2 / 20_000)
    assert abs(rep.vrf - 1) < tol
    assert rep.cost_mean == 11 * 16 and rep.tuning_cost == 0


def test_ci90_coverage():
    hits = 0
    for seed in range(1000):
        rep = run_experiment(_quick(model_params={"d": 8}, replications=100, tuning_samples=20, var_f_samples=2,
                                    master_seed=seed))
        hits += abs(rep.estimate) <= rep.ci90
    assert abs(hits / 1000 - 0.90) <= 0.03


def test_mlmc_reports_total_samples_and_levels():
    rep = run_experiment(_quick(algorithm="mlmc", replications=20))
    assert rep.n == sum(rep.extra["n_levels"])
    assert rep.extra["levels"] == [1, 2, 4, 8, 16]


def test_non_finite_replication_is_a_hard_failure(monkeypatch):
    spec = MarkovSpec(name="blowup", x0=0.0, d=4, draw=lambda rng, j: rng.random(),
                      transition=lambda j, x, y: math.inf if y < 0.01 else x + y)
    monkeypatch.setattr(harness, "make_model", lambda name, **params: reverse(spec))
    with pytest.raises(NumericFailure, match=r"replication \d+.*master_seed=7"):
        run_experiment(_quick(algorithm="mc", var_f_samples=2))


# ---------------------------------------------------------------- baselines


def test_baseline_mc():
    model = sum_model(8)
    res = baseline_mc(model, 8 * 10**4, np.random.default_rng(0))
    assert res.iterations == 10**4 and res.total_cost == 8 * 10**4
    assert abs(res.estimate) < 4 / 100
    single = baseline_mc(model, 8, np.random.default_rng(1))
    assert single.estimate == model.sample_iid(1, np.random.default_rng(1))[0]
    with pytest.raises(ValueError, match="below the cost"):
        baseline_mc(model, 7)


def test_baseline_mc_variance_is_iid_variance():
    model = reverse(gtd1_model(d=100))
    rng = np.random.default_rng(2)
    var_f = model.sample_iid(20_000, rng).var(ddof=1)
    est = np.array([baseline_mc(model, 1000, rng).estimate for _ in range(2000)])
    ratio = est.var(ddof=1) * 10 / var_f
    assert abs(ratio - 1) < 3 * math.sqrt(2 / 2000 + 2 / 20_000)


def test_long_run_average_of_a_constant_chain():
    spec = MarkovSpec(name="const", x0=2.5, d=50, draw=lambda rng, j: rng.random(), transition=lambda j, x, y: x)
    res = long_run_average(spec, 7, np.random.default_rng(0))
    assert res.estimate == 2.5
    assert res.extra["times"].tolist() == [50, 43, 36, 29, 22, 15, 8, 1]
    with pytest.raises(ValueError, match="period"):
        long_run_average(spec, 50)


# ---------------------------------------------------------------- output


def _report(model="sum", d=4, algorithm="rdr", estimate=0.123456789):
    return RunReport(model=model, d=d, algorithm=algorithm, n=10, estimate=estimate, ci90=1e-3, std=0.02,
                     cost_mean=44.0, cost_ci90=0.5, cost_times_var=0.0176, vrf=3.14159265, tuning_cost=1200.0,
                     seed=3, replications=1000, var_f=1.0, extra={"T": 4.0})


def test_csv_header_and_row():
    text = format_report([_report()])
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 2
    assert rows[1][4] == "0.123457" and rows[1][10] == "3.14159"


def test_rows_are_sorted():
    reports = [_report("sum", 8, "rdr"), _report("garch", 4, "mlmc"), _report("sum", 4, "mc"),
               _report("garch", 4, "ddr")]
    rows = list(csv.reader(io.StringIO(format_report(reports))))[1:]
    assert [(r[0], r[1], r[2]) for r in rows] == [("garch", "4", "ddr"), ("garch", "4", "mlmc"),
                                                  ("sum", "4", "mc"), ("sum", "8", "rdr")]


def test_json_round_trip(tmp_path):
    rep = _report()
    path = tmp_path / "out.json"
    emit_report([rep], "json", path)
    (row,) = json.loads(path.read_text())
    for key in CSV_COLUMNS:
        value = getattr(rep, key)
        if isinstance(value, float):
            assert row[key] == pytest.approx(value, rel=5e-6)
        else:
            assert row[key] == value
    assert row["extra"] == {"T": 4.0}


def test_empty_report_list():
    with pytest.raises(ValueError):
        format_report([])


# ---------------------------------------------------------------- CLI


def _cli(*args, stdin=None):
    return subprocess.run([sys.executable, "-m", "rdrmc.cli", *args], input=stdin, capture_output=True, text=True)


def test_cli_run_and_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "sum", "model_params": {"d": 8}, "algorithm": "mc", "replications": 5,
                               "var_f_samples": 100}))
    out = tmp_path / "r.csv"
    proc = _cli("run", "--config", str(cfg), "--reps", "7", "--seed", "4", "--param", "d=6", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    (row,) = list(csv.DictReader(io.StringIO(out.read_text())))
    assert row["d"] == "6" and row["seed"] == "4" and row["algorithm"] == "mc"


def test_cli_exit_codes(tmp_path):
    assert _cli("run", "--model", "brownian").returncode == 2
    assert _cli("run", "--model", "sum", "--reps", "1").returncode == 2
    assert _cli("run", "--config", str(tmp_path / "missing.json")).returncode == 2
    degenerate = _cli("run", "--model", "sum", "--param", "d=6", "--param", "component_sampler=ones",
                      "--tuning-samples", "20", "--var-f-samples", "10")
    assert degenerate.returncode == 3
    assert "numeric failure" in degenerate.stderr


def test_cli_tune_prints_the_plan():
    proc = _cli("tune", "--model", "garch", "--param", "d=32", "--tuning-samples", "100")
    assert proc.returncode == 0, proc.stderr
    payload = json.loads(proc.stdout)
    assert payload["d"] == 32 and len(payload["plan"]["q"]) == 32 and payload["plan"]["q"][0] == 1


def test_cli_bench_json(tmp_path):
    cfg = tmp_path / "bench.json"
    cfg.write_text(json.dumps({"model_params": {"d": 8}, "replications": 5, "var_f_samples": 50,
                               "tuning_samples": 20, "format": "json",
                               "experiments": [{"model": "sum", "algorithm": "mc"},
                                               {"model": "sum", "algorithm": "ddr"}]}))
    proc = _cli("bench", "--config", str(cfg))
    assert proc.returncode == 0, proc.stderr
    assert [r["algorithm"] for r in json.loads(proc.stdout)] == ["ddr", "mc"]


def test_cli_hull():
    proc = _cli("hull", stdin=json.dumps({"t": list(range(7)), "nu": [20, 21, 13, 8, 7, 2, 0]}))
    assert proc.returncode == 0, proc.stderr
    payload = json.loads(proc.stdout)
    assert payload["nu_prime"] == [20, 16, 12, 8, 5, 2, 0]
    assert payload["R"] == pytest.approx(118.34, abs=0.01)
    two_lines = _cli("hull", stdin="0 1 2 3\n6 4 2 0\n")
    assert json.loads(two_lines.stdout)["q"] == [1, 1, 1]
    assert _cli("hull", stdin="0 1 2\n").returncode == 2
    assert _cli("hull", stdin="0 1 2\n2 1 5\n").returncode == 2
