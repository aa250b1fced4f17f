"""Randomized dimension reduction for Monte Carlo estimation."""

from .baselines import baseline_mc, long_run_average
from .core import (
    EstimateResult,
    choose_n,
    expected_iteration_cost,
    explicit_q,
    rdr_estimate,
    variance_bound_rhs,
    work_variance_product,
)
from .ddr import ddr_cost, ddr_estimate, mu_sequence, naive_schedule
from .estimators import DDREstimator, MLMCEstimator, MonteCarloEstimator, RDREstimator
from .harness import ExperimentConfig, RunReport, emit_report, run_experiment
from .mlmc import MlmcPlan, mlmc_estimate, plan_mlmc
from .models import make_model
from .tuning import TunedPlan, auto_tune, estimate_c, lower_hull, optimal_q

__version__ = "0.1.0"

__all__ = [
    "EstimateResult",
    "choose_n",
    "expected_iteration_cost",
    "explicit_q",
    "rdr_estimate",
    "variance_bound_rhs",
    "work_variance_product",
    "TunedPlan",
    "auto_tune",
    "estimate_c",
    "lower_hull",
    "optimal_q",
    "ddr_cost",
    "ddr_estimate",
    "mu_sequence",
    "naive_schedule",
    "MlmcPlan",
    "mlmc_estimate",
    "plan_mlmc",
    "baseline_mc",
    "long_run_average",
    "RDREstimator",
    "DDREstimator",
    "MLMCEstimator",
    "MonteCarloEstimator",
    "ExperimentConfig",
    "RunReport",
    "run_experiment",
    "emit_report",
    "make_model",
]
