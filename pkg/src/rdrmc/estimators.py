"""Estimator objects with a scikit-learn style interface.

``fit(model)`` does all pilot work (tuning, level variances) and stores the
fitted attributes with a trailing underscore; ``estimate(model, rng)`` runs
one replication. Parameters are plain constructor arguments, so
``get_params``/``set_params``/``clone`` from scikit-learn work unchanged.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_cost_profile, check_redraw_distribution, default_cost_profile
from .baselines import baseline_mc
from .core import EstimateResult, choose_n, expected_iteration_cost, explicit_q, rdr_estimate
from .ddr import ddr_cost, ddr_estimate, mu_sequence
from .mlmc import MlmcPlan, mlmc_estimate, plan_mlmc
from .tuning import auto_tune

__all__ = ["RDREstimator", "DDREstimator", "MLMCEstimator", "MonteCarloEstimator"]


class _ReuseEstimator(BaseEstimator):
    def __init__(self, q="auto", n=None, budget_multiplier=10.0, tuning_samples=1000, cost_profile=None,
                 random_state=None):
        self.q = q
        self.n = n
        self.budget_multiplier = budget_multiplier
        self.tuning_samples = tuning_samples
        self.cost_profile = cost_profile
        self.random_state = random_state

    def _fit_q(self, model, rng):
        d = model.d
        self.cost_profile_ = default_cost_profile(d) if self.cost_profile is None else check_cost_profile(
            self.cost_profile, d)
        self.plan_ = None
        self.tuning_cost_ = 0.0
        if isinstance(self.q, str) and self.q == "auto":
            if d == 1:
                return np.ones(1)
            self.plan_ = auto_tune(model, self.cost_profile_, int(self.tuning_samples), rng)
            self.tuning_cost_ = self.plan_.tuning_cost
            return self.plan_.q
        if isinstance(self.q, str):
            if self.q not in ("log_optimal", "harmonic"):
                raise ValueError(f"q must be 'auto', 'log_optimal', 'harmonic' or an array; got {self.q!r}")
            params = {"t": self.cost_profile_} if self.q == "log_optimal" else {}
            return explicit_q(self.q, d, **params)
        return check_redraw_distribution(self.q, d)

    def _choose_n(self, d, T):
        if self.n is not None:
            if int(self.n) < 1:
                raise ValueError("n must be positive")
            return int(self.n)
        return choose_n(d, T, float(self.budget_multiplier))


class RDREstimator(_ReuseEstimator):
    """Randomized dimension reduction.

    Parameters
    ----------
    q : "auto", "log_optimal", "harmonic" or array-like
        Redraw distribution. ``"auto"`` tunes it from pilot runs.
    n : int or None
        Iterations per run; by default chosen so reuse iterations cost about
        ``budget_multiplier * d``.
    budget_multiplier : float
    tuning_samples : int
        Pilot samples per tuned index.
    cost_profile : array-like or None
        Cost of redrawing the first i inputs; defaults to ``t_i = i``.
    random_state : None, int or Generator
        Seed for the pilot work done in ``fit``.

    Attributes
    ----------
    q_, T_, n_, plan_, tuning_cost_
    """

    def fit(self, model, y=None):
        rng = np.random.default_rng(self.random_state)
        self.q_ = self._fit_q(model, rng)
        self.T_ = expected_iteration_cost(self.q_, self.cost_profile_)
        self.n_ = self._choose_n(model.d, self.T_)
        self.d_ = model.d
        return self

    def estimate(self, model, rng=None) -> EstimateResult:
        check_is_fitted(self, "q_")
        return rdr_estimate(model, self.q_, self.n_, rng)


class DDREstimator(_ReuseEstimator):
    """Deterministic dimension reduction; same parameters as :class:`RDREstimator`.

    The fitted period chain ``mu_`` rounds the tuned q up to reciprocals of
    nested integers.
    """

    def fit(self, model, y=None):
        rng = np.random.default_rng(self.random_state)
        self.q_ = self._fit_q(model, rng)
        self.mu_ = mu_sequence(self.q_)
        self.T_ = expected_iteration_cost(self.mu_.q_bar, self.cost_profile_)
        self.n_ = self._choose_n(model.d, self.T_)
        self.cost_ = ddr_cost(self.mu_, self.n_, self.cost_profile_)
        self.d_ = model.d
        return self

    def estimate(self, model, rng=None) -> EstimateResult:
        check_is_fitted(self, "mu_")
        return ddr_estimate(model, self.mu_, self.n_, rng)


class MLMCEstimator(BaseEstimator):
    """Multilevel Monte Carlo with geometric truncation levels.

    The budget is ``(budget_multiplier + 1) * d`` input draws per run.
    """

    def __init__(self, levels=None, budget_multiplier=10.0, tuning_samples=1000, random_state=None):
        self.levels = levels
        self.budget_multiplier = budget_multiplier
        self.tuning_samples = tuning_samples
        self.random_state = random_state

    def fit(self, model, y=None):
        rng = np.random.default_rng(self.random_state)
        budget = (float(self.budget_multiplier) + 1.0) * model.d
        self.plan_: MlmcPlan = plan_mlmc(model, budget, int(self.tuning_samples), rng, self.levels)
        self.n_ = int(self.plan_.n.sum())
        self.tuning_cost_ = float(self.tuning_samples) * float(self.plan_.m.sum())
        self.d_ = model.d
        return self

    def estimate(self, model, rng=None) -> EstimateResult:
        check_is_fitted(self, "plan_")
        return mlmc_estimate(model, self.plan_, rng)


class MonteCarloEstimator(BaseEstimator):
    """Plain Monte Carlo with a budget of ``(budget_multiplier + 1) * d`` input draws."""

    def __init__(self, budget_multiplier=10.0):
        self.budget_multiplier = budget_multiplier

    def fit(self, model, y=None):
        self.budget_ = (float(self.budget_multiplier) + 1.0) * model.d
        self.n_ = int(self.budget_ // model.d)
        self.tuning_cost_ = 0.0
        self.d_ = model.d
        return self

    def estimate(self, model, rng=None) -> EstimateResult:
        check_is_fitted(self, "budget_")
        return baseline_mc(model, self.budget_, rng)
