"""Multilevel Monte Carlo over truncated input vectors."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_dimension
from .core import EstimateResult

__all__ = ["MlmcPlan", "default_levels", "estimate_level_stats", "allocate_samples", "plan_mlmc", "mlmc_estimate"]


@dataclass
class MlmcPlan:
    """Levels ``m`` (strictly increasing, ending at d), sample counts ``n``,
    level variances ``V`` and level costs ``that``."""

    m: np.ndarray
    n: np.ndarray
    V: np.ndarray
    that: np.ndarray

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.int64)
        self.n = np.asarray(self.n, dtype=np.int64)
        self.V = np.asarray(self.V, dtype=float)
        self.that = np.asarray(self.that, dtype=float)
        if self.m.ndim != 1 or self.m.size == 0 or np.any(np.diff(self.m) <= 0) or self.m[0] < 1:
            raise ValueError("levels must be strictly increasing positive integers")
        if not (self.n.shape == self.V.shape == self.that.shape == self.m.shape):
            raise ValueError("plan vectors must all have one entry per level")
        if np.any(self.n < 1):
            raise ValueError("every level needs at least one sample")

    @property
    def L(self) -> int:
        return int(self.m.size)

    @property
    def expected_cost(self) -> float:
        return float(np.dot(self.n, self.that))

    @property
    def predicted_variance(self) -> float:
        return float(np.sum(self.V / self.n))

    def to_dict(self) -> dict:
        return {"L": self.L, "m": self.m.tolist(), "n": self.n.tolist(), "V": self.V.tolist(),
                "that": self.that.tolist()}


def default_levels(d: int) -> tuple[int, np.ndarray]:
    """``L = floor(log2 d) + 1`` levels with ``m_l = floor(2**(l-L) d)``."""
    d = check_dimension(d)
    if d < 2:
        raise ValueError("multilevel needs d >= 2")
    L = d.bit_length()
    return L, np.array([d >> (L - l) for l in range(1, L + 1)], dtype=np.int64)


def _coarse_levels(m: np.ndarray) -> np.ndarray:
    return np.concatenate(([0], m[:-1]))


def estimate_level_stats(model, m, samples: int = 1000, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """Sample variances of the coupled level differences and the level costs (``m_l`` draws each)."""
    rng = np.random.default_rng(rng)
    m = np.asarray(m, dtype=np.int64)
    if m[-1] != model.d:
        raise ValueError(f"finest level must equal d={model.d}, got {m[-1]}")
    V = np.empty(m.size)
    for l, (fine, coarse) in enumerate(zip(m, _coarse_levels(m))):
        hi, lo = model.coupled_levels(int(fine), int(coarse), int(samples), rng)
        V[l] = np.var(hi - lo, ddof=1)
    return V, m.astype(float)


def _round_half_up(x):
    return np.floor(np.asarray(x) + 0.5).astype(np.int64)


def allocate_samples(V, that, budget: float, tol: float = 0.01) -> np.ndarray:
    """Counts ``n_l = max(1, round(lam * sqrt(V_l / that_l)))`` with total cost closest to ``budget``.

    ``lam`` is found by bisection. A ``RuntimeWarning`` is issued when the
    rounding steps leave the cost more than ``tol`` (relative) off budget.
    """
    V = np.asarray(V, dtype=float)
    that = np.asarray(that, dtype=float)
    if np.any(V < 0) or np.any(that <= 0):
        raise ValueError("need V >= 0 and positive level costs")
    w = np.sqrt(V / that)

    def counts(lam):
        return np.maximum(1, _round_half_up(lam * w))

    def cost(lam):
        return float(np.dot(counts(lam), that))

    if cost(0.0) >= budget or not np.any(w > 0):
        return counts(0.0)
    lo, hi = 0.0, 1.0
    while cost(hi) < budget:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cost(mid) < budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    below, above = cost(lo), cost(hi)
    best, spent = (counts(lo), below) if budget - below < above - budget else (counts(hi), above)
    if abs(spent - budget) > tol * budget:
        warnings.warn(f"allocated cost {spent:g} misses the budget {budget:g} by more than {tol:.0%}",
                      RuntimeWarning, stacklevel=2)
    return best


def plan_mlmc(model, budget: float, samples: int = 1000, rng=None, levels=None) -> MlmcPlan:
    """Levels, pilot variances and a budget-matched allocation in one call."""
    m = default_levels(model.d)[1] if levels is None else np.asarray(levels, dtype=np.int64)
    V, that = estimate_level_stats(model, m, samples, rng)
    return MlmcPlan(m=m, n=allocate_samples(V, that, budget), V=V, that=that)


def mlmc_estimate(model, plan: MlmcPlan, rng=None, *, keep_values: bool = False) -> EstimateResult:
    """Sum of independent level means of coupled differences ``phi_l - phi_{l-1}``."""
    rng = np.random.default_rng(rng)
    if plan.m[-1] != model.d:
        raise ValueError("plan does not match the model dimension")
    means = np.empty(plan.L)
    for l, (fine, coarse) in enumerate(zip(plan.m, _coarse_levels(plan.m))):
        hi, lo = model.coupled_levels(int(fine), int(coarse), int(plan.n[l]), rng)
        diff = hi - lo
        if not np.all(np.isfinite(diff)):
            raise FloatingPointError(f"non-finite level difference at level {l + 1}")
        means[l] = diff.mean()
    return EstimateResult(
        estimate=float(means.sum()),
        iterations=int(plan.n.sum()),
        total_cost=float(np.dot(plan.n, plan.m)),
        per_iteration_values=means if keep_values else None,
        extra={"level_means": means, "n": plan.n.copy()},
    )
