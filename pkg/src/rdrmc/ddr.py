"""Deterministic dimension reduction: redraw sizes from a divisibility schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_cost_profile, check_redraw_distribution, default_cost_profile
from .core import EstimateResult, _result_from_values

__all__ = ["MuSequence", "mu_sequence", "schedule_size", "schedule_sizes", "ddr_estimate", "ddr_cost",
           "naive_schedule"]

_GUARD = 1e-12


@dataclass(frozen=True)
class MuSequence:
    """Chain of periods ``mu_0 = 1 | mu_1 | ... | mu_{d-1}``; input i+1 is redrawn every ``mu_i`` iterations."""

    mu: np.ndarray

    @property
    def q_bar(self) -> np.ndarray:
        return 1.0 / self.mu.astype(float)

    @property
    def d(self) -> int:
        return int(self.mu.size)


def mu_sequence(q_hat) -> MuSequence:
    """``mu_i`` is the largest multiple of ``mu_{i-1}`` not exceeding ``1/q_hat_i``."""
    q_hat = check_redraw_distribution(q_hat)
    mu = [1]
    for qi in q_hat[1:]:
        ratio = 1.0 / (mu[-1] * qi)
        mu.append(mu[-1] * max(1, math.floor(ratio * (1 + _GUARD))))
    return MuSequence(np.array(mu, dtype=np.int64))


def schedule_size(k: int, mu: MuSequence) -> int:
    """Largest i in [1, d] such that ``mu_{i-1}`` divides k."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be a positive integer")
    return int(np.count_nonzero(k % mu.mu == 0))


def schedule_sizes(n_redraws: int, mu: MuSequence) -> np.ndarray:
    """Vectorized :func:`schedule_size` for ``k = 1..n_redraws``."""
    k = np.arange(1, int(n_redraws) + 1, dtype=np.int64)
    sizes = np.ones(k.size, dtype=np.int64)
    values, first = np.unique(mu.mu, return_index=True)
    # divisibility is nested, so the answer is the last index of the largest
    # period dividing k
    last = np.append(first[1:], mu.d)
    for v, stop in zip(values, last):
        sizes[k % v == 0] = stop
    return sizes


def ddr_cost(mu: MuSequence, n: int, t=None) -> float:
    """Deterministic cost ``t_d + sum_i floor((n-1)/mu_i) (t_{i+1} - t_i)``."""
    t = default_cost_profile(mu.d) if t is None else check_cost_profile(t, mu.d)
    return float(t[-1] + np.dot((int(n) - 1) // mu.mu, np.diff(t)))


def ddr_estimate(model, mu: MuSequence, n: int, rng=None, *, keep_values: bool = False) -> EstimateResult:
    """Reuse estimator with redraw sizes ``N_k`` from the divisibility schedule."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if mu.d != model.d:
        raise ValueError(f"mu has length {mu.d}, model dimension is {model.d}")
    rng = np.random.default_rng(rng)
    sizes = schedule_sizes(n - 1, mu)
    values, cost = model.run_schedule(sizes, rng)
    return _result_from_values(values, cost, keep_values)


def naive_schedule(q, n: int) -> np.ndarray:
    """Block schedule ``N_k = i`` for ``k in (n(1-q_{i-1}), n(1-q_i)]``, k = 1..n.

    Redraw frequencies match q on average but the variance of the resulting
    estimator does not shrink like 1/n; kept as a counterexample.
    """
    q = check_redraw_distribution(q)
    n = int(n)
    bounds = n * (1.0 - q)
    k = np.arange(1, n + 1)
    return np.searchsorted(bounds, k, side="left").astype(np.int64)
