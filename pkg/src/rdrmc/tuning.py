"""Choosing the redraw distribution: lower convex hull, optimal q, and the data-driven tuner."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._validation import check_cost_profile, check_variance_profile, default_cost_profile
from .core import expected_iteration_cost, work_variance_product

__all__ = [
    "HullResult",
    "TunedPlan",
    "DegenerateVarianceError",
    "lower_hull",
    "optimal_q",
    "estimate_c",
    "estimate_c_covariance",
    "auto_tune",
    "grid_search_q",
    "tuning_indices",
]


class DegenerateVarianceError(ValueError):
    """Raised when the estimated variance of f is not positive."""


@dataclass
class HullResult:
    nu_prime: np.ndarray
    support: np.ndarray
    theta: np.ndarray
    vertices: np.ndarray


@dataclass
class TunedPlan:
    """Result of :func:`auto_tune`.

    ``nu_proxy`` is the repaired proxy for the doubled variance profile
    (decreasing from index 1 on, with ``nu_0 >= nu_1 / 2``) and ``nu_prime``
    its lower hull. ``ci_estimates`` maps each tuned index i to
    ``(C_hat(i), standard_error)``. ``tuning_cost`` is in input-draw units.
    ``T`` is the expected iteration cost of the final q; ``floor_T`` is the
    cost before flooring, which sets the floor.
    """

    q: np.ndarray
    T: float
    predicted_R: float
    nu_proxy: np.ndarray
    nu_prime: np.ndarray
    ci_estimates: dict
    tuning_cost: float
    floor_T: float = float("nan")
    t: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "q": self.q.tolist(),
            "T": self.T,
            "predicted_R": self.predicted_R,
            "nu_proxy": self.nu_proxy.tolist(),
            "nu_prime": self.nu_prime.tolist(),
            "ci_estimates": {str(i): list(v) for i, v in self.ci_estimates.items()},
            "tuning_cost": self.tuning_cost,
            "floor_T": self.floor_T,
        }


def _cross(t, nu, o, a, b):
    return (t[a] - t[o]) * (nu[b] - nu[o]) - (nu[a] - nu[o]) * (t[b] - t[o])


def _hull(t: np.ndarray, nu: np.ndarray) -> HullResult:
    # monotone chain over points already sorted by t; drop a point unless it
    # makes a strict left turn, so collinear points leave the stack
    stack = [0]
    for j in range(1, t.size):
        while len(stack) >= 2 and _cross(t, nu, stack[-2], stack[-1], j) <= 0:
            stack.pop()
        stack.append(j)
    nu_prime = nu.copy()
    for a, b in zip(stack[:-1], stack[1:]):
        if b > a + 1:
            slope = (nu[b] - nu[a]) / (t[b] - t[a])
            nu_prime[a + 1 : b] = nu[a] + slope * (t[a + 1 : b] - t[a])
    theta = np.diff(nu_prime) / np.diff(t)
    scale = max(float(np.max(np.abs(nu))), np.finfo(float).tiny)
    on_hull = np.abs(nu - nu_prime) <= 1e-12 * scale
    on_hull[stack] = True
    return HullResult(nu_prime, np.flatnonzero(on_hull), theta, np.array(stack))


def lower_hull(t, nu) -> HullResult:
    """Lower convex hull of the points ``(t_i, nu_i)``, evaluated at every ``t_i``.

    ``nu`` need not be monotone. ``theta`` holds the d hull slopes, which
    increase with i. ``vertices`` are the hull corners; ``support`` is every
    index where the hull touches the profile.
    """
    nu = check_variance_profile(nu, monotone=False)
    t = check_cost_profile(t, nu.size - 1)
    return _hull(t, nu)


def _q_from_theta(theta: np.ndarray) -> np.ndarray:
    q = np.sqrt(np.clip(theta / theta[0], 0.0, 1.0))
    q[0] = 1.0
    # equal slopes can differ in the last bit; keep q monotone
    return np.minimum.accumulate(q)


def _optimal_value(t: np.ndarray, nu_prime: np.ndarray) -> float:
    return float(np.sum(np.sqrt(np.clip(-np.diff(nu_prime), 0.0, None) * np.diff(t))) ** 2)


def optimal_q(t, nu) -> tuple[np.ndarray, float]:
    """Minimizer of ``R(q; t, nu)`` over valid q and the minimum value.

    ``q_i = sqrt(theta_i / theta_0)`` from the hull slopes; the minimum is
    ``(sum_i sqrt((nu'_i - nu'_{i+1})(t_{i+1} - t_i)))**2``.
    """
    nu = check_variance_profile(nu, monotone=False)
    t = check_cost_profile(t, nu.size - 1)
    if np.any(nu[:-1] <= 0):
        i = int(np.flatnonzero(nu[:-1] <= 0)[0])
        raise ValueError(f"nu[{i}] is zero; only nu[d] may vanish (repair the profile first)")
    hull = _hull(t, nu)
    return _q_from_theta(hull.theta), _optimal_value(t, hull.nu_prime)


def estimate_c(model, i: int, samples: int, rng=None) -> tuple[float, float]:
    """Control-variate estimate of ``C(i)`` with its standard error.

    Each sample uses two prefixes P, P' and three suffixes A, B, B' and
    averages ``(f(P,A) - f(P,B)) * (f(P',A) - f(P',B'))``.
    """
    rng = np.random.default_rng(rng)
    i, samples = int(i), int(samples)
    if not 0 <= i <= model.d - 1:
        raise ValueError(f"i must lie in [0, d-1], got {i}")
    if samples < 2:
        raise ValueError("need at least two samples")
    a = model.sample_tails(i, samples, rng)
    b = model.sample_tails(i, samples, rng)
    b2 = model.sample_tails(i, samples, rng)
    first = model.mixed_eval(i, np.column_stack((a, b)), rng)
    second = model.mixed_eval(i, np.column_stack((a, b2)), rng)
    prod = (first[:, 0] - first[:, 1]) * (second[:, 0] - second[:, 1])
    return float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(samples))


def estimate_c_covariance(model, i: int, samples: int, rng=None) -> tuple[float, float]:
    """Plain covariance estimate of ``C(i)``: two prefixes sharing one suffix.

    Kept as an independent cross-check of :func:`estimate_c`.
    """
    rng = np.random.default_rng(rng)
    samples = int(samples)
    a = model.sample_tails(int(i), samples, rng)
    x = model.mixed_eval(int(i), a[:, None], rng)[:, 0]
    y = model.mixed_eval(int(i), a[:, None], rng)[:, 0]
    prod = (x - x.mean()) * (y - y.mean())
    return float(prod.sum() / (samples - 1)), float(prod.std(ddof=1) / math.sqrt(samples))


def tuning_indices(d: int) -> list[int]:
    """Indices i in [0, d-1] with i+1 a power of two."""
    out, k = [], 1
    while k - 1 <= d - 1:
        out.append(k - 1)
        k *= 2
    return out


def auto_tune(model, t=None, tuning_samples: int = 1000, rng=None) -> TunedPlan:
    """Estimate the variance profile at a geometric set of indices and optimize q.

    1. estimate ``C(i)`` for i+1 a power of two;
    2. build the proxy ``nu_0 = C(0)``, ``nu_i = 2 C(j)`` with j the largest
       tuned index not above i, ``nu_d = 0``;
    3. repair monotonicity backwards, then ``nu_0 = max(nu_0, nu_1/2)``;
    4. take ``q = sqrt(theta_i/theta_0)`` from the hull of the proxy;
    5. floor ``q_i`` at ``T / (t_{i+1} ln(t_d/t_1))`` (capped at 1).
    """
    d = model.d
    if d < 2:
        raise ValueError("tuning needs d >= 2")
    t = default_cost_profile(d) if t is None else check_cost_profile(t, d)
    rng = np.random.default_rng(rng)
    indices = tuning_indices(d)
    estimates = {i: estimate_c(model, i, tuning_samples, rng) for i in indices}

    nu = np.zeros(d + 1)
    nu[0] = estimates[0][0]
    j = 0
    for i in range(1, d):
        if i in estimates:
            j = i
        nu[i] = 2.0 * estimates[j][0]
    for i in range(d - 1, 0, -1):
        nu[i] = max(nu[i], nu[i + 1])
    nu[0] = max(nu[0], nu[1] / 2.0)
    if not nu[0] > 0:
        raise DegenerateVarianceError(
            f"estimated var f = {estimates[0][0]:.3g} is not positive; f looks constant at tuning precision"
        )

    hull = _hull(t, nu)
    q = _q_from_theta(hull.theta)
    T = float(np.dot(q, np.diff(t)))
    if t[d] > t[1] * (1 + 1e-12):
        floor = T / (t[1:] * math.log(t[d] / t[1]))
        q = np.minimum(1.0, np.maximum(q, floor))
    q[0] = 1.0
    return TunedPlan(
        q=q,
        T=expected_iteration_cost(q, t),
        predicted_R=work_variance_product(q, t, hull.nu_prime),
        nu_proxy=nu,
        nu_prime=hull.nu_prime,
        ci_estimates=estimates,
        tuning_cost=float(3 * d * tuning_samples * len(indices)),
        floor_T=T,
        t=t,
    )


@lru_cache(maxsize=16)
def _monotone_index_tuples(length: int, resolution: int) -> np.ndarray:
    combos = itertools.combinations_with_replacement(range(resolution), length)
    flat = np.fromiter(itertools.chain.from_iterable(combos), dtype=np.int16)
    return flat.reshape(-1, length)


def grid_search_q(t, nu, grid_resolution: int = 40, q_min: float = 1e-3) -> tuple[np.ndarray, float]:
    """Exhaustive minimization of ``R(q; t, nu)`` over decreasing q on a geometric grid.

    The grid has ``grid_resolution`` points from 1 down to ``q_min``.
    Meant as an oracle at tiny d only.
    """
    nu = check_variance_profile(nu, monotone=False)
    d = nu.size - 1
    t = check_cost_profile(t, d)
    if d > 6:
        raise ValueError(f"grid search supports d <= 6, got d={d}")
    if not 2 <= grid_resolution <= 50:
        raise ValueError("grid_resolution must lie in [2, 50]")
    grid = np.geomspace(1.0, q_min, int(grid_resolution))
    dt, dnu = np.diff(t), -np.diff(nu)
    if d == 1:
        return np.ones(1), float(dt[0] * dnu[0])
    cand = grid[_monotone_index_tuples(d - 1, int(grid_resolution))]
    cost = dt[0] + cand @ dt[1:]
    var = dnu[0] + (dnu[1:] / cand).sum(axis=1)
    r = cost * var
    best = int(np.argmin(r))
    return np.concatenate(([1.0], cand[best])), float(r[best])
