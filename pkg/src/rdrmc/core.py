"""Randomized dimension reduction: the estimator and its cost/variance functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ._validation import (
    check_cost_profile,
    check_dimension,
    check_redraw_distribution,
    check_variance_profile,
)

__all__ = [
    "IterationOutcome",
    "EstimateResult",
    "sample_redraw_size",
    "sample_redraw_sizes",
    "iterate_rdr",
    "rdr_estimate",
    "expected_iteration_cost",
    "variance_bound_rhs",
    "work_variance_product",
    "nu_star_from_c",
    "explicit_q",
    "choose_n",
    "EXPLICIT_FAMILIES",
]


@dataclass(frozen=True)
class IterationOutcome:
    value: float
    redraw_size: int
    cost_increment: float


@dataclass
class EstimateResult:
    """Output of one estimator run.

    ``estimate`` is the arithmetic mean of the iteration values (or, for the
    multilevel estimator, the sum of level means). ``per_iteration_values``
    is kept only when requested.
    """

    estimate: float
    iterations: int
    total_cost: float
    per_iteration_values: np.ndarray | None = None
    extra: dict = field(default_factory=dict)


def sample_redraw_size(q, u: float) -> int:
    """Return the N with ``q[N] <= u < q[N-1]`` (taking ``q[d] = 0``)."""
    q = np.asarray(q, dtype=float)
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must lie in [0, 1), got {u!r}")
    # number of entries strictly above u; q is decreasing so -q is sorted
    return int(np.searchsorted(-q, -u, side="left"))


def sample_redraw_sizes(q, u) -> np.ndarray:
    """Vectorized :func:`sample_redraw_size` over an array of uniforms."""
    q = np.asarray(q, dtype=float)
    return np.searchsorted(-q, -np.asarray(u, dtype=float), side="left").astype(np.int64)


def _draw_schedule(q: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    if n <= 1:
        return np.empty(0, dtype=np.int64)
    return sample_redraw_sizes(q, rng.random(n - 1))


def iterate_rdr(model, q, n: int, rng) -> Iterator[IterationOutcome]:
    """Run the estimator one iteration at a time through the model's per-step API.

    Redraw sizes are drawn up front, before any model input, so this
    generator consumes ``rng`` exactly like :func:`rdr_estimate`.
    """
    rng = np.random.default_rng(rng)
    q = check_redraw_distribution(q, model.d)
    sizes = _draw_schedule(q, int(n), rng)
    value, cost = model.fresh_eval(rng)
    yield IterationOutcome(float(value), model.d, float(cost))
    for size in sizes:
        value, cost = model.redraw_prefix(int(size), rng)
        yield IterationOutcome(float(value), int(size), float(cost))


def rdr_estimate(model, q, n: int, rng=None, *, keep_values: bool = False) -> EstimateResult:
    """Randomized dimension reduction estimate of ``E f(U)`` with n iterations.

    Iteration 1 draws a full input vector; iteration k+1 redraws the first
    ``N_k`` inputs with ``P(N_k > i) = q[i]`` and keeps the rest.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(rng)
    q = check_redraw_distribution(q, model.d)
    sizes = _draw_schedule(q, n, rng)
    values, cost = model.run_schedule(sizes, rng)
    return _result_from_values(values, cost, keep_values, redraw_sizes=sizes if keep_values else None)


def _result_from_values(values, cost, keep_values, **extra) -> EstimateResult:
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise FloatingPointError(f"model returned a non-finite value at iteration {bad + 1}")
    extra = {k: v for k, v in extra.items() if v is not None}
    return EstimateResult(
        estimate=float(values.mean()),
        iterations=int(values.size),
        total_cost=float(cost),
        per_iteration_values=values if keep_values else None,
        extra=extra,
    )


def expected_iteration_cost(q, t) -> float:
    """Expected cost of one reuse iteration, ``sum_i q_i (t_{i+1} - t_i)``."""
    q = check_redraw_distribution(q)
    t = check_cost_profile(t, q.size)
    return float(np.dot(q, np.diff(t)))


def variance_bound_rhs(q, nu_star) -> float:
    """Limit of ``n var(f_n)``: ``sum_i (nu*_i - nu*_{i+1}) / q_i``."""
    q = check_redraw_distribution(q)
    nu_star = check_variance_profile(nu_star, q.size, monotone=False)
    return float(np.sum(-np.diff(nu_star) / q))


def work_variance_product(q, t, nu) -> float:
    """Work-normalized variance ``R(q; t, nu)``.

    ``nu`` may be any length-(d+1) profile ending in zero; monotonicity is
    not required since the functional is defined for the doubled profile too.
    """
    return expected_iteration_cost(q, t) * variance_bound_rhs(q, nu)


def nu_star_from_c(c) -> np.ndarray:
    """Doubled profile: first entry kept, the rest multiplied by two."""
    c = check_variance_profile(c)
    out = 2.0 * c
    out[0] = c[0]
    return out


def _power_law(d, gamma):
    if not gamma < 0:
        raise ValueError(f"power_law requires gamma < 0, got {gamma!r}")
    return (np.arange(1, d + 1, dtype=float)) ** ((gamma - 1.0) / 2.0)


def _convex_profile(d, t, nu):
    t = check_cost_profile(t, d)
    nu = check_variance_profile(nu, d)
    theta = np.diff(nu) / np.diff(t)
    scale = np.max(np.abs(theta))
    if not theta[0] < 0:
        raise ValueError("convex_profile requires nu[0] > nu[1] (theta[0] < 0)")
    drops = np.flatnonzero(np.diff(theta) < -1e-12 * scale)
    if drops.size:
        i = int(drops[0])
        raise ValueError(
            f"convex_profile requires increasing slopes theta; theta[{i}]={theta[i]!r} > theta[{i + 1}]={theta[i + 1]!r}"
        )
    if not theta[-1] < 0:
        raise ValueError("convex_profile requires nu[d-1] > 0 (theta[d-1] < 0)")
    return np.minimum(1.0, np.sqrt(theta / theta[0]))


def _sqrt_c(d, t, c):
    t = check_cost_profile(t, d)
    c = check_variance_profile(c, d)
    if not c[d - 1] > 0:
        raise ValueError("sqrt_c requires C[d-1] > 0")
    return np.sqrt(t[1] * c[:d] / (t[1:] * c[0]))


def _log_optimal(d, t=None):
    t = np.arange(d + 1, dtype=float) if t is None else check_cost_profile(t, d)
    return t[1] / t[1:]


def _harmonic(d):
    return 1.0 / np.arange(1, d + 1, dtype=float)


EXPLICIT_FAMILIES = {
    "power_law": _power_law,
    "convex_profile": _convex_profile,
    "sqrt_c": _sqrt_c,
    "log_optimal": _log_optimal,
    "harmonic": _harmonic,
}


def explicit_q(family: str, d: int, **params) -> np.ndarray:
    """Closed-form redraw distributions.

    Families and their parameters:

    * ``power_law(gamma)``: ``(i+1)**((gamma-1)/2)``, gamma < 0
    * ``convex_profile(t, nu)``: ``sqrt(theta_i/theta_0)`` for a profile
      whose slopes are already increasing
    * ``sqrt_c(t, c)``: ``sqrt(t_1 C_i / (t_{i+1} C_0))``
    * ``log_optimal(t=None)``: ``t_1 / t_{i+1}``
    * ``harmonic``: ``1/(i+1)``
    """
    d = check_dimension(d)
    try:
        builder = EXPLICIT_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown q family {family!r}; choose from {sorted(EXPLICIT_FAMILIES)}") from None
    q = np.asarray(builder(d, **params), dtype=float)
    q[0] = 1.0
    return check_redraw_distribution(q, d)


def choose_n(d: int, T: float, budget_multiplier: float = 10.0) -> int:
    """Iteration count giving an expected reuse cost of ``budget_multiplier * d``."""
    if not T > 0:
        raise ValueError(f"expected iteration cost must be positive, got {T!r}")
    return max(2, 1 + int(math.floor(budget_multiplier * d / T + 0.5)))
