"""Reference estimators: plain Monte Carlo and the single-path periodic average."""

from __future__ import annotations

import math

import numpy as np

from .core import EstimateResult, _result_from_values

__all__ = ["baseline_mc", "long_run_average"]


def baseline_mc(model, budget: float, rng=None, *, keep_values: bool = False) -> EstimateResult:
    """Average of ``floor(budget / d)`` independent evaluations."""
    n = int(math.floor(budget / model.d))
    if n < 1:
        raise ValueError(f"budget {budget!r} is below the cost of one evaluation ({model.d})")
    rng = np.random.default_rng(rng)
    values = model.sample_iid(n, rng)
    return _result_from_values(values, n * model.d, keep_values)


def long_run_average(spec, period: int, rng=None) -> EstimateResult:
    """Average of the output at times ``d, d - period, d - 2 period, ...`` along one path.

    Biased unless the chain is stationary with the right period; it is a
    baseline, not an estimator of the time-d expectation. Accepts a chain
    specification or a reversed chain model.
    """
    spec = getattr(spec, "spec", spec)
    period = int(period)
    if period < 1 or period >= spec.d:
        raise ValueError(f"period must lie in [1, d-1], got {period} with d={spec.d}")
    rng = np.random.default_rng(rng)
    states = spec.trajectory(rng)
    times = spec.d - period * np.arange(math.ceil(spec.d / period))
    result = _result_from_values(spec.output(states[times]), spec.d, False)
    result.extra["times"] = times
    return result
