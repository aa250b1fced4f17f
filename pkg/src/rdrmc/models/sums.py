"""Additive models: ``f`` is a function of the sum of independent inputs."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .._validation import check_dimension
from . import _kernels as K
from .base import PrefixModel

SAMPLERS = {
    "normal": K.NORMAL,
    "uniform": K.UNIFORM,
    "ones": K.ONES,
    "rademacher": K.RADEMACHER,
}
# variance of one unscaled component
_SAMPLER_VARIANCE = {"normal": 1.0, "uniform": 1.0, "ones": 0.0, "rademacher": 1.0}


def call_payoff(strike: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    def payoff(s):
        return np.maximum(np.asarray(s, dtype=float) - strike, 0.0)

    payoff.__name__ = f"call_payoff(strike={strike})"
    return payoff


def _identity(s):
    return np.asarray(s, dtype=float)


class SumModel(PrefixModel):
    """``f(x) = output(sum_j sigma_j z_j)`` with iid standardized components ``z_j``.

    Parameters
    ----------
    d : int
        Number of inputs.
    sigma : array-like of shape (d,)
        Per-component scale, ordered as the inputs.
    sampler : {"normal", "uniform", "ones", "rademacher"}
        Law of the standardized components. ``"ones"`` is the degenerate
        sampler that always returns 1.
    output : callable or None
        Vectorized map applied to the sum. ``None`` means identity.
    scale : float
        Constant multiplying the sum before ``output``.
    """

    def __init__(self, d, sigma=None, sampler="normal", output=None, scale=1.0):
        self.d = check_dimension(d)
        sigma = np.ones(self.d) if sigma is None else np.array(sigma, dtype=float)
        if sigma.shape != (self.d,) or np.any(sigma <= 0) or not np.all(np.isfinite(sigma)):
            raise ValueError("sigma must be a positive vector of length d")
        if sampler not in SAMPLERS:
            raise ValueError(f"unknown component sampler {sampler!r}; choose from {sorted(SAMPLERS)}")
        self.sigma = sigma
        self.sampler = sampler
        self.output = output
        self.scale = float(scale)
        self.linear = output is None
        self._kind = SAMPLERS[sampler]
        self._reset()

    def _reset(self):
        self.components = np.zeros(self.d)
        self._sum = 0.0
        self._started = False

    def _f(self, s):
        s = self.scale * np.asarray(s, dtype=float)
        return s if self.output is None else self.output(s)

    def fresh_eval(self, rng):
        self.components = np.empty(self.d)
        self._sum = K.sum_fresh(rng, self._kind, self.sigma, self.components)
        self._started = True
        return float(self._f(self._sum)), float(self.d)

    def redraw_prefix(self, i, rng):
        i = self._check_index(i, 1)
        if not self._started:
            raise RuntimeError("call fresh_eval before redraw_prefix")
        self._sum = K.sum_redraw(rng, self._kind, self.sigma, self.components, i, self._sum)
        return float(self._f(self._sum)), float(i)

    def run_schedule(self, sizes, rng):
        sizes = np.ascontiguousarray(sizes, dtype=np.int64)
        sums = np.empty(sizes.size + 1)
        self.components = np.empty(self.d)
        self._sum = K.sum_run_schedule(rng, self._kind, self.sigma, self.components, sizes, sums)
        self._started = True
        return self._f(sums), float(self.d + sizes.sum())

    def sample_tails(self, i, size, rng):
        i = self._check_index(i)
        return K.sum_tails(rng, self._kind, self.sigma, i, int(size))

    def mixed_eval(self, i, tails, rng):
        i = self._check_index(i)
        tails = np.ascontiguousarray(tails, dtype=float)
        return self._f(K.sum_mixed(rng, self._kind, self.sigma, i, tails))

    def coupled_levels(self, m_fine, m_coarse, size, rng):
        m_fine = self._check_index(m_fine, 1)
        m_coarse = self._check_index(m_coarse)
        if m_coarse >= m_fine:
            raise ValueError("coarse level must be below the fine level")
        fine, coarse = K.sum_coupled(rng, self._kind, self.sigma, m_fine, m_coarse, int(size))
        coarse = self._f(coarse) if m_coarse > 0 else np.zeros(int(size))
        return self._f(fine), coarse

    def exact_c(self, i: int) -> float:
        """Exact ``C(i)``, the variance of ``E[f | U_{i+1..d}]``; linear output only."""
        if not self.linear:
            raise NotImplementedError("exact C is available only for a linear output")
        i = self._check_index(i)
        tail = float(np.sum(self.sigma[i:] ** 2))
        return self.scale**2 * _SAMPLER_VARIANCE[self.sampler] * tail

    def exact_c_profile(self) -> np.ndarray:
        return np.array([self.exact_c(i) for i in range(self.d + 1)])

    @property
    def mean(self) -> float | None:
        """Exact mean when the output is linear and the sampler centered."""
        if self.linear and self.sampler != "ones":
            return 0.0
        return None


class LipschitzSumModel(SumModel):
    """``f(x) = g(sum_j x_j)`` with ``x_j = sigma_j z_j`` and decreasing ``sigma``.

    ``g`` defaults to the call payoff ``max(s - strike, 0)``.
    """

    def __init__(self, d, sigma, g=None, strike=0.0, sampler="normal"):
        sigma = np.array(sigma, dtype=float)
        if np.any(np.diff(sigma) > 0):
            raise ValueError("sigma must be decreasing")
        self.strike = float(strike)
        output = call_payoff(self.strike) if g is None else (None if g == "identity" else g)
        if isinstance(output, str):
            raise ValueError(f"unknown output map {g!r}")
        super().__init__(d, sigma=sigma, sampler=sampler, output=output)

    def recommended_q(self) -> np.ndarray:
        """``q_i = sigma_{i+1} / sigma_1``."""
        return self.sigma / self.sigma[0]

    def c_bound(self, i: int) -> float:
        """Upper bound ``sum_{j>i} sigma_j^2`` on ``C(i)`` for a 1-Lipschitz map."""
        i = self._check_index(i)
        return _SAMPLER_VARIANCE[self.sampler] * float(np.sum(self.sigma[i:] ** 2))


def sum_model(d: int, component_sampler: str = "normal") -> SumModel:
    """Normalized sum ``d**-0.5 * sum_j x_j`` of iid inputs."""
    d = check_dimension(d)
    return SumModel(d, sampler=component_sampler, scale=1.0 / np.sqrt(d))


def lipschitz_sum_model(d: int, sigma=None, g=None, strike: float = 0.0, sigma_decay: float = 1.5,
                        component_sampler: str = "normal") -> LipschitzSumModel:
    """Lipschitz function of a sum with decreasing component scales.

    When ``sigma`` is omitted it defaults to ``j**-sigma_decay``.
    """
    d = check_dimension(d)
    if sigma is None:
        sigma = np.arange(1, d + 1, dtype=float) ** (-float(sigma_decay))
    return LipschitzSumModel(d, sigma, g=g, strike=strike, sampler=component_sampler)
