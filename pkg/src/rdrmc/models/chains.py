"""Markov chains driven by independent inputs, and their time-reversed prefix models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .._validation import check_dimension
from . import _kernels as K
from .base import PrefixModel

__all__ = [
    "CosineRate",
    "MarkovSpec",
    "ReversedChainModel",
    "reverse",
    "garch_model",
    "gtd1_model",
    "mtgi1_model",
    "threshold",
]


def threshold(z: float) -> Callable[[np.ndarray], np.ndarray]:
    """Indicator ``1{x > z}`` as a vectorized map."""

    def indicator(x):
        return (np.asarray(x, dtype=float) > z).astype(float)

    indicator.__name__ = f"threshold({z})"
    return indicator


def _identity(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class CosineRate:
    """Arrival rate ``(base + sum_k a_k cos(pi s / h_k))``, optionally damped by ``1 - 1/ln(s+2)``.

    ``terms`` holds ``(a_k, h_k)`` pairs. The default is the rate
    ``0.75 + 0.5 cos(pi s / 50)``.
    """

    base: float = 0.75
    terms: tuple = ((0.5, 50.0),)
    log_damped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(a), float(h)) for a, h in self.terms))
        if any(h == 0 for _, h in self.terms):
            raise ValueError("cosine half-periods must be nonzero")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        lam = np.full_like(s, self.base)
        for a, h in self.terms:
            lam = lam + a * np.cos(np.pi * s / h)
        if self.log_damped:
            lam = lam * (1.0 - 1.0 / np.log(s + 2.0))
        return lam

    def upper_bound(self) -> float:
        return self.base + sum(abs(a) for a, _ in self.terms)

    def lower_bound(self) -> float:
        """Lower bound of the undamped part; a damped rate below zero acts as zero."""
        return self.base - sum(abs(a) for a, _ in self.terms)

    def encode(self) -> np.ndarray:
        flat = [self.base, 1.0 if self.log_damped else 0.0, float(len(self.terms))]
        for a, h in self.terms:
            flat.extend((a, h))
        return np.array(flat)

    @classmethod
    def from_config(cls, spec) -> "CosineRate":
        if isinstance(spec, CosineRate):
            return spec
        if isinstance(spec, (int, float)):
            return cls(base=float(spec), terms=())
        if isinstance(spec, dict):
            return cls(
                base=float(spec.get("base", 0.75)),
                terms=tuple(tuple(t) for t in spec.get("terms", ((0.5, 50.0),))),
                log_damped=bool(spec.get("log_damped", False)),
            )
        raise ValueError(f"cannot build an arrival rate from {spec!r}")


@dataclass
class MarkovSpec:
    """A chain ``X_{j+1} = transition(j, X_j, Y_j)`` with independent drivers ``Y_j``.

    Built-in chains carry a ``kind`` code and a parameter vector so the
    numba kernels can run them; ``draw`` and ``transition`` remain callable
    from Python for step-by-step use. A user-defined chain supplies only
    ``draw(rng, j) -> y``, ``transition(j, x, y) -> x`` and ``output``, and
    runs through the pure-Python path.
    """

    name: str
    x0: float
    d: int
    output: Callable[[np.ndarray], np.ndarray] = _identity
    draw: Callable | None = None
    transition: Callable | None = None
    kind: int | None = None
    params: np.ndarray = field(default_factory=lambda: np.empty(0))
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.d = check_dimension(self.d)
        self.x0 = float(self.x0)
        self.params = np.ascontiguousarray(self.params, dtype=float)
        if self.kind is None:
            if self.draw is None or self.transition is None:
                raise ValueError("a custom chain needs both draw and transition")
        else:
            kind, params = self.kind, self.params
            self.draw = lambda rng, j: K.chain_draw(kind, rng, j, params)
            self.transition = lambda j, x, y: K.chain_transition(kind, j, x, y, params)

    @property
    def compiled(self) -> bool:
        return self.kind is not None

    def trajectory(self, rng) -> np.ndarray:
        """One path ``X_0..X_d``."""
        states = np.empty(self.d + 1)
        states[0] = self.x0
        if self.compiled:
            K.chain_advance(self.kind, rng, self.params, states, 0, self.d)
        else:
            for j in range(self.d):
                states[j + 1] = self.transition(j, states[j], self.draw(rng, j))
        return states


class ReversedChainModel(PrefixModel):
    """Prefix model over a chain with inputs in reverse time order, ``U_i = Y_{d-i}``.

    Redrawing the first i inputs resamples the last i drivers and recomputes
    ``X_{d-i+1}..X_d`` from the stored ``X_{d-i}``. The most recent drivers
    are thus the most frequently redrawn.

    With ``store_drivers=True`` every driver is kept, so the trajectory can
    be rechecked against the transition map; this runs step by step in
    Python and consumes the random stream exactly like the fast path.
    """

    def __init__(self, spec: MarkovSpec, store_drivers: bool = False):
        self.spec = spec
        self.d = spec.d
        self.store_drivers = bool(store_drivers)
        self._reset()

    def _reset(self):
        self.trajectory = np.empty(self.d + 1)
        self.trajectory[0] = self.spec.x0
        self.drivers: list | None = [None] * self.d if self.store_drivers else None
        self._started = False

    @property
    def _fast(self) -> bool:
        return self.spec.compiled and not self.store_drivers

    def _advance(self, j0: int, rng) -> None:
        if self._fast:
            K.chain_advance(self.spec.kind, rng, self.spec.params, self.trajectory, j0, self.d)
            return
        x = self.trajectory
        for j in range(j0, self.d):
            y = self.spec.draw(rng, j)
            if self.drivers is not None:
                self.drivers[j] = y
            x[j + 1] = self.spec.transition(j, x[j], y)

    def _value(self) -> float:
        return float(self.spec.output(np.array([self.trajectory[-1]]))[0])

    def fresh_eval(self, rng):
        self._advance(0, rng)
        self._started = True
        return self._value(), float(self.d)

    def redraw_prefix(self, i, rng):
        i = self._check_index(i, 1)
        if not self._started:
            raise RuntimeError("call fresh_eval before redraw_prefix")
        self._advance(self.d - i, rng)
        return self._value(), float(i)

    def run_schedule(self, sizes, rng):
        if not self._fast:
            return super().run_schedule(sizes, rng)
        sizes = np.ascontiguousarray(sizes, dtype=np.int64)
        finals = np.empty(sizes.size + 1)
        K.chain_run_schedule(self.spec.kind, rng, self.spec.params, self.trajectory, sizes, finals)
        self._started = True
        return self.spec.output(finals), float(self.d + sizes.sum())

    def inputs(self) -> list:
        """Stored inputs ``U_1..U_d`` (drivers in reverse time order)."""
        if self.drivers is None:
            raise RuntimeError("drivers are kept only with store_drivers=True")
        return self.drivers[::-1]

    def check_trajectory(self) -> bool:
        """Recompute every state from the stored drivers and compare exactly."""
        if self.drivers is None:
            raise RuntimeError("drivers are kept only with store_drivers=True")
        x = self.spec.x0
        if self.trajectory[0] != x:
            return False
        for j, y in enumerate(self.drivers):
            x = self.spec.transition(j, x, y)
            if x != self.trajectory[j + 1]:
                return False
        return True

    # batched hooks -------------------------------------------------------

    def _step_python(self, j, xs, rng):
        y = self.spec.draw(rng, j)
        for k in range(xs.size):
            xs[k] = self.spec.transition(j, xs[k], y)

    def sample_tails(self, i, size, rng):
        i = self._check_index(i)
        spec, size = self.spec, int(size)
        if spec.compiled:
            return K.chain_tails(spec.kind, rng, spec.params, spec.x0, self.d - i, size)
        out = np.full(size, spec.x0)
        for r in range(size):
            for j in range(self.d - i):
                out[r] = spec.transition(j, out[r], spec.draw(rng, j))
        return out

    def mixed_eval(self, i, tails, rng):
        i = self._check_index(i)
        spec = self.spec
        tails = np.ascontiguousarray(tails, dtype=float)
        if spec.compiled:
            finals = K.chain_mixed(spec.kind, rng, spec.params, self.d - i, self.d, tails)
        else:
            finals = tails.copy()
            for r in range(finals.shape[0]):
                for j in range(self.d - i, self.d):
                    self._step_python(j, finals[r], rng)
        return spec.output(finals)

    def coupled_levels(self, m_fine, m_coarse, size, rng):
        m_fine = self._check_index(m_fine, 1)
        m_coarse = self._check_index(m_coarse)
        if m_coarse >= m_fine:
            raise ValueError("coarse level must be below the fine level")
        spec, d, size = self.spec, self.d, int(size)
        if spec.compiled:
            fine, coarse = K.chain_coupled(spec.kind, rng, spec.params, spec.x0, d, m_fine, m_coarse, size)
        else:
            fine = np.empty(size)
            coarse = np.empty(size)
            for r in range(size):
                x = spec.x0
                for j in range(d - m_fine, d - m_coarse):
                    x = spec.transition(j, x, spec.draw(rng, j))
                pair = np.array([x, spec.x0])
                for j in range(d - m_coarse, d):
                    self._step_python(j, pair, rng)
                fine[r], coarse[r] = pair
        coarse_vals = spec.output(coarse) if m_coarse > 0 else np.zeros(size)
        return spec.output(fine), coarse_vals


def reverse(spec: MarkovSpec, store_drivers: bool = False) -> ReversedChainModel:
    """Prefix model whose input i is the driver of step ``d - i``."""
    return ReversedChainModel(spec, store_drivers=store_drivers)


def garch_model(w: float = 1.76e-6, alpha: float = 0.06, beta: float = 0.9, x0: float = 1e-4,
                z: float = 4.4e-5, d: int = 1250) -> MarkovSpec:
    """GARCH(1,1) variance recursion ``X' = w + alpha X Y^2 + beta X`` with Gaussian Y.

    The output is the exceedance indicator ``1{X_d > z}``.
    """
    if not (w > 0 and alpha > 0 and beta > 0 and alpha + beta < 1):
        raise ValueError("GARCH requires w, alpha, beta > 0 and alpha + beta < 1")
    return MarkovSpec(
        name="garch", x0=x0, d=d, output=threshold(z), kind=K.GARCH,
        params=np.array([w, alpha, beta]),
        info={"w": w, "alpha": alpha, "beta": beta, "x0": x0, "z": z},
    )


def _output_map(output: str, z: float):
    if output == "identity":
        return _identity
    if output == "threshold":
        return threshold(z)
    raise ValueError(f"unknown output {output!r}; use 'identity' or 'threshold'")


def gtd1_model(rate_fn: Callable | CosineRate | None = None, d: int = 10_000, output: str = "identity",
               z: float = 0.0) -> MarkovSpec:
    """Discrete-time queue ``X' = (X + A - 1)^+`` with ``A ~ Poisson(rate_fn(j+1))`` at step j.

    ``rate_fn`` maps an integer array of step indices ``1..d`` to rates; it
    defaults to ``0.75 + 0.5 cos(pi i / 50)``.
    """
    d = check_dimension(d)
    rate_fn = CosineRate() if rate_fn is None else rate_fn
    if isinstance(rate_fn, (dict, int, float)):
        rate_fn = CosineRate.from_config(rate_fn)
    lam = np.asarray(rate_fn(np.arange(1, d + 1)), dtype=float)
    if lam.shape != (d,) or np.any(lam <= 0) or not np.all(np.isfinite(lam)):
        raise ValueError("rate_fn must return d positive finite rates")
    return MarkovSpec(
        name="gtd1", x0=0.0, d=d, output=_output_map(output, z), kind=K.GTD1, params=lam,
        info={"rate": repr(rate_fn), "output": output, "z": z},
    )


_SERVICE_KINDS = {"pareto": K.PARETO, "exponential": K.EXPONENTIAL, "deterministic": K.DETERMINISTIC}


def mtgi1_model(rate_fn: CosineRate | dict | float | None = None, lam_star: float = 1.25, theta: float = 1e4,
                service: str = "pareto", service_param: float = 2.0, output: str = "threshold",
                threshold_level: float = 1.0, d: int | None = None) -> MarkovSpec:
    """Single-server queue with time-varying Poisson arrivals; state is the residual work.

    Step j covers the time interval ``(j*theta/d, (j+1)*theta/d]``. Arrivals
    come from thinning a rate-``lam_star`` Poisson process. Service laws:
    ``pareto`` with scale ``a`` (tail ``(1 + z/a)**-3``, mean ``a/2``),
    ``exponential`` with the given mean, or ``deterministic``.
    ``d`` defaults to ``ceil(theta)``.
    """
    rate = CosineRate() if rate_fn is None else CosineRate.from_config(rate_fn)
    if not theta > 0:
        raise ValueError("theta must be positive")
    if rate.upper_bound() > lam_star * (1 + 1e-12):
        raise ValueError(f"rate bound lam_star={lam_star} is below the rate supremum {rate.upper_bound()}")
    if rate.lower_bound() < 0:
        raise ValueError("arrival rate must stay nonnegative")
    if service not in _SERVICE_KINDS:
        raise ValueError(f"unknown service law {service!r}; choose from {sorted(_SERVICE_KINDS)}")
    if not service_param > 0:
        raise ValueError("service parameter must be positive")
    d = check_dimension(math.ceil(theta) if d is None else d)
    head = [lam_star, theta / d, float(_SERVICE_KINDS[service]), service_param]
    return MarkovSpec(
        name="mtgi1", x0=0.0, d=d, output=_output_map(output, threshold_level), kind=K.MTGI1,
        params=np.concatenate([head, rate.encode()]),
        info={"theta": theta, "lam_star": lam_star, "service": service, "service_param": service_param,
              "output": output, "threshold": threshold_level},
    )
