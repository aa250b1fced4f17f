"""Model zoo: additive models and time-reversed Markov chains."""

from __future__ import annotations

from .base import PrefixModel
from .chains import (
    CosineRate,
    MarkovSpec,
    ReversedChainModel,
    garch_model,
    gtd1_model,
    mtgi1_model,
    reverse,
    threshold,
)
from .sums import LipschitzSumModel, SumModel, call_payoff, lipschitz_sum_model, sum_model

MODEL_NAMES = ("sum", "lipschitz_sum", "garch", "gtd1", "mtgi1")

_CHAIN_BUILDERS = {"garch": garch_model, "gtd1": gtd1_model, "mtgi1": mtgi1_model}


def make_spec(name: str, **params) -> MarkovSpec:
    """Chain specification by zoo name (chains only)."""
    try:
        builder = _CHAIN_BUILDERS[name]
    except KeyError:
        raise ValueError(f"{name!r} is not a Markov chain model; choose from {sorted(_CHAIN_BUILDERS)}") from None
    if name == "mtgi1" and "rate" in params:
        params["rate_fn"] = params.pop("rate")
    if name == "gtd1" and "rate" in params:
        params["rate_fn"] = CosineRate.from_config(params.pop("rate"))
    return builder(**params)


def make_model(name: str, **params) -> PrefixModel:
    """Prefix model by zoo name and keyword parameters.

    Unknown names and unexpected parameters raise ``ValueError``.
    """
    if name not in MODEL_NAMES:
        raise ValueError(f"unknown model {name!r}; choose from {list(MODEL_NAMES)}")
    try:
        if name == "sum":
            return sum_model(**params)
        if name == "lipschitz_sum":
            return lipschitz_sum_model(**params)
        return reverse(make_spec(name, **params))
    except TypeError as exc:
        raise ValueError(f"bad parameters for model {name!r}: {exc}") from None


__all__ = [
    "PrefixModel",
    "MarkovSpec",
    "ReversedChainModel",
    "CosineRate",
    "SumModel",
    "LipschitzSumModel",
    "sum_model",
    "lipschitz_sum_model",
    "garch_model",
    "gtd1_model",
    "mtgi1_model",
    "reverse",
    "threshold",
    "call_payoff",
    "make_model",
    "make_spec",
    "MODEL_NAMES",
]
