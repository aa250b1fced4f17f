"""Input validation for redraw distributions, cost profiles and variance profiles.

The three profile types are plain 1-D float arrays. These helpers play the
role of ``sklearn.utils.check_array``: they coerce, validate and return a
fresh array, raising ``ValueError`` with the violated condition in the text.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_redraw_distribution",
    "check_cost_profile",
    "check_variance_profile",
    "check_dimension",
    "default_cost_profile",
]


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float, copy=True)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_dimension(d) -> int:
    if isinstance(d, (bool, np.bool_)) or int(d) != d or int(d) < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def check_redraw_distribution(q, d: int | None = None) -> np.ndarray:
    """Validate a redraw distribution ``q`` of length d.

    Requires ``q[0] == 1``, weak decrease and ``q[-1] > 0``. The implicit
    ``q_d = 0`` is never stored.
    """
    q = _as_vector(q, "q")
    if d is not None and q.size != d:
        raise ValueError(f"q has length {q.size}, expected {d}")
    if q[0] != 1.0:
        raise ValueError(f"q[0] must equal 1 exactly, got {q[0]!r}")
    if np.any(np.diff(q) > 0):
        i = int(np.flatnonzero(np.diff(q) > 0)[0])
        raise ValueError(f"q must be weakly decreasing; q[{i}]={q[i]!r} < q[{i + 1}]={q[i + 1]!r}")
    if q[-1] <= 0:
        raise ValueError(f"q[d-1] must be positive, got {q[-1]!r}")
    return q


def check_cost_profile(t, d: int | None = None) -> np.ndarray:
    """Validate a cost profile of length d+1 with ``t[0] == 0`` and strict increase."""
    t = _as_vector(t, "t")
    if t.size < 2:
        raise ValueError("cost profile needs at least two entries (d >= 1)")
    if d is not None and t.size != d + 1:
        raise ValueError(f"t has length {t.size}, expected {d + 1}")
    if t[0] != 0.0:
        raise ValueError(f"t[0] must be 0, got {t[0]!r}")
    if np.any(np.diff(t) <= 0):
        i = int(np.flatnonzero(np.diff(t) <= 0)[0])
        raise ValueError(f"t must be strictly increasing; t[{i}]={t[i]!r} >= t[{i + 1}]={t[i + 1]!r}")
    return t


def check_variance_profile(nu, d: int | None = None, *, monotone: bool = True) -> np.ndarray:
    """Validate a variance profile of length d+1 ending in 0.

    ``monotone=False`` is the relaxed form used for the doubled profile
    ``nu_star``, which need not be decreasing.
    """
    nu = _as_vector(nu, "nu")
    if nu.size < 2:
        raise ValueError("variance profile needs at least two entries (d >= 1)")
    if d is not None and nu.size != d + 1:
        raise ValueError(f"nu has length {nu.size}, expected {d + 1}")
    if nu[-1] != 0.0:
        raise ValueError(f"nu[d] must be 0, got {nu[-1]!r}")
    if np.any(nu < 0):
        raise ValueError("nu must be nonnegative")
    if monotone and np.any(np.diff(nu) > 0):
        i = int(np.flatnonzero(np.diff(nu) > 0)[0])
        raise ValueError(
            f"nu must be decreasing; nu[{i}]={nu[i]!r} < nu[{i + 1}]={nu[i + 1]!r} "
            "(repair raw estimates with a backward running max first)"
        )
    return nu


def default_cost_profile(d: int) -> np.ndarray:
    """Unit cost per redrawn input: ``t_i = i``."""
    return np.arange(check_dimension(d) + 1, dtype=float)
