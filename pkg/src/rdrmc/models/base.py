"""The prefix-redrawable model interface."""

from __future__ import annotations

import copy
from abc import ABC, abstractmethod

import numpy as np


class PrefixModel(ABC):
    """A function ``f`` of d ordered random inputs ``U_1..U_d``.

    The model keeps one current input vector. Besides a full fresh draw it
    can redraw only the first ``i`` inputs, which is the operation the
    reuse estimators are built on. Input 1 is the most frequently redrawn.

    Costs are reported in input-draw units: a fresh evaluation costs d and
    a prefix redraw of size i costs i.

    Subclasses implement the per-step operations plus three batched hooks
    used by tuning and by the multilevel estimator:

    ``sample_tails(i, size, rng)``
        ``size`` independent summaries of the suffix ``U_{i+1}..U_d``.
    ``mixed_eval(i, tails, rng)``
        for each row of ``tails`` (shape ``(size, k)``), draw one fresh
        prefix ``U_1..U_i`` and evaluate ``f`` on it joined with each of
        the k suffixes in that row.
    ``coupled_levels(m_fine, m_coarse, size, rng)``
        ``size`` pairs ``(phi_fine, phi_coarse)`` where ``phi_m`` evaluates
        ``f`` on ``U_1..U_m`` with the remaining inputs set to the model's
        fill value, both members of a pair sharing the same inputs. A
        coarse index of 0 yields ``phi = 0``.
    """

    d: int

    @abstractmethod
    def fresh_eval(self, rng) -> tuple[float, float]:
        """Draw a full input vector; return ``(f, cost)``."""

    @abstractmethod
    def redraw_prefix(self, i: int, rng) -> tuple[float, float]:
        """Redraw inputs ``1..i`` and keep the rest; return ``(f, cost)``."""

    @abstractmethod
    def sample_tails(self, i: int, size: int, rng) -> np.ndarray: ...

    @abstractmethod
    def mixed_eval(self, i: int, tails: np.ndarray, rng) -> np.ndarray: ...

    @abstractmethod
    def coupled_levels(self, m_fine: int, m_coarse: int, size: int, rng) -> tuple[np.ndarray, np.ndarray]: ...

    def run_schedule(self, sizes, rng) -> tuple[np.ndarray, float]:
        """Fresh evaluation followed by one prefix redraw per entry of ``sizes``.

        Returns the ``len(sizes) + 1`` values and the total cost.
        """
        values = np.empty(len(sizes) + 1)
        values[0], total = self.fresh_eval(rng)
        for k, size in enumerate(sizes, start=1):
            values[k], cost = self.redraw_prefix(int(size), rng)
            total += cost
        return values, float(total)

    def truncated_eval(self, m: int, rng) -> float:
        """``f(U_1..U_m, fill, ..., fill)`` for one fresh draw of the first m inputs."""
        fine, _ = self.coupled_levels(int(m), 0, 1, rng)
        return float(fine[0])

    def sample_iid(self, size: int, rng) -> np.ndarray:
        """``size`` independent values of ``f(U)``."""
        tails = self.sample_tails(self.d, size, rng)
        return self.mixed_eval(self.d, tails[:, None], rng)[:, 0]

    def clone(self):
        """Independent copy sharing parameters but no current input vector."""
        other = copy.copy(self)
        other._reset()
        return other

    def _reset(self) -> None:
        pass

    def _check_index(self, i: int, low: int = 0) -> int:
        i = int(i)
        if not low <= i <= self.d:
            raise ValueError(f"index {i} outside [{low}, {self.d}]")
        return i
