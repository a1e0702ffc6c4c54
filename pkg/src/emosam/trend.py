"""Trend/cycle decomposition of short discrimination series and trigger rules.

The smoother splits a series y into a trend G and a cycle C = y - G by
penalising the squared second differences of the trend:

    minimise  sum (y_t - G_t)^2 + smoothing * sum (d2 G_t)^2

which has the exact solution of the pentadiagonal system
(I + smoothing * D'D) G = y, with D the (n-2) x n second-difference
operator. Series of length one or two carry no curvature, so the trend is
the series itself.

Three policies decide when weight optimization should run: a rising-trend
test on the smoothed history, a plain last-step increase test, and an
always-on policy used for ablations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import spsolve

__all__ = [
    "HPDecomposition",
    "hp_filter",
    "DiscriminationHistory",
    "should_trigger_hp",
    "should_trigger_previous",
    "should_trigger_every",
]

DEFAULT_SMOOTHING = 100.0
DEFAULT_TREND_THRESHOLD = 0.10
DEFAULT_MIN_INCREASE = 0.07
HISTORY_CAPACITY = 5


@dataclass(frozen=True)
class HPDecomposition:
    trend: np.ndarray
    cycle: np.ndarray
    smoothing: float


def hp_filter(series: Sequence[float], smoothing: float = DEFAULT_SMOOTHING) -> HPDecomposition:
    """Exact trend/cycle split of a series.

    Parameters
    ----------
    series : sequence of float
        Observed values, at least one.
    smoothing : float
        Positive penalty on trend curvature. Near zero the trend hugs the
        series; large values approach the least-squares line.
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("series must be a non-empty vector")
    if not np.isfinite(y).all():
        raise ValueError("series must be finite")
    if not smoothing > 0.0:
        raise ValueError("smoothing must be positive")
    n = y.size
    if n <= 2:
        trend = y.copy()
    else:
        eye = sparse.eye(n, format="csc")
        offsets = np.array([0, 1, 2])
        data = np.repeat(np.array([[1.0], [-2.0], [1.0]]), n, axis=1)
        d2 = sparse.dia_matrix((data, offsets), shape=(n - 2, n)).tocsc()
        trend = spsolve(eye + smoothing * (d2.T @ d2), y)
    return HPDecomposition(trend, y - trend, float(smoothing))


class DiscriminationHistory:
    """FIFO of the most recent absolute window discriminations."""

    def __init__(self, capacity: int = HISTORY_CAPACITY) -> None:
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._values: deque[float] = deque(maxlen=capacity)

    def append(self, value: float) -> None:
        value = float(value)
        if not 0.0 <= value <= 1.0:
            raise ValueError("history stores absolute discriminations in [0, 1]")
        self._values.append(value)

    def clear(self) -> None:
        self._values.clear()

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self._values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self._values)


def _as_values(history) -> np.ndarray:
    if isinstance(history, DiscriminationHistory):
        return history.values
    return np.asarray(history, dtype=np.float64)


def should_trigger_hp(
    history,
    trend_threshold: float = DEFAULT_TREND_THRESHOLD,
    smoothing: float = DEFAULT_SMOOTHING,
) -> bool:
    """Fire when the smoothed discrimination trend is high and still rising.

    Requires at least three observations; the last trend value must reach
    ``trend_threshold`` and the last cycle value must be strictly positive
    (the series sits above its own trend).
    """
    values = _as_values(history)
    if values.size < 3:
        return False
    decomp = hp_filter(values, smoothing)
    return bool(decomp.trend[-1] >= trend_threshold and decomp.cycle[-1] > 0.0)


def should_trigger_previous(history, min_increase: float = DEFAULT_MIN_INCREASE) -> bool:
    """Fire on a strict jump above ``min_increase`` between the last two values."""
    values = _as_values(history)
    if values.size < 2:
        return False
    return bool(values[-1] - values[-2] > min_increase)


def should_trigger_every() -> bool:
    """Always fire (ablation policy)."""
    return True
