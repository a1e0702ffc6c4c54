"""Window-level prediction metrics: accuracy and statistical parity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "DiscriminationResult",
    "accuracy",
    "discrimination",
    "WindowRecord",
    "WINDOW_CSV_HEADER",
]


class DiscriminationResult(NamedTuple):
    """Signed parity gap plus a flag for windows where a group is absent."""

    value: float
    degenerate: bool


def accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """Fraction of predictions equal to the labels."""
    p = np.asarray(predictions)
    y = np.asarray(labels)
    if p.shape != y.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("predictions and labels must be equal-length non-empty vectors")
    return int((p == y).sum()) / p.size


def discrimination(predictions: Sequence[int], groups: Sequence[int]) -> DiscriminationResult:
    """Positive-prediction rate of the protected group minus the unprotected one.

    A window holding only one group cannot express a rate gap; such windows
    yield 0.0 with ``degenerate=True`` so they never push a trigger upward.
    """
    p = np.asarray(predictions)
    g = np.asarray(groups)
    if p.shape != g.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("predictions and groups must be equal-length non-empty vectors")
    prot = g == 1
    n_p = int(prot.sum())
    n_u = p.size - n_p
    if n_p == 0 or n_u == 0:
        return DiscriminationResult(0.0, True)
    pos = p == 1
    rate_p = int((pos & prot).sum()) / n_p
    rate_u = int((pos & ~prot).sum()) / n_u
    return DiscriminationResult(rate_p - rate_u, False)


WINDOW_CSV_HEADER = [
    "window",
    "accuracy",
    "discrimination",
    "abs_discrimination",
    "triggered",
    "pareto_size",
    "wall_time_ms",
]


@dataclass(frozen=True)
class WindowRecord:
    """Per-window evaluation snapshot emitted by the engine."""

    window: int
    accuracy: float
    discrimination: float
    abs_discrimination: float
    triggered: bool
    pareto_size: int
    wall_time_ms: float

    def to_csv_row(self) -> list[str]:
        return [
            str(self.window),
            repr(self.accuracy),
            repr(self.discrimination),
            repr(self.abs_discrimination),
            "1" if self.triggered else "0",
            str(self.pareto_size),
            repr(self.wall_time_ms),
        ]
