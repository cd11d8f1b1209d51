"""Least-squares fits used by the experiments."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import DegenerateFit


def _xy(rows: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    if len(rows) < 3:
        raise DegenerateFit(f"need at least 3 rows, got {len(rows)}")
    arr = np.asarray(rows, dtype=float)
    x, y = arr[:, 0], arr[:, 1]
    if np.ptp(x) == 0:
        raise DegenerateFit("all x values coincide")
    return x, y


def fit_linear(rows: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """``(slope, intercept, max relative residual)`` of ``y ~ slope x + intercept``."""
    x, y = _xy(rows)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    scale = np.maximum(np.abs(y), 1e-300)
    return float(slope), float(intercept), float(np.max(np.abs(y - pred) / scale))


def fit_rate(rows: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """``(rate, max relative residual)`` of ``y ~ C exp(rate x)``; ``y`` must be positive."""
    x, y = _xy(rows)
    if np.any(y <= 0):
        raise DegenerateFit("exponential fit needs positive y")
    rate, logc = np.polyfit(x, np.log(y), 1)
    pred = np.exp(logc + rate * x)
    return float(rate), float(np.max(np.abs(y - pred) / y))
