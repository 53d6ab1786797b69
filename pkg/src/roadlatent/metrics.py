"""Accuracy metrics over hold-out entries."""

from __future__ import annotations

import numpy as np

__all__ = ["mape", "rmse"]


def mape(truth, pred) -> float:
    """Mean absolute percentage error, (1/N) sum |y - yhat| / y. Requires y > 0."""
    y = np.asarray(truth, dtype=float)
    yhat = np.asarray(pred, dtype=float)
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise ValueError("cannot score an empty hold-out")
    if np.any(y <= 0):
        raise ValueError("MAPE requires strictly positive true values")
    return float(np.mean(np.abs(y - yhat) / y))


def rmse(truth, pred) -> float:
    """Root mean square error."""
    y = np.asarray(truth, dtype=float)
    yhat = np.asarray(pred, dtype=float)
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise ValueError("cannot score an empty hold-out")
    return float(np.sqrt(np.mean((y - yhat) ** 2)))
