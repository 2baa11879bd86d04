"""Empirical convergence orders from (t, error) pairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ERROR_FLOOR = 1e-14


@dataclass(frozen=True)
class OrderFit:
    slope: float
    intercept: float
    residual: float
    floor: bool = False
    clipped: int = 0

    def __str__(self) -> str:
        if self.floor:
            return "floor"
        return f"slope={self.slope:.4f} intercept={self.intercept:.4f} residual={self.residual:.2e}"


def fit_order(pairs) -> OrderFit:
    """Least-squares line through (log t, log error).

    Errors below 1e-14 are clipped to that floor; if every error is at the
    floor the fit is meaningless and ``floor`` is set with a NaN slope.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 3:
        raise ValueError("fit_order needs at least three (t, error) pairs")
    t, err = arr[:, 0], np.abs(arr[:, 1])
    if np.any(t <= 0):
        raise ValueError("t values must be positive")
    low = err < ERROR_FLOOR
    if np.all(low):
        return OrderFit(np.nan, np.nan, np.nan, floor=True, clipped=int(low.sum()))
    err = np.maximum(err, ERROR_FLOOR)
    X = np.column_stack([np.log(t), np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(X, np.log(err), rcond=None)
    res = np.log(err) - X @ coef
    return OrderFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res**2))), False, int(low.sum()))
