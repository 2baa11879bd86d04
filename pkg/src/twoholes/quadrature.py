"""Periodic trapezoid rule and the log-splitting weights for on-curve single layers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True, eq=False)
class PeriodicRule:
    """Equispaced rule on [0, 2 pi) with M nodes.

    ``log_weights[i, k]`` integrates log(4 sin^2((t_i - s)/2)) f(s) exactly for
    trigonometric polynomials f of degree <= M/2.
    """

    M: int
    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray


def _log_weight_row(M: int) -> np.ndarray:
    n = M // 2
    tau = 2.0 * np.pi * np.arange(M) / M
    m = np.arange(1, n)
    row = -(4.0 * np.pi / M) * (np.cos(np.outer(tau, m)) @ (1.0 / m))
    row -= (4.0 * np.pi / M**2) * np.cos(n * tau)
    return row


@lru_cache(maxsize=32)
def trapezoid_rule(M: int) -> PeriodicRule:
    if M % 2 or M < 8:
        raise ValueError(f"M must be even and at least 8, got {M}")
    nodes = 2.0 * np.pi * np.arange(M) / M
    weights = np.full(M, 2.0 * np.pi / M)
    row = _log_weight_row(M)
    idx = (np.arange(M)[:, None] - np.arange(M)[None, :]) % M
    R = row[idx]
    for a in (nodes, weights, R):
        a.flags.writeable = False
    return PeriodicRule(M, nodes, weights, R)


def integrate_periodic(rule: PeriodicRule, samples) -> float:
    samples = np.asarray(samples, dtype=float)
    if samples.shape[-1] != rule.M:
        raise ValueError(f"expected {rule.M} samples, got {samples.shape[-1]}")
    if samples.ndim == 1:
        return math.fsum(samples * rule.weights)
    return samples @ rule.weights
