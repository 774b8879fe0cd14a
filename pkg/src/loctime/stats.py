"""Minimal statistical toolbox: normal CDF, KS distance, OLS, moments."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def ks_distance(sample: Sequence[float]) -> float:
    """Two-sided sup distance between the empirical CDF and the standard normal.

    max over order statistics x_(i) of max(i/n - Phi(x_(i)), Phi(x_(i)) - (i-1)/n).
    """
    xs = np.sort(np.asarray(sample, dtype=np.float64))
    n = xs.shape[0]
    if n == 0:
        raise ValueError("sample must be non-empty")
    cdf = np.array([normal_cdf(x) for x in xs])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def least_squares_fit(xs: Sequence[float], ys: Sequence[float], degree: int = 1,
                      intercept: bool = False) -> np.ndarray:
    """OLS coefficients of y on (x, ..., x^degree) via the normal equations.

    Without an intercept the fit goes through the origin and the returned
    vector is (c_1, ..., c_degree); with intercept the constant comes first.
    Exact on polynomial data. Raises on a singular design (e.g. duplicate xs).
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if degree < 1 or degree > 2:
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d sequences of equal length")
    n_params = degree + (1 if intercept else 0)
    if x.shape[0] < n_params or np.unique(x).shape[0] < n_params:
        raise ValueError("design is singular: need more distinct xs than parameters")
    cols = [np.ones_like(x)] if intercept else []
    cols += [x ** d for d in range(1, degree + 1)]
    design = np.stack(cols, axis=1)
    gram = design.T @ design
    rhs = design.T @ y
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular design: {exc}") from exc
    return coef


def mean_stderr(sample: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error s / sqrt(n) (unbiased variance)."""
    xs = np.asarray(sample, dtype=np.float64)
    n = xs.shape[0]
    if n == 0:
        raise ValueError("sample must be non-empty")
    mean = float(xs.mean())
    if n < 2:
        raise ValueError("stderr requires at least two observations")
    var = float(np.sum((xs - mean) ** 2)) / (n - 1)
    return mean, math.sqrt(var / n)
