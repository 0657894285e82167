"""Residual diagnostics: correlograms and moment summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ModelError
from .model import _freeze

DEFAULT_MAX_LAG = 20


@dataclass(frozen=True)
class CorrelogramSet:
    """Auto and cross correlations of a residual matrix.

    ``values[i, j, k]`` is the sample correlation between series i at
    time t and series j at time t + k (the row series leads), for lags
    k = 0..max_lag.  ``bounds95`` and ``bounds99`` are the plus or minus
    normal approximation bounds for an IID series of the same length.
    """

    values: np.ndarray
    lags: np.ndarray
    bounds95: float
    bounds99: float
    nobs: int
    squared: bool

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        lags = np.array(self.lags, dtype=int)
        lags.flags.writeable = False
        object.__setattr__(self, "lags", lags)


@dataclass(frozen=True)
class ShapeSummary:
    """Per column mean, variance, skewness and excess kurtosis."""

    mean: np.ndarray
    variance: np.ndarray
    skewness: np.ndarray
    excess_kurtosis: np.ndarray

    def __post_init__(self):
        for name in ("mean", "variance", "skewness", "excess_kurtosis"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))


def _residual_values(residuals):
    values = np.asarray(getattr(residuals, "values", residuals), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2 or values.shape[0] < 2:
        raise ModelError(f"residuals must be a T x d matrix with T >= 2, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ModelError("residuals contain non-finite values")
    return values


def correlogram(residuals, max_lag: int = DEFAULT_MAX_LAG, squared: bool = False) -> CorrelogramSet:
    """Sample correlogram of residuals (optionally of their squares).

    Squaring happens before demeaning.  All covariances use the full
    sample mean and the 1/T normalization, so the lag 0 diagonal is
    exactly one and every entry lies in [-1, 1].
    """
    x = _residual_values(residuals)
    T, d = x.shape
    if int(max_lag) != max_lag or max_lag < 0:
        raise ModelError(f"max_lag must be a nonnegative integer, got {max_lag!r}")
    max_lag = int(max_lag)
    if max_lag >= T:
        raise ModelError(f"max_lag must be below the sample size {T}, got {max_lag}")
    if squared:
        x = x**2
    x = x - x.mean(axis=0)
    sd = np.sqrt((x**2).mean(axis=0))
    if np.any(sd == 0.0):
        col = int(np.where(sd == 0.0)[0][0]) + 1
        raise ModelError(f"column {col} is constant; correlations are undefined")
    x = x / sd
    values = np.empty((d, d, max_lag + 1))
    for k in range(max_lag + 1):
        # Row series leads: series i at t against series j at t + k.
        lead = x[: T - k]
        lag = x[k:]
        values[:, :, k] = lead.T @ lag / T
    return CorrelogramSet(
        values=values,
        lags=np.arange(max_lag + 1),
        bounds95=1.96 / np.sqrt(T),
        bounds99=2.58 / np.sqrt(T),
        nobs=T,
        squared=bool(squared),
    )


def shape_summary(residuals) -> ShapeSummary:
    """Mean, sample variance, skewness and excess kurtosis per column."""
    x = _residual_values(residuals)
    return ShapeSummary(
        mean=x.mean(axis=0),
        variance=x.var(axis=0, ddof=1),
        skewness=stats.skew(x, axis=0, bias=True),
        excess_kurtosis=stats.kurtosis(x, axis=0, fisher=True, bias=True),
    )
