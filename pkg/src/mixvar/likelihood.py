"""Log-likelihood evaluation and quantile residuals.

For data rows y_1, ..., y_R the first p rows form the initial block and
the remaining T = R - p rows are scored.  The exact likelihood adds the
log stationary mixture density of the initial block to the sum of the
conditional observation terms; the conditional likelihood drops it.

Quantile residuals map each scored observation through the conditional
mixture distribution coordinate by coordinate (updating the component
weights with the densities of the preceding coordinates) and then through
the standard normal quantile function.  For a correctly specified model
they are asymptotically independent standard normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ModelError
from .model import ModelParameters, _PreparedModel, _freeze

CDF_CLAMP = 1e-12


@dataclass(frozen=True)
class LogLikelihood:
    """Total log-likelihood with its per observation terms.

    ``initial_term`` is zero for the conditional likelihood;
    ``total = initial_term + per_observation.sum()`` always holds.
    """

    total: float
    per_observation: np.ndarray
    initial_term: float

    def __post_init__(self):
        object.__setattr__(self, "per_observation", _freeze(self.per_observation))
        object.__setattr__(self, "total", float(self.total))
        object.__setattr__(self, "initial_term", float(self.initial_term))


@dataclass(frozen=True)
class QuantileResidualMatrix:
    """Quantile residuals (T x d) and the number of clamped CDF values."""

    values: np.ndarray
    n_clamped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        object.__setattr__(self, "n_clamped", int(self.n_clamped))


def _data_values(data, dims):
    values = np.asarray(getattr(data, "values", data), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2 or values.shape[1] != dims.d:
        raise ModelError(
            f"data must have {dims.d} columns, got shape {values.shape}"
        )
    if values.shape[0] < dims.p + 1:
        raise ModelError(
            f"need at least {dims.p + 1} rows to score one observation, got {values.shape[0]}"
        )
    if not np.all(np.isfinite(values)):
        raise ModelError("data contains non-finite values")
    return values


def _lagged_design(values, d, p):
    """Stacked histories X (T, dp, most recent block first) and targets Y (T, d)."""
    R = values.shape[0]
    X = np.hstack([values[p - 1 - i : R - 1 - i] for i in range(p)])
    return X, values[p:]


def _per_observation_terms(model: ModelParameters, values):
    prep = _PreparedModel(model)
    d, p = prep.d, prep.p
    X, Y = _lagged_design(values, d, p)
    logw, lse = prep.log_weights(X)
    resid = Y[:, None, :] - prep.cond_means(X)
    log_obs = prep.log_obs_density(resid)
    terms = logw + log_obs
    mx = np.max(terms, axis=1)
    lt = mx + np.log(np.exp(terms - mx[:, None]).sum(axis=1))
    initial = float(lse[0])
    return lt, initial


def exact_loglik(model: ModelParameters, data) -> LogLikelihood:
    """Exact log-likelihood, including the stationary initial block term."""
    values = _data_values(data, model.dims)
    lt, initial = _per_observation_terms(model, values)
    return LogLikelihood(total=initial + float(lt.sum()), per_observation=lt, initial_term=initial)


def conditional_loglik(model: ModelParameters, data) -> LogLikelihood:
    """Log-likelihood conditional on the first p observations."""
    values = _data_values(data, model.dims)
    lt, _ = _per_observation_terms(model, values)
    return LogLikelihood(total=float(lt.sum()), per_observation=lt, initial_term=0.0)


def quantile_residuals(model: ModelParameters, data) -> QuantileResidualMatrix:
    """Quantile residuals of the scored observations, shape (T, d).

    CDF values are clamped to [1e-12, 1 - 1e-12] before the normal
    quantile map; the number of clamped cells is reported on the result.
    """
    values = _data_values(data, model.dims)
    prep = _PreparedModel(model)
    d, p, M = prep.d, prep.p, prep.M
    X, Y = _lagged_design(values, d, p)
    T = X.shape[0]
    logw, _ = prep.log_weights(X)
    means = prep.cond_means(X)

    # Per regime conditional regressions of coordinate k on coordinates
    # 0..k-1 depend only on omega, so they are precomputed once.
    coef = [[None] * d for _ in range(M)]
    csd = np.empty((M, d))
    lead_Linv = [[None] * d for _ in range(M)]
    lead_logdet = np.empty((M, d))
    for m, reg in enumerate(model.regimes):
        om = reg.omega
        for k in range(d):
            if k == 0:
                coef[m][0] = np.zeros(0)
                csd[m, 0] = np.sqrt(om[0, 0])
            else:
                block = om[:k, :k]
                a = np.linalg.solve(block, om[:k, k])
                coef[m][k] = a
                var = om[k, k] - om[k, :k] @ a
                if var <= 0.0:
                    raise ModelError("conditional variance is not positive")
                csd[m, k] = np.sqrt(var)
                L = np.linalg.cholesky(block)
                lead_Linv[m][k] = np.linalg.inv(L)
                lead_logdet[m, k] = 2.0 * np.sum(np.log(np.diag(L)))

    out = np.empty((T, d))
    n_clamped = 0
    log2pi = np.log(2.0 * np.pi)
    for k in range(d):
        if k == 0:
            logwk = logw
        else:
            upd = np.empty((T, M))
            for m in range(M):
                r = Y[:, :k] - means[:, m, :k]
                z = r @ lead_Linv[m][k].T
                q = np.einsum("ij,ij->i", z, z)
                upd[:, m] = -0.5 * (k * log2pi + lead_logdet[m, k] + q)
            logwk = logw + upd
            mx = np.max(logwk, axis=1)
            logwk = logwk - (mx + np.log(np.exp(logwk - mx[:, None]).sum(axis=1)))[:, None]
        zs = np.empty((T, M))
        for m in range(M):
            cmean = means[:, m, k]
            if k > 0:
                cmean = cmean + (Y[:, :k] - means[:, m, :k]) @ coef[m][k]
            zs[:, m] = (Y[:, k] - cmean) / csd[m, k]
        if M == 1:
            # A single Gaussian component reduces to the standardized
            # residual; skip the CDF round trip for exactness.
            out[:, k] = zs[:, 0]
            continue
        u = np.einsum("tm,tm->t", np.exp(logwk), ndtr(zs))
        clipped = np.clip(u, CDF_CLAMP, 1.0 - CDF_CLAMP)
        n_clamped += int(np.sum(clipped != u))
        out[:, k] = ndtri(clipped)
    return QuantileResidualMatrix(values=out, n_clamped=n_clamped)
