"""Core types and operations for Gaussian mixture vector autoregressions.

A model with M regimes generates each observation from one of M stable
Gaussian VAR(p) processes.  The regime is drawn with probabilities that
weight the prior regime probabilities by the stationary density each
regime assigns to the p most recent observations, so regimes take over
smoothly in the parts of the state space they explain well.

Histories are passed as (p, d) arrays in chronological order: row p - 1
is the most recent observation.

Functions
---------
companion_matrix, validate_stability
    Stability of a single regime's autoregression.
stationary_moments
    Mean and covariance of p consecutive observations under one regime.
mixing_weights
    Regime probabilities given the p most recent observations.
conditional_moments
    One step ahead regime means and the reduced form innovation covariance.
simulate
    Draw a path from the model.
regime_summary
    Stationary marginal means and variances per regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ModelError
from .structural import StructuralParams

STABILITY_MARGIN = 1e-8
_LYAPUNOV_DIRECT_MAX = 60
_LOG_2PI = math.log(2.0 * math.pi)


def _freeze(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dimensions:
    """Model dimensions: d series, p lags, M regimes."""

    d: int
    p: int
    M: int

    def __post_init__(self):
        for name in ("d", "p", "M"):
            v = getattr(self, name)
            if int(v) != v or int(v) < 1:
                raise ModelError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))


@dataclass(frozen=True)
class Regime:
    """One regime: intercept phi0, lag matrices A, innovation covariance omega.

    The autoregression must be stable and omega symmetric positive
    definite; both are checked at construction.
    """

    phi0: np.ndarray
    A: tuple
    omega: np.ndarray

    def __post_init__(self):
        phi0 = np.asarray(self.phi0, dtype=float).reshape(-1)
        d = phi0.size
        A = tuple(np.asarray(Ai, dtype=float) for Ai in self.A)
        if not A:
            raise ModelError("at least one lag matrix is required")
        for i, Ai in enumerate(A, start=1):
            if Ai.shape != (d, d):
                raise ModelError(f"A_{i} must have shape ({d}, {d}), got {Ai.shape}")
        omega = np.asarray(self.omega, dtype=float)
        if omega.shape != (d, d):
            raise ModelError(f"omega must have shape ({d}, {d}), got {omega.shape}")
        scale = max(1.0, float(np.max(np.abs(omega))))
        if np.max(np.abs(omega - omega.T)) > 1e-8 * scale:
            raise ModelError("omega must be symmetric")
        omega = 0.5 * (omega + omega.T)
        try:
            np.linalg.cholesky(omega)
        except np.linalg.LinAlgError:
            raise ModelError("omega must be positive definite") from None
        stable, radius = validate_stability(A)
        if not stable:
            raise ModelError(f"unstable autoregression (companion radius {radius:.8f})")
        object.__setattr__(self, "phi0", _freeze(phi0))
        object.__setattr__(self, "A", tuple(_freeze(Ai) for Ai in A))
        object.__setattr__(self, "omega", _freeze(omega))

    @property
    def d(self) -> int:
        return self.phi0.size

    @property
    def p(self) -> int:
        return len(self.A)


@dataclass(frozen=True)
class ModelParameters:
    """Complete parameter set for a mixture VAR.

    ``alpha`` are the prior regime probabilities (strictly positive, sum
    to one).  Estimation relabels regimes so alpha increases with the
    regime index and then clears ``ordering_waived``; hand built models
    keep the flag set and may use any ordering.  When ``structural`` is
    present, the regime covariances must match the reconstruction
    omega_1 = W W', omega_m = W diag(lambda_m) W'.
    """

    dims: Dimensions
    regimes: tuple
    alpha: np.ndarray
    structural: Optional[StructuralParams] = None
    ordering_waived: bool = True

    def __post_init__(self):
        dims = self.dims
        regimes = tuple(self.regimes)
        if len(regimes) != dims.M:
            raise ModelError(f"expected {dims.M} regimes, got {len(regimes)}")
        for m, reg in enumerate(regimes, start=1):
            if reg.d != dims.d or reg.p != dims.p:
                raise ModelError(
                    f"regime {m} has (d, p) = ({reg.d}, {reg.p}), expected ({dims.d}, {dims.p})"
                )
        alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        if alpha.size != dims.M:
            raise ModelError(f"alpha must have length {dims.M}, got {alpha.size}")
        if np.any(alpha <= 0.0):
            raise ModelError("alpha entries must be strictly positive")
        if abs(alpha.sum() - 1.0) > 1e-12:
            raise ModelError(f"alpha must sum to one, got {alpha.sum()!r}")
        if not self.ordering_waived and dims.M > 1:
            if np.any(np.diff(alpha) <= 0.0):
                raise ModelError(
                    "alpha must be strictly increasing unless ordering is waived"
                )
        if self.structural is not None:
            struct = self.structural
            if struct.d != dims.d or struct.n_regimes != dims.M:
                raise ModelError(
                    "structural parameters do not match the model dimensions"
                )
            for m, (reg, omega) in enumerate(
                zip(regimes, struct.reconstruct_omegas()), start=1
            ):
                scale = max(1.0, float(np.max(np.abs(omega))))
                if np.max(np.abs(reg.omega - omega)) > 1e-10 * scale:
                    raise ModelError(
                        f"regime {m} covariance does not match the structural reconstruction"
                    )
        object.__setattr__(self, "regimes", regimes)
        object.__setattr__(self, "alpha", _freeze(alpha))
        object.__setattr__(self, "ordering_waived", bool(self.ordering_waived))


@dataclass(frozen=True)
class StationaryMoments:
    """Stationary moments of one regime.

    ``mu`` is the mean of a single observation, ``mean_big`` the mean and
    ``sigma_big`` the covariance of the stacked vector of p consecutive
    observations (most recent first).
    """

    mu: np.ndarray
    mean_big: np.ndarray
    sigma_big: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", _freeze(self.mu))
        object.__setattr__(self, "mean_big", _freeze(self.mean_big))
        object.__setattr__(self, "sigma_big", _freeze(self.sigma_big))


@dataclass(frozen=True)
class MixingWeights:
    """Regime probabilities for one history; nonnegative and sum to one."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _freeze(self.weights))


@dataclass(frozen=True)
class SimulatedPath:
    """Simulated observations with the regime labels and weights used.

    ``regimes`` holds 1-based labels; ``weights`` row t holds the mixing
    weights that generated observation t.
    """

    observations: np.ndarray
    regimes: np.ndarray
    weights: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "observations", _freeze(self.observations))
        regimes = np.array(self.regimes, dtype=int)
        regimes.flags.writeable = False
        object.__setattr__(self, "regimes", regimes)
        object.__setattr__(self, "weights", _freeze(self.weights))


@dataclass(frozen=True)
class RegimeSummary:
    """Marginal stationary means and variances, one row per regime."""

    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "means", _freeze(self.means))
        object.__setattr__(self, "variances", _freeze(self.variances))


def companion_matrix(A: Sequence[np.ndarray]) -> np.ndarray:
    """Companion form of the lag matrices A_1, ..., A_p (dp x dp)."""
    A = [np.asarray(Ai, dtype=float) for Ai in A]
    d = A[0].shape[0]
    p = len(A)
    comp = np.zeros((d * p, d * p))
    comp[:d, :] = np.hstack(A)
    if p > 1:
        comp[d:, :-d] = np.eye(d * (p - 1))
    return comp


def validate_stability(A: Sequence[np.ndarray], margin: float = STABILITY_MARGIN):
    """Return (is_stable, spectral_radius) for a set of lag matrices."""
    comp = companion_matrix(A)
    radius = float(np.max(np.abs(np.linalg.eigvals(comp))))
    return radius < 1.0 - margin, radius


def _solve_discrete_lyapunov(A, Q):
    """Solve sigma = A sigma A' + Q for stable A.

    A direct vectorized solve is used for small companion matrices and a
    doubling iteration beyond that.
    """
    n = A.shape[0]
    if n <= _LYAPUNOV_DIRECT_MAX:
        lhs = np.eye(n * n) - np.kron(A, A)
        sigma = np.linalg.solve(lhs, Q.reshape(-1)).reshape(n, n)
    else:
        sigma = Q.copy()
        P = A.copy()
        for _ in range(200):
            update = P @ sigma @ P.T
            sigma = sigma + update
            norm = float(np.max(np.abs(sigma)))
            if float(np.max(np.abs(update))) <= 1e-16 * max(norm, 1.0):
                break
            P = P @ P
    return 0.5 * (sigma + sigma.T)


def stationary_moments(regime: Regime, dims: Optional[Dimensions] = None) -> StationaryMoments:
    """Stationary moments of p consecutive observations under one regime."""
    if dims is not None and (dims.d != regime.d or dims.p != regime.p):
        raise ModelError("dims do not match the regime")
    d, p = regime.d, regime.p
    A_sum = np.sum(regime.A, axis=0)
    mu = np.linalg.solve(np.eye(d) - A_sum, regime.phi0)
    comp = companion_matrix(regime.A)
    Q = np.zeros((d * p, d * p))
    Q[:d, :d] = regime.omega
    sigma_big = _solve_discrete_lyapunov(comp, Q)
    mean_big = np.tile(mu, p)
    return StationaryMoments(mu=mu, mean_big=mean_big, sigma_big=sigma_big)


def _stack_history(history, dims: Dimensions):
    history = np.asarray(history, dtype=float)
    if history.shape != (dims.p, dims.d):
        raise ModelError(
            f"history must have shape ({dims.p}, {dims.d}), got {history.shape}"
        )
    return history[::-1].reshape(-1)


class _PreparedModel:
    """Precomputed per regime quantities shared by the evaluation loops."""

    def __init__(self, model: ModelParameters):
        self.model = model
        dims = model.dims
        self.d, self.p, self.M = dims.d, dims.p, dims.M
        self.dp = dims.d * dims.p
        self.log_alpha = np.log(model.alpha)
        self.phi0 = np.stack([reg.phi0 for reg in model.regimes])
        # Astack rows multiply the stacked history (most recent first).
        self.Astack = np.stack([np.hstack(reg.A) for reg in model.regimes])
        self.mu = np.empty((self.M, self.d))
        self.mean_big = np.empty((self.M, self.dp))
        self.L_big = np.empty((self.M, self.dp, self.dp))
        self.Linv_big = np.empty_like(self.L_big)
        self.logdet_big = np.empty(self.M)
        self.L_om = np.empty((self.M, self.d, self.d))
        self.Linv_om = np.empty_like(self.L_om)
        self.logdet_om = np.empty(self.M)
        for m, reg in enumerate(model.regimes):
            mom = stationary_moments(reg)
            self.mu[m] = mom.mu
            self.mean_big[m] = mom.mean_big
            L = np.linalg.cholesky(mom.sigma_big)
            self.L_big[m] = L
            self.Linv_big[m] = np.linalg.inv(L)
            self.logdet_big[m] = 2.0 * np.sum(np.log(np.diag(L)))
            Lo = np.linalg.cholesky(reg.omega)
            self.L_om[m] = Lo
            self.Linv_om[m] = np.linalg.inv(Lo)
            self.logdet_om[m] = 2.0 * np.sum(np.log(np.diag(Lo)))

    def log_stationary_density(self, bigx):
        """Log stationary density of stacked histories, shape (N, M)."""
        N = bigx.shape[0]
        out = np.empty((N, self.M))
        for m in range(self.M):
            z = (bigx - self.mean_big[m]) @ self.Linv_big[m].T
            q = np.einsum("ij,ij->i", z, z)
            out[:, m] = -0.5 * (self.dp * _LOG_2PI + self.logdet_big[m] + q)
        return out

    def log_weights(self, bigx):
        """Normalized log mixing weights and the log normalizer, (N, M), (N,)."""
        logdens = self.log_stationary_density(bigx)
        log_un = self.log_alpha + logdens
        mx = np.max(log_un, axis=1)
        finite = np.isfinite(mx)
        shifted = np.where(finite[:, None], log_un - np.where(finite, mx, 0.0)[:, None], -np.inf)
        sumexp = np.exp(shifted).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            lse = np.where(finite, mx + np.log(sumexp), -np.inf)
            logw = log_un - lse[:, None]
        if not np.all(finite):
            # Every regime underflowed even after the max shift; fall back
            # to a one hot assignment at the largest stationary density.
            bad = np.where(~finite)[0]
            logw[bad] = -np.inf
            pick = np.argmax(logdens[bad], axis=1)
            logw[bad, pick] = 0.0
        return logw, lse

    def weights(self, bigx):
        return np.exp(self.log_weights(bigx)[0])

    def cond_means(self, bigx):
        """Per regime one step ahead means, shape (N, M, d)."""
        N = bigx.shape[0]
        out = np.empty((N, self.M, self.d))
        for m in range(self.M):
            out[:, m, :] = self.phi0[m] + bigx @ self.Astack[m].T
        return out

    def log_obs_density(self, resid_by_regime):
        """Log innovation densities given residuals of shape (N, M, d)."""
        N = resid_by_regime.shape[0]
        out = np.empty((N, self.M))
        for m in range(self.M):
            z = resid_by_regime[:, m, :] @ self.Linv_om[m].T
            q = np.einsum("ij,ij->i", z, z)
            out[:, m] = -0.5 * (self.d * _LOG_2PI + self.logdet_om[m] + q)
        return out


def mixing_weights(history, model: ModelParameters) -> MixingWeights:
    """Regime probabilities given the p most recent observations.

    Each regime's prior weight is multiplied by the stationary density it
    assigns to the history, and the products are normalized.  Computation
    is carried out in log space; if every regime underflows the weight
    collapses to the regime with the largest log density.
    """
    prep = _PreparedModel(model)
    bigx = _stack_history(history, model.dims)[None, :]
    return MixingWeights(weights=prep.weights(bigx)[0])


def conditional_moments(history, model: ModelParameters):
    """Per regime conditional means (M, d) and the mixed covariance (d, d).

    The reduced form innovation covariance is the mixing weight average
    of the regime covariances.
    """
    prep = _PreparedModel(model)
    bigx = _stack_history(history, model.dims)[None, :]
    means = prep.cond_means(bigx)[0]
    w = prep.weights(bigx)[0]
    omega_u = np.einsum("m,mij->ij", w, np.stack([r.omega for r in model.regimes]))
    return means, omega_u


InitialCondition = Union[str, int, np.ndarray]


def _init_history(prep: _PreparedModel, init: InitialCondition, rng) -> np.ndarray:
    d, p, M = prep.d, prep.p, prep.M
    if isinstance(init, str):
        if init != "stationary":
            raise ModelError(f"unknown init {init!r}; expected 'stationary', a regime label, or a history")
        m = int(rng.choice(M, p=np.exp(prep.log_alpha)))
    elif isinstance(init, (int, np.integer)):
        m = int(init) - 1
        if not 0 <= m < M:
            raise ModelError(f"init regime must lie in 1..{M}, got {init}")
        # Consume a draw so fixed-regime and stationary inits walk the
        # generator in the same order.
        rng.choice(M)
    else:
        history = np.asarray(init, dtype=float)
        if history.shape != (p, d):
            raise ModelError(f"fixed history must have shape ({p}, {d}), got {history.shape}")
        return history.copy()
    z = rng.standard_normal(prep.dp)
    big = prep.mean_big[m] + prep.L_big[m] @ z
    # The stacked vector is most recent first; unstack to chronological rows.
    return big.reshape(p, d)[::-1].copy()


def simulate(model: ModelParameters, T: int, init: InitialCondition = "stationary", seed: int = 0) -> SimulatedPath:
    """Simulate T observations.

    ``init`` selects the starting history: "stationary" draws from the
    model's stationary mixture, an integer m in 1..M draws from that
    regime's stationary distribution, and a (p, d) array fixes it.
    Identical arguments always produce an identical path.
    """
    if int(T) != T or T < 1:
        raise ModelError(f"T must be a positive integer, got {T!r}")
    T = int(T)
    prep = _PreparedModel(model)
    d, p, M = prep.d, prep.p, prep.M
    rng = np.random.default_rng(seed)
    state = _init_history(prep, init, rng)
    unifs = rng.random(T)
    shocks = rng.standard_normal((T, d))
    obs = np.empty((T, d))
    regimes = np.empty(T, dtype=int)
    weights = np.empty((T, M))
    for t in range(T):
        bigx = state[::-1].reshape(1, -1)
        w = prep.weights(bigx)[0]
        m = int(np.searchsorted(np.cumsum(w), unifs[t]))
        if m >= M:
            m = M - 1
        mu = prep.phi0[m] + bigx[0] @ prep.Astack[m].T
        y = mu + prep.L_om[m] @ shocks[t]
        obs[t] = y
        regimes[t] = m + 1
        weights[t] = w
        state = np.vstack((state[1:], y)) if p > 1 else y[None, :]
    return SimulatedPath(observations=obs, regimes=regimes, weights=weights, seed=int(seed))


def regime_summary(model: ModelParameters) -> RegimeSummary:
    """Stationary marginal means and variances, one row per regime."""
    d = model.dims.d
    means = np.empty((model.dims.M, d))
    variances = np.empty((model.dims.M, d))
    for m, reg in enumerate(model.regimes):
        mom = stationary_moments(reg)
        means[m] = mom.mu
        variances[m] = np.diag(mom.sigma_big[:d, :d])
    return RegimeSummary(means=means, variances=variances)
