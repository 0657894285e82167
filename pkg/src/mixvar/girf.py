"""Monte Carlo generalized impulse response functions.

For each drawn initial history the engine runs paired sample paths: a
shocked path whose time 0 structural shock has its j-th element
overwritten with the requested magnitude, and a baseline path that keeps
the drawn shock.  Both paths share the initial regime draw, the standard
normal innovations at every horizon and the uniforms that select regimes,
so setting the magnitude equal to the drawn element makes the two paths
coincide exactly.  Inner repetitions are drawn in antithetic pairs
(the partner negates the normals and reuses the uniforms), which removes
the sampling mean of the drawn shock and makes the estimator exactly
linear in the magnitude for single regime models.

The per history estimates feed the point estimate (their mean) and the
quantile bands; with a fixed initial history the outer loop collapses to
a single draw and the bands equal the point estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .errors import ModelError
from .model import ModelParameters, _PreparedModel, _freeze
from .structural import StructuralParams

DEFAULT_QUANTILES = (0.05, 0.95)


@dataclass(frozen=True)
class GirfSpec:
    """Settings for one impulse response estimation.

    ``shock_index`` is 1-based.  ``init`` is "stationary", a 1-based
    regime label, or a fixed (p, d) history.  ``scaling`` optionally
    rescales every response so the point response of variable
    ``scale_variable`` peaks at ``scale_target`` within the first
    ``scale_window`` horizons.
    """

    shock_index: int
    magnitude: float
    horizon: int = 32
    inner_reps: int = 2500
    outer_reps: int = 2500
    init: Union[str, int, np.ndarray] = "stationary"
    quantiles: tuple = DEFAULT_QUANTILES
    scale_variable: Optional[int] = None
    scale_target: Optional[float] = None
    scale_window: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if int(self.shock_index) != self.shock_index or self.shock_index < 1:
            raise ModelError(f"shock_index must be a positive integer, got {self.shock_index!r}")
        if int(self.horizon) != self.horizon or self.horizon < 0:
            raise ModelError(f"horizon must be a nonnegative integer, got {self.horizon!r}")
        if self.inner_reps < 1 or self.outer_reps < 1:
            raise ModelError("inner_reps and outer_reps must be positive")
        qs = tuple(float(q) for q in self.quantiles)
        if any(not 0.0 < q < 1.0 for q in qs) or list(qs) != sorted(qs):
            raise ModelError(f"quantiles must be sorted and inside (0, 1), got {qs}")
        scaling = (self.scale_variable, self.scale_target, self.scale_window)
        if any(v is not None for v in scaling) and any(v is None for v in scaling):
            raise ModelError("scale_variable, scale_target and scale_window go together")
        object.__setattr__(self, "quantiles", qs)


@dataclass(frozen=True)
class GirfResult:
    """Point responses, weight responses, quantile bands and raw draws.

    ``point`` is (H + 1) x d, ``weights_point`` (H + 1) x M, each band
    (H + 1) x (d + M) with variables first, and ``per_init`` holds the
    per history estimates, shape (outer draws, H + 1, d + M).
    """

    point: np.ndarray
    weights_point: np.ndarray
    bands: dict
    per_init: np.ndarray
    horizons: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _freeze(self.point))
        object.__setattr__(self, "weights_point", _freeze(self.weights_point))
        object.__setattr__(self, "bands", {float(q): _freeze(b) for q, b in self.bands.items()})
        object.__setattr__(self, "per_init", _freeze(self.per_init))
        horizons = np.array(self.horizons, dtype=int)
        horizons.flags.writeable = False
        object.__setattr__(self, "horizons", horizons)


def _structural_pieces(model: ModelParameters):
    struct = model.structural
    if struct is None:
        raise ModelError("model has no structural parameters; decompose it first")
    d, M = model.dims.d, model.dims.M
    lam = np.ones((M, d))
    for m, vec in enumerate(struct.lambdas, start=1):
        lam[m] = vec
    W = np.asarray(struct.W)
    return W, np.linalg.inv(W), np.sqrt(lam), lam


def _draw_categorical(weights, unif):
    """Inverse CDF regime draw, one uniform per row."""
    cum = np.cumsum(weights, axis=1)
    idx = (unif[:, None] > cum).sum(axis=1)
    return np.minimum(idx, weights.shape[1] - 1)


def _draw_history(prep: _PreparedModel, init, rng):
    p, d, M = prep.p, prep.d, prep.M
    if isinstance(init, str):
        if init != "stationary":
            raise ModelError(f"unknown init {init!r}")
        m = int(rng.choice(M, p=np.exp(prep.log_alpha)))
    elif isinstance(init, (int, np.integer)):
        m = int(init) - 1
        if not 0 <= m < M:
            raise ModelError(f"init regime must lie in 1..{M}, got {init}")
        rng.choice(M)
    else:
        history = np.asarray(init, dtype=float)
        if history.shape != (p, d):
            raise ModelError(f"fixed history must have shape ({p}, {d}), got {history.shape}")
        return history
    big = prep.mean_big[m] + prep.L_big[m] @ rng.standard_normal(prep.dp)
    return big.reshape(p, d)[::-1].copy()


class _PathState:
    """Vectorized simulation state for R parallel paths."""

    def __init__(self, prep, history, R):
        self.prep = prep
        self.state = np.broadcast_to(history, (R, prep.p, prep.d)).copy()

    def bigx(self):
        return self.state[:, ::-1, :].reshape(self.state.shape[0], -1)

    def weights(self):
        return self.prep.weights(self.bigx())

    def advance(self, y):
        if self.prep.p > 1:
            self.state = np.concatenate([self.state[:, 1:, :], y[:, None, :]], axis=1)
        else:
            self.state = y[:, None, :]


def _select_means(prep, bigx, m):
    means = prep.cond_means(bigx)
    return means[np.arange(means.shape[0]), m, :]


def _girf_one_history(prep, W, Winv, sqrt_lam, history, spec, rng, impose: bool):
    d, M, p = prep.d, prep.M, prep.p
    R1, H = spec.inner_reps, spec.horizon
    j = spec.shock_index - 1
    if j >= d:
        raise ModelError(f"shock_index {spec.shock_index} exceeds d = {d}")
    eps = rng.standard_normal((R1, H + 1, d))
    unifs = rng.random((R1, H + 1))
    if R1 >= 2:
        # Antithetic pairs: partner reps negate the normals and reuse the
        # uniforms, so the drawn structural shocks average to exactly zero.
        n_pair = (R1 // 2) * 2
        eps[1:n_pair:2] = -eps[0:n_pair:2]
        unifs[1:n_pair:2] = unifs[0:n_pair:2]

    shocked = _PathState(prep, history, R1)
    baseline = _PathState(prep, history, R1)
    out = np.empty((H + 1, d + M))

    # Horizon zero: both paths share the regime draw and conditional mean.
    w0 = shocked.weights()
    m0 = _draw_categorical(w0, unifs[:, 0])
    u = (eps[:, 0, :] * sqrt_lam[m0]) @ W.T
    scale = np.sqrt(w0 @ (sqrt_lam**2))  # column scaling of the impact matrix
    if impose:
        e_star = (u @ Winv.T) / scale
        e_star[:, j] = spec.magnitude
        u_star = (e_star * scale) @ W.T
    else:
        u_star = u
    mu0 = _select_means(prep, shocked.bigx(), m0)
    y_s = mu0 + u_star
    y_b = mu0 + u
    out[0, :d] = (y_s - y_b).mean(axis=0)
    out[0, d:] = 0.0
    shocked.advance(y_s)
    baseline.advance(y_b)

    for h in range(1, H + 1):
        w_s = shocked.weights()
        w_b = baseline.weights()
        m_s = _draw_categorical(w_s, unifs[:, h])
        m_b = _draw_categorical(w_b, unifs[:, h])
        y_s = _select_means(prep, shocked.bigx(), m_s) + (eps[:, h, :] * sqrt_lam[m_s]) @ W.T
        y_b = _select_means(prep, baseline.bigx(), m_b) + (eps[:, h, :] * sqrt_lam[m_b]) @ W.T
        out[h, :d] = (y_s - y_b).mean(axis=0)
        out[h, d:] = (w_s - w_b).mean(axis=0)
        shocked.advance(y_s)
        baseline.advance(y_b)
    return out


def _estimate_girf_impl(model: ModelParameters, spec: GirfSpec, impose: bool = True) -> GirfResult:
    prep = _PreparedModel(model)
    W, Winv, sqrt_lam, _ = _structural_pieces(model)
    d, M = prep.d, prep.M
    H = spec.horizon
    fixed = not isinstance(spec.init, (str, int, np.integer))
    outer = 1 if fixed else spec.outer_reps
    seeds = np.random.SeedSequence(spec.seed).spawn(outer)
    per_init = np.empty((outer, H + 1, d + M))
    for r in range(outer):
        rng = np.random.default_rng(seeds[r])
        history = _draw_history(prep, spec.init, rng)
        per_init[r] = _girf_one_history(prep, W, Winv, sqrt_lam, history, spec, rng, impose)
    mean = per_init.mean(axis=0)
    bands = {q: np.quantile(per_init, q, axis=0) for q in spec.quantiles}
    result = GirfResult(
        point=mean[:, :d],
        weights_point=mean[:, d:],
        bands=bands,
        per_init=per_init,
        horizons=np.arange(H + 1),
    )
    if spec.scale_variable is not None:
        result = scale_girf(result, spec.scale_variable, spec.scale_target, spec.scale_window)
    return result


def estimate_girf(model: ModelParameters, spec: GirfSpec) -> GirfResult:
    """Estimate generalized impulse responses for one structural shock.

    Requires structural parameters on the model.  The same model, spec
    and seed always reproduce the result bit for bit.
    """
    return _estimate_girf_impl(model, spec, impose=True)


def scale_girf(result: GirfResult, variable: int, target: float, window: int) -> GirfResult:
    """Rescale all responses so one variable's peak hits a target value.

    The peak is the point response of ``variable`` (1-based) with the
    largest magnitude among horizons 0..window-1, sign kept; every series
    is multiplied by target / peak.  Applying the same scaling twice
    leaves the result unchanged.
    """
    d = result.point.shape[1]
    v = int(variable) - 1
    if not 0 <= v < d:
        raise ModelError(f"variable must lie in 1..{d}, got {variable}")
    if int(window) != window or window < 1 or window > result.point.shape[0]:
        raise ModelError(
            f"window must lie in 1..{result.point.shape[0]}, got {window!r}"
        )
    segment = result.point[: int(window), v]
    peak = float(segment[int(np.argmax(np.abs(segment)))])
    if peak == 0.0:
        raise ModelError(f"variable {variable} has a zero peak within the window")
    factor = float(target) / peak
    return GirfResult(
        point=result.point * factor,
        weights_point=result.weights_point * factor,
        bands={q: b * factor for q, b in result.bands.items()},
        per_init=result.per_init * factor,
        horizons=result.horizons,
    )


def girf_rows(result: GirfResult, series_names=None, weight_names=None):
    """Long format rows (horizon, series, statistic, value) for CSV output."""
    d = result.point.shape[1]
    M = result.weights_point.shape[1]
    series_names = list(series_names) if series_names else [f"y{i + 1}" for i in range(d)]
    weight_names = list(weight_names) if weight_names else [f"alpha{m + 1}" for m in range(M)]
    if len(series_names) != d or len(weight_names) != M:
        raise ModelError("name lists do not match the result dimensions")
    names = series_names + weight_names
    rows = []
    full_point = np.hstack([result.point, result.weights_point])
    for h in result.horizons:
        for s, name in enumerate(names):
            rows.append((int(h), name, "point", float(full_point[h, s])))
        for q, band in sorted(result.bands.items()):
            for s, name in enumerate(names):
                rows.append((int(h), name, f"q{q:g}", float(band[h, s])))
    return rows
