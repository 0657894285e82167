"""Maximum likelihood estimation.

Estimation runs in two phases per round: a genetic search over a packed
parameter vector to find a good basin, then a quasi-Newton ascent with
central finite difference gradients.  Rounds are independent and seeded
from a single seed sequence; the best round by log-likelihood wins, with
ties going to the lowest round index, so the result does not depend on
the order rounds are executed in.

The packed vector stacks, per regime, the intercept, the column stacked
lag matrices and the half vectorized covariance, followed by the first
M - 1 mixing weights.  Under a structural pattern the covariance blocks
are replaced by the free cells of W (zero constrained cells are removed)
and the lambda vectors; sign constraints are enforced by likelihood
neutral column flips on the final estimate.  Equality constraints share
the lag matrix (and optionally intercept) blocks across regimes.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .errors import EstimationError, IdentificationError, ModelError
from .likelihood import LogLikelihood, _data_values, conditional_loglik, exact_loglik
from .model import Dimensions, ModelParameters, Regime, companion_matrix, validate_stability
from .structural import (
    ConstraintPattern,
    StructuralParams,
    ZERO,
    decompose_two_regime,
    normalize_W,
)

GA_POPULATION_CAP = 500
_STAB_MARGIN = 1e-8


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class GAConfig:
    """Genetic search settings; population_size None means 2 x dim capped."""

    population_size: Optional[int] = None
    generations: int = 200
    mutation_rate: float = 0.05
    crossover_rate: float = 0.9
    elitism_count: int = 2


@dataclass(frozen=True)
class RefineConfig:
    """Quasi-Newton ascent settings."""

    max_iterations: int = 300
    gradient_step: float = 1e-6
    convergence_tol: float = 1e-5


@dataclass(frozen=True)
class Constraints:
    """Equality and structural constraints applied during estimation."""

    same_ar_all_regimes: bool = False
    same_ar_and_intercept: bool = False
    structural_pattern: Optional[ConstraintPattern] = None


@dataclass(frozen=True)
class EstimationConfig:
    rounds: int = 8
    ga: GAConfig = field(default_factory=GAConfig)
    refine: RefineConfig = field(default_factory=RefineConfig)
    likelihood_kind: str = "exact"
    constraints: Optional[Constraints] = None
    seed: int = 0

    def __post_init__(self):
        if self.likelihood_kind not in ("exact", "conditional"):
            raise EstimationError(
                f"likelihood_kind must be 'exact' or 'conditional', got {self.likelihood_kind!r}"
            )
        if self.rounds < 1:
            raise EstimationError(f"rounds must be positive, got {self.rounds}")


def config_from_dict(doc: dict) -> EstimationConfig:
    """Build an estimation config from a JSON document.

    Keys "p", "M" and "data" are ignored so a CLI run file can carry the
    model dimensions next to the estimation settings.
    """
    known = {"rounds", "ga", "refine", "likelihood_kind", "constraints", "seed", "p", "M", "data"}
    unknown = set(doc) - known
    if unknown:
        raise EstimationError(f"unknown config keys: {sorted(unknown)}")
    ga = GAConfig(**doc.get("ga", {}))
    refine_cfg = RefineConfig(**doc.get("refine", {}))
    constraints = None
    if doc.get("constraints") is not None:
        cdoc = dict(doc["constraints"])
        pattern = None
        if cdoc.get("structural_pattern") is not None:
            pdoc = cdoc["structural_pattern"]
            pattern = ConstraintPattern(
                cells=tuple(tuple(row) for row in pdoc["cells"]), d1=pdoc["d1"]
            )
        constraints = Constraints(
            same_ar_all_regimes=bool(cdoc.get("same_ar_all_regimes", False)),
            same_ar_and_intercept=bool(cdoc.get("same_ar_and_intercept", False)),
            structural_pattern=pattern,
        )
    return EstimationConfig(
        rounds=int(doc.get("rounds", 8)),
        ga=ga,
        refine=refine_cfg,
        likelihood_kind=doc.get("likelihood_kind", "exact"),
        constraints=constraints,
        seed=int(doc.get("seed", 0)),
    )


def load_config(path) -> EstimationConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise EstimationError(f"invalid config JSON in {path}: {exc}") from None
    return config_from_dict(doc)


# ---------------------------------------------------------------------------
# vec / vech helpers


def vec(a) -> np.ndarray:
    """Column stacking of a matrix."""
    return np.asarray(a, dtype=float).ravel(order="F")


def unvec(v, d: int) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape((d, d), order="F")


def vech(a) -> np.ndarray:
    """Stack the lower triangle column by column, diagonal included."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    return np.concatenate([a[c:, c] for c in range(d)])


def unvech(v, d: int) -> np.ndarray:
    out = np.zeros((d, d))
    pos = 0
    for c in range(d):
        n = d - c
        out[c:, c] = v[pos : pos + n]
        out[c, c:] = v[pos : pos + n]
        pos += n
    return out


def parameter_count(dims: Dimensions, constraints: Optional[Constraints] = None) -> int:
    """Number of free parameters under the given constraints."""
    d, p, M = dims.d, dims.p, dims.M
    c = constraints or Constraints()
    n_ar = d * d * p if (c.same_ar_all_regimes or c.same_ar_and_intercept) else M * d * d * p
    n_int = d if c.same_ar_and_intercept else M * d
    if c.structural_pattern is not None:
        n_zero = sum(row.count(ZERO) for row in c.structural_pattern.cells)
        n_cov = d * d - n_zero + (M - 1) * d
    else:
        n_cov = M * d * (d + 1) // 2
    return n_int + n_ar + n_cov + (M - 1)


# ---------------------------------------------------------------------------
# packed parameter space


class ParameterSpace:
    """Mapping between a flat parameter vector and ModelParameters."""

    def __init__(self, dims: Dimensions, constraints: Optional[Constraints] = None):
        self.dims = dims
        c = constraints or Constraints()
        self.constraints = c
        self.share_intercept = c.same_ar_and_intercept
        self.share_ar = c.same_ar_all_regimes or c.same_ar_and_intercept
        self.pattern = c.structural_pattern
        self.structural = self.pattern is not None
        d, p, M = dims.d, dims.p, dims.M
        if self.structural and self.pattern.d != d:
            raise EstimationError(
                f"structural pattern is {self.pattern.d} x {self.pattern.d} but d = {d}"
            )
        if self.structural:
            # Free W cells in column major order, zero cells dropped.
            self.w_free = [
                (r, col)
                for col in range(d)
                for r in range(d)
                if self.pattern.cells[r][col] != ZERO
            ]
        blocks = []
        names = []
        pos = 0

        def add(label, size, coord_names):
            nonlocal pos
            blocks.append((label, pos, pos + size))
            names.extend(coord_names)
            pos += size

        def ar_names(prefix):
            return [
                f"{prefix}A{i + 1}[{r + 1},{cc + 1}]"
                for i in range(p)
                for cc in range(d)
                for r in range(d)
            ]

        vd = d * (d + 1) // 2
        vech_names = [f"[{r + 1},{cc + 1}]" for cc in range(d) for r in range(cc, d)]
        if self.share_intercept:
            add("phi0", d, [f"phi0[{i + 1}]" for i in range(d)])
        if self.share_ar:
            add("A", d * d * p, ar_names(""))
        for m in range(M):
            tag = f"regime{m + 1}."
            if not self.share_intercept:
                add(tag + "phi0", d, [f"{tag}phi0[{i + 1}]" for i in range(d)])
            if not self.share_ar:
                add(tag + "A", d * d * p, ar_names(tag))
            if not self.structural:
                add(tag + "omega", vd, [f"{tag}omega{s}" for s in vech_names])
        if self.structural:
            add("W", len(self.w_free), [f"W[{r + 1},{cc + 1}]" for r, cc in self.w_free])
            for m in range(2, M + 1):
                add(f"lambda{m}", d, [f"lambda{m}[{i + 1}]" for i in range(d)])
        if M > 1:
            add("alpha", M - 1, [f"alpha{m + 1}" for m in range(M - 1)])
        self.blocks = tuple(blocks)
        self.size = pos
        self._names = tuple(names)
        self.block_boundaries = tuple(b[1] for b in blocks[1:])

    def names(self):
        return list(self._names)

    def _slice(self, label):
        for name, start, stop in self.blocks:
            if name == label:
                return slice(start, stop)
        raise KeyError(label)

    def assemble(self, phi0s, A_sets, cov_part, alpha) -> np.ndarray:
        """Pack raw arrays (no validation) into a flat vector."""
        d, p, M = self.dims.d, self.dims.p, self.dims.M
        theta = np.empty(self.size)
        if self.share_intercept:
            theta[self._slice("phi0")] = phi0s[0]
        if self.share_ar:
            theta[self._slice("A")] = np.concatenate([vec(Ai) for Ai in A_sets[0]])
        for m in range(M):
            tag = f"regime{m + 1}."
            if not self.share_intercept:
                theta[self._slice(tag + "phi0")] = phi0s[m]
            if not self.share_ar:
                theta[self._slice(tag + "A")] = np.concatenate([vec(Ai) for Ai in A_sets[m]])
            if not self.structural:
                theta[self._slice(tag + "omega")] = vech(cov_part[m])
        if self.structural:
            W, lambdas = cov_part
            theta[self._slice("W")] = [W[r, c] for r, c in self.w_free]
            for m, lam in enumerate(lambdas, start=2):
                theta[self._slice(f"lambda{m}")] = lam
        if M > 1:
            theta[self._slice("alpha")] = np.asarray(alpha, dtype=float)[: M - 1]
        return theta

    def pack(self, model: ModelParameters) -> np.ndarray:
        if model.dims != self.dims:
            raise EstimationError("model dimensions do not match the parameter space")
        phi0s = [reg.phi0 for reg in model.regimes]
        A_sets = [reg.A for reg in model.regimes]
        if self.structural:
            if model.structural is None:
                raise EstimationError("model lacks structural parameters required by the pattern")
            cov_part = (model.structural.W, model.structural.lambdas)
        else:
            cov_part = [reg.omega for reg in model.regimes]
        return self.assemble(phi0s, A_sets, cov_part, model.alpha)

    def _unpack_parts(self, theta):
        d, p, M = self.dims.d, self.dims.p, self.dims.M
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.size,):
            raise EstimationError(f"theta must have length {self.size}, got {theta.shape}")
        if M > 1:
            head = theta[self._slice("alpha")]
            alpha = np.concatenate([head, [1.0 - head.sum()]])
        else:
            alpha = np.ones(1)
        phi0s, A_sets = [], []
        for m in range(M):
            tag = f"regime{m + 1}."
            phi0s.append(theta[self._slice("phi0" if self.share_intercept else tag + "phi0")])
            ar = theta[self._slice("A" if self.share_ar else tag + "A")]
            A_sets.append(tuple(unvec(ar[i * d * d : (i + 1) * d * d], d) for i in range(p)))
        structural = None
        if self.structural:
            W = np.zeros((d, d))
            for val, (r, c) in zip(theta[self._slice("W")], self.w_free):
                W[r, c] = val
            lambdas = tuple(theta[self._slice(f"lambda{m}")] for m in range(2, M + 1))
            omegas = None
            structural = (W, lambdas)
        else:
            omegas = [unvech(theta[self._slice(f"regime{m + 1}.omega")], d) for m in range(M)]
        return phi0s, A_sets, omegas, structural, alpha

    def unpack(self, theta) -> Optional[ModelParameters]:
        """Return the model for a feasible vector, None otherwise."""
        phi0s, A_sets, omegas, structural, alpha = self._unpack_parts(theta)
        if np.any(alpha <= 1e-10) or not np.all(np.isfinite(alpha)):
            return None
        for A in A_sets:
            if not np.all(np.isfinite(np.concatenate([a.ravel() for a in A]))):
                return None
            stable, _ = validate_stability(A)
            if not stable:
                return None
        struct_obj = None
        if structural is not None:
            W, lambdas = structural
            norms = np.linalg.norm(W, axis=0)
            if np.any(norms == 0.0) or abs(np.linalg.det(W / norms)) <= 1e-12:
                return None
            if any(np.any(lam <= 0.0) for lam in lambdas):
                return None
            try:
                struct_obj = StructuralParams(W=W, lambdas=lambdas, pattern=self.pattern)
            except ModelError:
                return None
            omegas = struct_obj.reconstruct_omegas()
        try:
            regimes = tuple(
                Regime(phi0=phi0s[m], A=A_sets[m], omega=omegas[m])
                for m in range(self.dims.M)
            )
            return ModelParameters(
                dims=self.dims,
                regimes=regimes,
                alpha=alpha,
                structural=struct_obj,
                ordering_waived=True,
            )
        except ModelError:
            return None


# ---------------------------------------------------------------------------
# objective and derivatives


def _make_objective(space: ParameterSpace, values, likelihood_kind: str) -> Callable:
    fn = exact_loglik if likelihood_kind == "exact" else conditional_loglik
    def objective(theta):
        model = space.unpack(theta)
        if model is None:
            return -np.inf
        try:
            total = fn(model, values).total
        except (ModelError, np.linalg.LinAlgError):
            return -np.inf
        return total if np.isfinite(total) else -np.inf
    return objective


def _gradient(f, x, fx, h_rel):
    g = np.zeros_like(x)
    for i in range(x.size):
        h = h_rel * max(1.0, abs(x[i]))
        xp = x.copy(); xp[i] += h
        xm = x.copy(); xm[i] -= h
        fp, fm = f(xp), f(xm)
        if np.isfinite(fp) and np.isfinite(fm):
            g[i] = (fp - fm) / (2.0 * h)
        elif np.isfinite(fp):
            g[i] = (fp - fx) / h
        elif np.isfinite(fm):
            g[i] = (fx - fm) / h
    return g


def _hessian(f, x, step_rel=1e-4):
    """Central second differences, mirrored so the result is exactly symmetric."""
    n = x.size
    h = step_rel * np.maximum(1.0, np.abs(x))
    H = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                xp = x.copy(); xp[i] += 2.0 * h[i]
                xm = x.copy(); xm[i] -= 2.0 * h[i]
                H[i, i] = (f(xp) - 2.0 * f0 + f(xm)) / (4.0 * h[i] * h[i])
            else:
                xpp = x.copy(); xpp[i] += h[i]; xpp[j] += h[j]
                xpm = x.copy(); xpm[i] += h[i]; xpm[j] -= h[j]
                xmp = x.copy(); xmp[i] -= h[i]; xmp[j] += h[j]
                xmm = x.copy(); xmm[i] -= h[i]; xmm[j] -= h[j]
                H[i, j] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h[i] * h[j])
                H[j, i] = H[i, j]
    return H


def _maximize(f, x0, cfg: RefineConfig):
    """BFGS ascent with Armijo backtracking; never accepts a worse point."""
    x = np.asarray(x0, dtype=float).copy()
    fx = f(x)
    if not np.isfinite(fx):
        raise EstimationError("refinement started at an infeasible point")
    n = x.size
    Hinv = np.eye(n)
    g = _gradient(f, x, fx, cfg.gradient_step)
    converged = bool(np.max(np.abs(g)) < cfg.convergence_tol)
    iterations = 0
    while not converged and iterations < cfg.max_iterations:
        direction = Hinv @ g
        slope = float(direction @ g)
        if slope <= 0.0:
            Hinv = np.eye(n)
            direction = g
            slope = float(g @ g)
            if slope <= 0.0:
                break
        t = 1.0
        accepted = False
        for _ in range(60):
            xn = x + t * direction
            fn = f(xn)
            if np.isfinite(fn) and fn >= fx + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        gn = _gradient(f, xn, fn, cfg.gradient_step)
        s = xn - x
        y = g - gn  # gradient change of the negated objective
        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(s) * max(np.linalg.norm(y), 1e-300):
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s, y)
            Hinv = V @ Hinv @ V.T + rho * np.outer(s, s)
        x, fx, g = xn, fn, gn
        iterations += 1
        converged = bool(np.max(np.abs(g)) < cfg.convergence_tol)
    return x, fx, converged, iterations


# ---------------------------------------------------------------------------
# genetic search


def _random_stable_ar(rng, d, p):
    A = [rng.normal(0.0, 0.4 / math.sqrt(d * p), size=(d, d)) for _ in range(p)]
    radius = float(np.max(np.abs(np.linalg.eigvals(companion_matrix(A)))))
    target = rng.uniform(0.0, 0.85)
    if radius > 1e-12:
        scale = target / radius
        A = [Ai * scale ** (i + 1) for i, Ai in enumerate(A)]
    return tuple(A)


def _draw_candidate(rng, space: ParameterSpace, values):
    d, p, M = space.dims.d, space.dims.p, space.dims.M
    sample_sd = values.std(axis=0)
    S = np.atleast_2d(np.cov(values, rowvar=False))
    S = S + 1e-6 * np.trace(S) / d * np.eye(d)
    L = np.linalg.cholesky(S)
    n_ar = 1 if space.share_ar else M
    A_sets = [_random_stable_ar(rng, d, p) for _ in range(n_ar)]
    if space.share_ar:
        A_sets = A_sets * M
    phi0s = []
    omegas = []
    for m in range(M):
        mu = values[rng.integers(values.shape[0])] + rng.normal(0.0, 0.3) * sample_sd
        phi0s.append((np.eye(d) - np.sum(A_sets[m], axis=0)) @ mu)
    if space.share_intercept:
        phi0s = [phi0s[0]] * M
    for m in range(M):
        G = rng.normal(0.0, 0.15, size=(d, d))
        C = L @ (np.eye(d) + G)
        scale = math.exp(rng.uniform(math.log(0.4), math.log(2.5)))
        omegas.append(scale * (C @ C.T) + 1e-8 * np.eye(d))
    alpha = rng.dirichlet(np.ones(M))
    if space.structural:
        if M == 2:
            try:
                sp = decompose_two_regime(omegas[0], omegas[1])
                cov_part = (sp.W, sp.lambdas)
            except ModelError:
                return None
        else:
            Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
            W = np.linalg.cholesky(omegas[0]) @ Q
            cov_part = (W, tuple(np.exp(rng.uniform(-1.5, 1.5, size=d)) for _ in range(M - 1)))
    else:
        cov_part = omegas
    theta = space.assemble(phi0s, A_sets, cov_part, alpha)
    if space.unpack(theta) is None:
        return None
    return theta


def _tournament(rng, fits):
    i = int(rng.integers(fits.size))
    j = int(rng.integers(fits.size))
    return j if fits[j] > fits[i] else i


def _ga_run(values, space: ParameterSpace, objective, ga: GAConfig, rng):
    dim = space.size
    pop_size = ga.population_size if ga.population_size is not None else min(2 * dim, GA_POPULATION_CAP)
    if pop_size < 1:
        raise EstimationError(f"population size must be positive, got {pop_size}")
    pop = []
    for _ in range(pop_size):
        theta = None
        for _ in range(200):
            theta = _draw_candidate(rng, space, values)
            if theta is not None:
                break
        if theta is None:
            raise EstimationError("no feasible individual found after initialization retries")
        pop.append(theta)
    fits = np.array([objective(t) for t in pop])
    if not np.any(np.isfinite(fits)):
        raise EstimationError("every initial individual has infinite negative likelihood")
    best_i = int(np.argmax(fits))
    best = (pop[best_i].copy(), float(fits[best_i]))
    elitism = min(ga.elitism_count, pop_size)
    boundaries = space.block_boundaries
    for _ in range(ga.generations):
        order = np.argsort(-fits, kind="stable")
        newpop = [pop[i].copy() for i in order[:elitism]]
        while len(newpop) < pop_size:
            a = _tournament(rng, fits)
            b = _tournament(rng, fits)
            c1, c2 = pop[a].copy(), pop[b].copy()
            if boundaries and rng.random() < ga.crossover_rate:
                cut = boundaries[int(rng.integers(len(boundaries)))]
                c1 = np.concatenate([pop[a][:cut], pop[b][cut:]])
                c2 = np.concatenate([pop[b][:cut], pop[a][cut:]])
            for child in (c1, c2):
                if len(newpop) >= pop_size:
                    break
                mask = rng.random(dim) < ga.mutation_rate
                if mask.any():
                    child[mask] += rng.normal(0.0, 0.1 * (1.0 + np.abs(child[mask])))
                newpop.append(child)
        pop = newpop
        fits = np.array([objective(t) for t in pop])
        gen_best = int(np.argmax(fits))
        if fits[gen_best] > best[1]:
            best = (pop[gen_best].copy(), float(fits[gen_best]))
    return best


# ---------------------------------------------------------------------------
# public estimation API


@dataclass(frozen=True)
class RoundResult:
    round_index: int
    loglik: float
    converged: bool


@dataclass(frozen=True)
class StandardErrors:
    """Per parameter standard errors; all NaN when the Hessian is not
    negative definite (hessian_ok False)."""

    values: np.ndarray
    names: tuple
    hessian_ok: bool
    covariance: Optional[np.ndarray] = None


@dataclass(frozen=True)
class InformationCriteria:
    aic: float
    bic: float
    hqic: float


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    df: int


@dataclass(frozen=True)
class EstimationResult:
    theta_hat: ModelParameters
    loglik: LogLikelihood
    rounds_table: tuple
    converged: bool
    std_errors: Optional[StandardErrors] = None


def genetic_search(data, dims: Dimensions, config: Optional[EstimationConfig] = None) -> ModelParameters:
    """Run the genetic phase only and return the best candidate found."""
    config = config or EstimationConfig()
    values = _data_values(data, dims)
    space = ParameterSpace(dims, config.constraints)
    objective = _make_objective(space, values, config.likelihood_kind)
    rng = np.random.default_rng(config.seed)
    theta, _ = _ga_run(values, space, objective, config.ga, rng)
    return space.unpack(theta)


def refine(theta0: ModelParameters, data, config: Optional[EstimationConfig] = None) -> ModelParameters:
    """Quasi-Newton ascent from a feasible start; never returns a worse point."""
    config = config or EstimationConfig()
    values = _data_values(data, theta0.dims)
    space = ParameterSpace(theta0.dims, config.constraints)
    objective = _make_objective(space, values, config.likelihood_kind)
    x, _, _, _ = _maximize(objective, space.pack(theta0), config.refine)
    model = space.unpack(x)
    if model is None:
        raise EstimationError("refinement left the feasible set")  # pragma: no cover
    return model


def _relabel_ascending(model: ModelParameters) -> ModelParameters:
    """Reorder regimes so alpha increases with the index.

    Structural models keep their regime order because the first regime
    anchors the decomposition; their ordering stays waived.
    """
    if model.structural is not None or model.dims.M == 1:
        return model
    order = np.argsort(model.alpha, kind="stable")
    alpha = model.alpha[order]
    strictly = bool(np.all(np.diff(alpha) > 0.0))
    return ModelParameters(
        dims=model.dims,
        regimes=tuple(model.regimes[i] for i in order),
        alpha=alpha,
        structural=None,
        ordering_waived=not strictly,
    )


def _normalize_structural(model: ModelParameters) -> ModelParameters:
    if model.structural is None:
        return model
    try:
        struct = normalize_W(model.structural)
    except IdentificationError as exc:
        warnings.warn(f"structural sign constraints left unsatisfied: {exc}")
        return model
    regimes = tuple(
        Regime(phi0=reg.phi0, A=reg.A, omega=omega)
        for reg, omega in zip(model.regimes, struct.reconstruct_omegas())
    )
    return ModelParameters(
        dims=model.dims,
        regimes=regimes,
        alpha=model.alpha,
        structural=struct,
        ordering_waived=True,
    )


def fit(data, dims: Dimensions, config: Optional[EstimationConfig] = None) -> EstimationResult:
    """Two phase maximum likelihood estimation.

    Runs ``config.rounds`` independent genetic searches, refines each and
    keeps the best final log-likelihood (ties break to the lowest round
    index).  The returned regimes are relabeled so alpha increases with
    the regime index, except for structural fits which keep the first
    regime as the decomposition base.
    """
    config = config or EstimationConfig()
    values = _data_values(data, dims)
    if values.shape[0] < dims.p + 10 * dims.M:
        raise EstimationError(
            f"need at least p + 10 M = {dims.p + 10 * dims.M} rows, got {values.shape[0]}"
        )
    k = parameter_count(dims, config.constraints)
    if values.shape[0] < 10 * k:
        warnings.warn(
            f"sample of {values.shape[0]} rows is small for {k} parameters; "
            "estimates may be unstable"
        )
    space = ParameterSpace(dims, config.constraints)
    objective = _make_objective(space, values, config.likelihood_kind)
    seeds = np.random.SeedSequence(config.seed).spawn(config.rounds)
    best = None
    rounds = []
    for r in range(config.rounds):
        rng = np.random.default_rng(seeds[r])
        theta0, _ = _ga_run(values, space, objective, config.ga, rng)
        theta, ll, converged, _ = _maximize(objective, theta0, config.refine)
        rounds.append(RoundResult(round_index=r, loglik=float(ll), converged=converged))
        if best is None or ll > best[1]:
            best = (theta, float(ll), converged)
    theta, _, converged = best
    model = space.unpack(theta)
    if model is None:
        raise EstimationError("best round produced an infeasible model")  # pragma: no cover
    model = _normalize_structural(_relabel_ascending(model))
    fn = exact_loglik if config.likelihood_kind == "exact" else conditional_loglik
    return EstimationResult(
        theta_hat=model,
        loglik=fn(model, values),
        rounds_table=tuple(rounds),
        converged=converged,
    )


def standard_errors(
    model: ModelParameters,
    data,
    likelihood_kind: str = "exact",
    constraints: Optional[Constraints] = None,
    step: float = 1e-4,
) -> StandardErrors:
    """Approximate standard errors from the negative inverse Hessian.

    The Hessian of the chosen log-likelihood is computed by central
    second differences and mirrored to be exactly symmetric.  If it is
    not negative definite every standard error is NaN and hessian_ok is
    False.
    """
    values = _data_values(data, model.dims)
    space = ParameterSpace(model.dims, constraints)
    objective = _make_objective(space, values, likelihood_kind)
    theta = space.pack(model)
    H = _hessian(objective, theta, step)
    names = tuple(space.names())
    try:
        Hinv = np.linalg.inv(-H)
        diag = np.diag(Hinv)
        if np.any(diag <= 0.0) or not np.all(np.isfinite(diag)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        return StandardErrors(
            values=np.full(theta.size, np.nan), names=names, hessian_ok=False
        )
    return StandardErrors(values=np.sqrt(diag), names=names, hessian_ok=True, covariance=Hinv)


def information_criteria(loglik: float, n_params: int, n_obs: int) -> InformationCriteria:
    """Per observation AIC, BIC and HQIC."""
    if n_obs < 3:
        raise EstimationError(f"need at least 3 observations, got {n_obs}")
    if n_params < 0:
        raise EstimationError(f"parameter count must be nonnegative, got {n_params}")
    neg2 = -2.0 * float(loglik)
    n = float(n_obs)
    return InformationCriteria(
        aic=(neg2 + 2.0 * n_params) / n,
        bic=(neg2 + n_params * math.log(n)) / n,
        hqic=(neg2 + 2.0 * n_params * math.log(math.log(n))) / n,
    )


def lr_test(loglik_unrestricted: float, loglik_restricted: float, df: int) -> TestResult:
    """Likelihood ratio test of nested models."""
    if int(df) != df or df < 1:
        raise EstimationError(f"df must be a positive integer, got {df!r}")
    gap = float(loglik_unrestricted) - float(loglik_restricted)
    if gap < -1e-8:
        raise EstimationError(
            f"unrestricted log-likelihood is below the restricted one by {-gap:.3e}; "
            "the models are not nested or optimization failed"
        )
    statistic = max(0.0, 2.0 * gap)
    return TestResult(
        statistic=statistic, p_value=float(stats.chi2.sf(statistic, df)), df=int(df)
    )


def wald_test(theta_hat, covariance, R, r) -> TestResult:
    """Wald test of the linear restriction R theta = r."""
    theta_hat = np.asarray(theta_hat, dtype=float).reshape(-1)
    covariance = np.asarray(covariance, dtype=float)
    R = np.atleast_2d(np.asarray(R, dtype=float))
    r = np.asarray(r, dtype=float).reshape(-1)
    q, k = R.shape
    if theta_hat.size != k or covariance.shape != (k, k) or r.size != q:
        raise EstimationError(
            f"shape mismatch: R is {R.shape}, theta has {theta_hat.size} entries, "
            f"covariance is {covariance.shape}, r has {r.size}"
        )
    if np.linalg.matrix_rank(R) < q:
        raise EstimationError("restriction matrix R does not have full row rank")
    diff = R @ theta_hat - r
    S = R @ covariance @ R.T
    try:
        sol = np.linalg.solve(S, diff)
    except np.linalg.LinAlgError:
        raise EstimationError("R covariance R' is singular") from None
    statistic = float(diff @ sol)
    if statistic < 0.0:
        raise EstimationError("restricted covariance is not positive definite")
    return TestResult(statistic=statistic, p_value=float(stats.chi2.sf(statistic, q)), df=q)
