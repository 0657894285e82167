"""Structural shock identification for two and more regime mixture VARs.

The reduced form innovation covariances of the regimes are linked through a
constant matrix W and regime specific diagonal scalings: the first regime
satisfies omega_1 = W W' and every further regime m satisfies
omega_m = W diag(lambda_m) W'.  The time varying impact matrix mixes the
diagonal scalings with the prevailing mixing weights.

Functions
---------
decompose_two_regime
    Simultaneously diagonalize a pair of SPD matrices.
build_B
    Impact matrix for a given vector of mixing weights.
check_assumption1
    Pairwise distinctness report for the diagonal scaling vectors.
check_identification
    Evaluate a sign and zero constraint pattern against a distinctness report.
normalize_W
    Canonical column ordering and signs for structural parameters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg as sla

from .errors import IdentificationError, ModelError

FREE = "*"
POSITIVE = "+"
NEGATIVE = "-"
ZERO = "0"
_CELLS = (FREE, POSITIVE, NEGATIVE, ZERO)

# Cells conflict when no admissible value for the first can satisfy the
# second: opposite strict signs, or a strict sign against a zero.
_CONFLICTS = {
    (POSITIVE, NEGATIVE),
    (NEGATIVE, POSITIVE),
    (POSITIVE, ZERO),
    (NEGATIVE, ZERO),
    (ZERO, POSITIVE),
    (ZERO, NEGATIVE),
}

_DET_TOL = 1e-12


class Verdict(enum.Enum):
    """Outcome of an identification check."""

    IDENTIFIED = "Identified"
    IDENTIFIED_PARTIAL_MODEL = "IdentifiedPartialModel"
    NOT_IDENTIFIED = "NotIdentified"


def _freeze(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ConstraintPattern:
    """Sign and zero constraints on the columns of W.

    Parameters
    ----------
    cells : sequence of sequence of str
        d x d grid over {"*", "+", "-", "0"}; rows index variables and
        columns index shocks.
    d1 : int
        Number of trailing columns whose shocks the pattern is meant to
        identify, between 0 and d.
    """

    cells: tuple
    d1: int

    def __post_init__(self):
        rows = tuple(tuple(str(c) for c in row) for row in self.cells)
        d = len(rows)
        if d == 0:
            raise IdentificationError("pattern must have at least one row")
        for i, row in enumerate(rows):
            if len(row) != d:
                raise IdentificationError(
                    f"pattern row {i + 1} has {len(row)} cells, expected {d}"
                )
            for j, c in enumerate(row):
                if c not in _CELLS:
                    raise IdentificationError(
                        f"invalid cell {c!r} at row {i + 1}, column {j + 1}; "
                        f"expected one of {_CELLS}"
                    )
        if not 0 <= int(self.d1) <= d:
            raise IdentificationError(f"d1 must lie in 0..{d}, got {self.d1}")
        object.__setattr__(self, "cells", rows)
        object.__setattr__(self, "d1", int(self.d1))

    @property
    def d(self) -> int:
        return len(self.cells)

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self.cells)

    def to_lists(self):
        return [list(row) for row in self.cells]


@dataclass(frozen=True)
class StructuralParams:
    """Joint decomposition parameters W and lambda_2, ..., lambda_M.

    ``lambdas`` holds one strictly positive length d vector per regime
    beyond the first; it is empty for a single regime model.
    """

    W: np.ndarray
    lambdas: tuple
    pattern: Optional[ConstraintPattern] = None

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ModelError(f"W must be square, got shape {W.shape}")
        d = W.shape[0]
        norms = np.linalg.norm(W, axis=0)
        if np.any(norms == 0.0):
            raise ModelError("W has a zero column")
        if abs(np.linalg.det(W / norms)) <= _DET_TOL:
            raise ModelError("W is singular or too close to singular")
        lambdas = tuple(np.asarray(lam, dtype=float).reshape(-1) for lam in self.lambdas)
        for m, lam in enumerate(lambdas, start=2):
            if lam.size != d:
                raise ModelError(
                    f"lambda vector for regime {m} has length {lam.size}, expected {d}"
                )
            if np.any(lam <= 0.0):
                raise ModelError(f"lambda vector for regime {m} must be strictly positive")
        if self.pattern is not None and self.pattern.d != d:
            raise ModelError(
                f"pattern is {self.pattern.d} x {self.pattern.d} but W is {d} x {d}"
            )
        object.__setattr__(self, "W", _freeze(W))
        object.__setattr__(self, "lambdas", tuple(_freeze(l) for l in lambdas))

    @property
    def d(self) -> int:
        return self.W.shape[0]

    @property
    def n_regimes(self) -> int:
        return len(self.lambdas) + 1

    def reconstruct_omegas(self) -> list:
        """Regime covariances implied by the decomposition, first regime first."""
        W = self.W
        out = [W @ W.T]
        for lam in self.lambdas:
            out.append((W * lam) @ W.T)
        return out


@dataclass(frozen=True)
class ImpactMatrix:
    """Impact matrix B_t together with the weights used to build it."""

    B: np.ndarray
    weights_used: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "B", _freeze(self.B))
        object.__setattr__(self, "weights_used", _freeze(self.weights_used))


@dataclass(frozen=True)
class DistinctnessReport:
    """Pairwise distinctness of the diagonal scaling entries.

    ``pairwise[i, j]`` is True when the pair (i, j) of shock positions is
    separated in at least one regime.  The matrix is symmetric with a
    False diagonal.
    """

    pairwise: np.ndarray
    assumption1_holds: bool

    def __post_init__(self):
        pw = np.asarray(self.pairwise, dtype=bool)
        if pw.ndim != 2 or pw.shape[0] != pw.shape[1]:
            raise ModelError(f"pairwise must be square, got {pw.shape}")
        if np.any(np.diag(pw)):
            raise ModelError("pairwise diagonal must be False")
        if not np.array_equal(pw, pw.T):
            raise ModelError("pairwise must be symmetric")
        pw = pw.copy()
        pw.flags.writeable = False
        object.__setattr__(self, "pairwise", pw)
        object.__setattr__(self, "assumption1_holds", bool(self.assumption1_holds))


@dataclass(frozen=True)
class IdentificationResult:
    """Verdict of an identification check with per column diagnostics."""

    verdict: Verdict
    failing_condition: Optional[str]
    tied_pair: Optional[tuple]
    columns: tuple = field(default_factory=tuple)

    @property
    def identified(self) -> bool:
        return self.verdict is not Verdict.NOT_IDENTIFIED


def _validate_spd(omega, name):
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
        raise ModelError(f"{name} must be square, got shape {omega.shape}")
    sym_err = np.max(np.abs(omega - omega.T))
    scale = max(1.0, float(np.max(np.abs(omega))))
    if sym_err > 1e-8 * scale:
        raise ModelError(f"{name} is not symmetric (max asymmetry {sym_err:.3e})")
    omega = 0.5 * (omega + omega.T)
    try:
        np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise ModelError(f"{name} is not positive definite") from None
    return omega


def _canonical_signs(W):
    """Flip each column so its largest magnitude entry is positive."""
    W = W.copy()
    for j in range(W.shape[1]):
        k = int(np.argmax(np.abs(W[:, j])))
        if W[k, j] < 0.0:
            W[:, j] = -W[:, j]
    return W


def decompose_two_regime(omega1, omega2) -> StructuralParams:
    """Simultaneously diagonalize two SPD matrices.

    Returns W and lambda_2 such that omega1 = W W' and
    omega2 = W diag(lambda_2) W', with lambda_2 in non-decreasing order
    and column signs canonicalized (largest magnitude entry positive).

    The construction is the Cholesky and eigendecomposition route: with
    omega1 = L L' and L^-1 omega2 L'^-1 = Q diag(lambda) Q', the matrix
    W = L Q satisfies both identities.
    """
    omega1 = _validate_spd(omega1, "omega1")
    omega2 = _validate_spd(omega2, "omega2")
    if omega1.shape != omega2.shape:
        raise ModelError(
            f"omega1 and omega2 must share a shape, got {omega1.shape} and {omega2.shape}"
        )
    L = np.linalg.cholesky(omega1)
    Y = sla.solve_triangular(L, omega2, lower=True)
    C = sla.solve_triangular(L, Y.T, lower=True).T
    C = 0.5 * (C + C.T)
    lam, Q = np.linalg.eigh(C)
    if np.any(lam <= 0.0):
        raise ModelError("generalized eigenvalues are not strictly positive")
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    W = _canonical_signs(L @ Q[:, order])
    return StructuralParams(W=W, lambdas=(lam,), pattern=None)


def build_B(structural: StructuralParams, weights) -> ImpactMatrix:
    """Impact matrix B_t = W (alpha_1 I + sum_m alpha_m diag(lambda_m))^(1/2).

    ``weights`` is a length M vector of mixing weights (a MixingWeights
    object is accepted as well); the first weight multiplies the identity.
    """
    w = np.asarray(getattr(weights, "weights", weights), dtype=float).reshape(-1)
    M = len(structural.lambdas) + 1
    if w.size != M:
        raise ModelError(f"expected {M} mixing weights, got {w.size}")
    if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-8:
        raise ModelError("mixing weights must be nonnegative and sum to one")
    d = structural.d
    diag = np.full(d, w[0])
    for wm, lam in zip(w[1:], structural.lambdas):
        diag = diag + wm * lam
    B = structural.W * np.sqrt(diag)
    return ImpactMatrix(B=B, weights_used=w)


def check_assumption1(lambdas, rel_tol: float = 1e-8) -> DistinctnessReport:
    """Pairwise distinctness of the scaling entries across regimes.

    Positions i and j are distinct when some regime separates them by a
    relative gap above ``rel_tol``.  Assumption 1 holds when every pair is
    distinct.
    """
    lams = [np.asarray(l, dtype=float).reshape(-1) for l in lambdas]
    if not lams:
        raise ModelError("at least one lambda vector is required")
    d = lams[0].size
    for lam in lams:
        if lam.size != d:
            raise ModelError("lambda vectors must share a length")
        if np.any(lam <= 0.0):
            raise ModelError("lambda vectors must be strictly positive")
    pairwise = np.zeros((d, d), dtype=bool)
    for i in range(d):
        for j in range(i + 1, d):
            distinct = False
            for lam in lams:
                gap = abs(lam[i] - lam[j])
                if gap > rel_tol * max(abs(lam[i]), abs(lam[j])):
                    distinct = True
                    break
            pairwise[i, j] = pairwise[j, i] = distinct
    holds = bool(np.all(pairwise[np.triu_indices(d, k=1)]))
    return DistinctnessReport(pairwise=pairwise, assumption1_holds=holds)


def _flip_cell(c):
    if c == POSITIVE:
        return NEGATIVE
    if c == NEGATIVE:
        return POSITIVE
    return c


def _columns_conflict(ci, cj):
    return any((a, b) in _CONFLICTS for a, b in zip(ci, cj))


def _pair_blocks(ci, cj):
    """Column i can satisfy column j neither as is nor after a sign flip."""
    flipped = tuple(_flip_cell(c) for c in ci)
    return _columns_conflict(ci, cj) and _columns_conflict(flipped, cj)


def check_identification(pattern: ConstraintPattern, report: DistinctnessReport) -> IdentificationResult:
    """Evaluate an identification pattern against a distinctness report.

    The last ``d1`` columns are the shocks of interest.  Full
    identification requires pairwise distinctness against those columns
    (condition 1), mutual constraint conflicts under both sign
    orientations (condition 2), and at least one strict sign constraint
    per column of interest (condition 3).  A single tie between one
    leading column and the first column of interest can be rescued by a
    zero constraint placed against a strict sign (condition 4), in which
    case the shocks of interest remain identified even though the full
    model is not.
    """
    d = pattern.d
    if report.pairwise.shape[0] != d:
        raise ModelError(
            f"report is for {report.pairwise.shape[0]} positions but pattern has {d} columns"
        )
    d1 = pattern.d1
    if d1 < 1:
        raise IdentificationError("pattern must single out at least one column (d1 >= 1)")
    d0 = d - d1
    cols = [pattern.column(j) for j in range(d)]

    failing_pairs = set()
    for j in range(d0, d):
        for i in range(d):
            if i != j and not report.pairwise[i, j]:
                failing_pairs.add(frozenset((i, j)))

    cond2_failures = []
    for j in range(d0, d):
        for i in range(d):
            if i != j and not _pair_blocks(cols[i], cols[j]):
                cond2_failures.append((i, j))

    cond3_failures = [
        j for j in range(d0, d)
        if not any(c in (POSITIVE, NEGATIVE) for c in cols[j])
    ]

    col_info = []
    for j in range(d0, d):
        conflicts_ok = sorted(i for i in range(d) if i != j and _pair_blocks(cols[i], cols[j]))
        col_info.append(
            {
                "column": j + 1,
                "has_sign_constraint": j not in cond3_failures,
                "blocked_against": [i + 1 for i in conflicts_ok],
                "distinct_from": [
                    i + 1 for i in range(d) if i != j and report.pairwise[i, j]
                ],
            }
        )
    col_info = tuple(col_info)

    if cond2_failures:
        return IdentificationResult(
            Verdict.NOT_IDENTIFIED, "condition 2 (column constraint conflicts)", None, col_info
        )
    if cond3_failures:
        return IdentificationResult(
            Verdict.NOT_IDENTIFIED, "condition 3 (sign normalization)", None, col_info
        )
    if not failing_pairs:
        return IdentificationResult(Verdict.IDENTIFIED, None, None, col_info)

    # Condition 1 failed; the single rescuable configuration is one tie
    # between a leading column i and the first column of interest.
    if len(failing_pairs) == 1:
        (pair,) = failing_pairs
        i, j = sorted(pair)
        if i < d0 and j == d0:
            has_zero_on_sign = any(
                cols[i][r] in (POSITIVE, NEGATIVE) and cols[j][r] == ZERO
                for r in range(d)
            )
            if has_zero_on_sign:
                return IdentificationResult(
                    Verdict.IDENTIFIED_PARTIAL_MODEL, None, (i + 1, j + 1), col_info
                )
            return IdentificationResult(
                Verdict.NOT_IDENTIFIED,
                "condition 4 (zero against strict sign on the tied pair)",
                (i + 1, j + 1),
                col_info,
            )
    return IdentificationResult(
        Verdict.NOT_IDENTIFIED, "condition 1 (distinct scaling entries)", None, col_info
    )


def _satisfies_signs(col_values, col_cells) -> bool:
    for v, c in zip(col_values, col_cells):
        if c == POSITIVE and not v > 0.0:
            return False
        if c == NEGATIVE and not v < 0.0:
            return False
    return True


def normalize_W(structural: StructuralParams) -> StructuralParams:
    """Canonical ordering and signs for a structural parameter set.

    Without a pattern, columns are reordered so the first scaling vector
    is non-decreasing and each column's largest magnitude entry is made
    positive.  With a pattern, the column order is fixed by the pattern
    (the shock labels) and only likelihood neutral sign flips are applied
    to satisfy the strict sign cells.
    """
    W = np.asarray(structural.W, dtype=float).copy()
    lambdas = [np.asarray(l, dtype=float).copy() for l in structural.lambdas]
    if structural.pattern is None:
        if lambdas:
            order = np.argsort(lambdas[0], kind="stable")
            W = W[:, order]
            lambdas = [lam[order] for lam in lambdas]
        W = _canonical_signs(W)
        return StructuralParams(W=W, lambdas=tuple(lambdas), pattern=None)

    pattern = structural.pattern
    for j in range(pattern.d):
        cells = pattern.column(j)
        if not any(c in (POSITIVE, NEGATIVE) for c in cells):
            k = int(np.argmax(np.abs(W[:, j])))
            if W[k, j] < 0.0:
                W[:, j] = -W[:, j]
            continue
        if _satisfies_signs(W[:, j], cells):
            continue
        if _satisfies_signs(-W[:, j], cells):
            W[:, j] = -W[:, j]
            continue
        raise IdentificationError(
            f"column {j + 1} cannot satisfy its sign constraints under either orientation"
        )
    return StructuralParams(W=W, lambdas=tuple(lambdas), pattern=pattern)
