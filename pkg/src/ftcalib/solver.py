"""Regularized least-squares solve for ``[C, Ct]``.

The calibration problem is

    min  sum_i || f_i - C r_i - Ct x_i ||^2  +  sum_j d_j || [C, Ct]_{:, j} - [C_w, C_tw]_{:, j} ||^2

with ``d_j = lambda`` on the six raw columns and ``0`` (or ``lambda`` when
``regularize_extras``) on the ``m`` extra-variable columns. The data term is
not divided by ``n``, so ``lambda`` keeps the scale of the closed form
``(K^T K + L)^{-1} (K^T vec(F^T) + L vec(C_wa))`` with ``K = R_a kron I_6``.

Because ``K^T K = (R_a^T R_a) kron I_6`` and ``L = diag(d) kron I_6``, the
Kronecker system splits into six independent ``(6+m)``-sized ridge problems
sharing one normal matrix. ``solve_vectorized`` uses that structure by
default; ``materialize=True`` builds the full Kronecker system instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DataError, DimensionError, IllConditionedError

RCOND_MIN = 1e-12
# below this reciprocal condition the Cholesky path hands over to QR
RCOND_QR = 1e-8


@dataclass(frozen=True, eq=False)
class RegressionInput:
    """Offset-adjusted regression data.

    ``R`` (n, 6) and ``F`` (n, 6) hold one sample per row; ``X`` (n, m) the
    extra linear variables. ``C_w`` and ``C_tw`` are the regularization
    targets; ``C_tw`` defaults to zeros.
    """

    R: np.ndarray
    F: np.ndarray
    X: np.ndarray = None
    lam: float = 0.0
    C_w: np.ndarray = None
    C_tw: np.ndarray = None
    regularize_extras: bool = False

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        F = np.asarray(self.F, dtype=float)
        if R.ndim != 2 or R.shape[1] != 6 or F.ndim != 2 or F.shape[1] != 6:
            raise DimensionError(f"R and F must be (n, 6), got {R.shape} and {F.shape}")
        n = R.shape[0]
        if F.shape[0] != n:
            raise DimensionError(f"R has {n} rows but F has {F.shape[0]}")
        X = np.zeros((n, 0)) if self.X is None else np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        m = X.shape[1]
        if X.shape[0] != n:
            raise DimensionError(f"X has {X.shape[0]} rows, expected {n}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be finite and non-negative, got {self.lam}")
        C_w = np.zeros((6, 6)) if self.C_w is None else np.asarray(self.C_w, dtype=float)
        C_tw = np.zeros((6, m)) if self.C_tw is None else np.asarray(self.C_tw, dtype=float).reshape(6, m)
        if C_w.shape != (6, 6):
            raise DimensionError("C_w must be 6x6")
        if self.C_w is None and self.lam > 0:
            raise ValueError("a workbench matrix is required when lambda > 0")
        for label, arr in (("R", R), ("F", F), ("X", X), ("C_w", C_w), ("C_tw", C_tw)):
            if not np.all(np.isfinite(arr)):
                raise DataError(f"{label} contains NaN or Inf")
        if n < 6 + m:
            raise DimensionError(f"need at least {6 + m} samples for {6 + m} unknowns per axis, got {n}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "C_w", C_w)
        object.__setattr__(self, "C_tw", C_tw)

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    @property
    def design(self) -> np.ndarray:
        return build_augmented(self.R, self.X)

    @property
    def target(self) -> np.ndarray:
        """``[C_w, C_tw]``, shape (6, 6+m)."""
        return np.hstack([self.C_w, self.C_tw])

    @property
    def column_weights(self) -> np.ndarray:
        return regularizer_weights(self.lam, self.m, self.regularize_extras)


@dataclass(frozen=True)
class SolveDiagnostics:
    rcond: float
    method: str
    residual_rms: np.ndarray


class Solution(NamedTuple):
    C: np.ndarray
    Ct: np.ndarray
    diagnostics: SolveDiagnostics


def build_augmented(R, X) -> np.ndarray:
    """Append extra-variable columns to the raw matrix: ``[R, X]``."""
    R = np.asarray(R, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != R.shape[0]:
        raise DimensionError(f"row count mismatch: R has {R.shape[0]}, X has {X.shape[0]}")
    if X.shape[1] == 0:
        return R
    return np.hstack([R, X])


def regularizer_weights(lam, m, regularize_extras=False) -> np.ndarray:
    """Per-column penalty ``d`` of length ``6 + m``."""
    extra = lam if regularize_extras else 0.0
    return np.concatenate([np.full(6, float(lam)), np.full(m, float(extra))])


def regularizer_matrix(lam, m, regularize_extras=False) -> np.ndarray:
    """Diagonal ``L`` acting on ``vec([C, Ct])`` (column-stacked), size ``6(6+m)``."""
    return np.diag(np.repeat(regularizer_weights(lam, m, regularize_extras), 6))


def vec(A) -> np.ndarray:
    """Stack the columns of ``A``."""
    return np.asarray(A).reshape(-1, order="F")


def unvec(v, rows) -> np.ndarray:
    return np.asarray(v).reshape(rows, -1, order="F")


def vec_kron_check(A, X, B, tol=1e-12) -> bool:
    """True iff ``vec(A X B) == (B^T kron A) vec(X)`` to relative ``tol``."""
    lhs = vec(A @ X @ B)
    rhs = np.kron(np.asarray(B).T, A) @ vec(X)
    scale = max(1.0, np.max(np.abs(lhs)), np.max(np.abs(rhs)))
    return bool(np.max(np.abs(lhs - rhs)) <= tol * scale)


def reciprocal_condition(A) -> float:
    """2-norm reciprocal condition of ``A`` after symmetric diagonal scaling.

    Scaling removes the spurious ill-conditioning caused by mixing raw counts
    with temperatures in degrees; a zero diagonal entry means an all-zero
    design column and yields 0.
    """
    d = np.diag(A)
    if np.any(d <= 0):
        return 0.0
    s = 1.0 / np.sqrt(d)
    cond = np.linalg.cond(A * np.outer(s, s))
    return 0.0 if not np.isfinite(cond) else 1.0 / cond


def _check_conditioning(A) -> float:
    rcond = reciprocal_condition(A)
    if rcond < RCOND_MIN:
        raise IllConditionedError(
            f"normal equations are singular to working precision (rcond={rcond:.3g})", rcond
        )
    return rcond


def _diagnostics(inp, C_a, rcond, method) -> SolveDiagnostics:
    resid = inp.F - inp.design @ C_a.T
    return SolveDiagnostics(rcond=rcond, method=method, residual_rms=np.sqrt(np.mean(resid**2, axis=0)))


def _split(C_a, inp, rcond, method) -> Solution:
    return Solution(C_a[:, :6].copy(), C_a[:, 6:].copy(), _diagnostics(inp, C_a, rcond, method))


def _stacked_qr(design, d, target, F):
    """Orthogonal-factorization solve of ``[design; sqrt(D)] c = [F; sqrt(D) target^T]``."""
    w = np.sqrt(d)
    keep = w > 0
    A = np.vstack([design, np.diag(w)[keep]])
    rhs = np.vstack([F, (w[:, None] * target.T)[keep]])
    Q, Rf = np.linalg.qr(A)
    return scipy.linalg.solve_triangular(Rf, Q.T @ rhs).T


def solve_vectorized(inp: RegressionInput, materialize=False) -> Solution:
    """Closed-form regularized solve returning ``(C, Ct, diagnostics)``.

    With ``materialize=False`` the shared ``(6+m)``-sized normal matrix is
    factorized once (Cholesky, or QR on the stacked system when poorly
    conditioned). With ``materialize=True`` the full ``6(6+m)`` Kronecker
    system is formed and solved directly.
    """
    Ra = inp.design
    d = inp.column_weights
    G = Ra.T @ Ra + np.diag(d)
    rcond = _check_conditioning(G)
    target = inp.target

    if materialize:
        K = np.kron(Ra, np.eye(6))
        L = np.diag(np.repeat(d, 6))
        lhs = K.T @ K + L
        rhs = K.T @ vec(inp.F.T) + L @ vec(target)
        C_a = unvec(np.linalg.solve(lhs, rhs), 6)
        return _split(C_a, inp, rcond, "kronecker")

    if rcond < RCOND_QR:
        return _split(_stacked_qr(Ra, d, target, inp.F), inp, rcond, "qr")
    rhs = Ra.T @ inp.F + d[:, None] * target.T
    C_a = scipy.linalg.cho_solve(scipy.linalg.cho_factor(G), rhs).T
    return _split(C_a, inp, rcond, "cholesky")


def solve_per_axis(inp: RegressionInput) -> Solution:
    """Solve the six scalar-output ridge problems one axis at a time.

    Each axis uses an orthogonal factorization of its own stacked system, so
    this path shares no linear algebra with ``solve_vectorized``.
    """
    Ra = inp.design
    d = inp.column_weights
    rcond = _check_conditioning(Ra.T @ Ra + np.diag(d))
    target = inp.target
    w = np.sqrt(d)
    rows = []
    for k in range(6):
        A = np.vstack([Ra, np.diag(w)])
        b = np.concatenate([inp.F[:, k], w * target[k]])
        coef, *_ = np.linalg.lstsq(A, b, rcond=None)
        rows.append(coef)
    return _split(np.array(rows), inp, rcond, "per-axis")


def solve(inp: RegressionInput) -> Solution:
    """Default production solve."""
    return solve_vectorized(inp)


def objective(C, Ct, inp: RegressionInput) -> float:
    """Unnormalized objective minimized by the closed form."""
    C_a = np.hstack([np.asarray(C, dtype=float), np.asarray(Ct, dtype=float).reshape(6, inp.m)])
    resid = inp.F - inp.design @ C_a.T
    dev = C_a - inp.target
    return float(np.sum(resid**2) + np.sum(inp.column_weights * np.sum(dev**2, axis=0)))
