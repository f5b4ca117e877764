"""Dense factorizations, a matrix-free GMRES, ILU(0), and solver selection.

Dense LU/QR/Cholesky/SVD are LAPACK-backed with explicit pivot/rank checks
so failures surface as typed errors rather than garbage solutions. GMRES is
Arnoldi with modified Gram-Schmidt and Givens rotations, no restarts, left
preconditioning. There is no sparse direct factorization: sparse systems
route to GMRES preconditioned with zero-fill incomplete LU.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (KrylovBreakdown, NotPositiveDefinite, RankDeficient,
                     SingularMatrix, ZeroPivot)

_EPS = np.finfo(float).eps


@dataclass
class LinearOperator:
    """A linear map exposed through matrix-vector products.

    ``apply`` computes A @ v; ``apply_transpose`` (optional) computes
    A.T @ v. Trait flags drive the default solver selection.
    """

    n: int
    apply: callable
    apply_transpose: callable = None
    is_materialized: bool = False
    is_symmetric: bool = False
    is_sparse: bool = False

    @classmethod
    def from_dense(cls, A):
        A = np.asarray(A, dtype=float)
        return cls(n=A.shape[0], apply=lambda v: A @ v,
                   apply_transpose=lambda v: A.T @ v,
                   is_materialized=True,
                   is_symmetric=bool(np.allclose(A, A.T)))

    @classmethod
    def from_csc(cls, m):
        return cls(n=m.n_rows, apply=m.matvec, apply_transpose=m.rmatvec,
                   is_materialized=True, is_sparse=True)


@dataclass(frozen=True)
class LinearSolverChoice:
    """Which linear solver a solve step should use."""

    kind: str  # "lu" | "qr" | "cholesky" | "svd" | "gmres" | "auto"
    krylov_dim: int = None
    precond: str = None  # None or "ilu0"

    def __post_init__(self):
        if self.kind not in ("lu", "qr", "cholesky", "svd", "gmres", "auto"):
            raise ValueError(f"unknown linear solver kind {self.kind!r}")
        if self.krylov_dim is not None and self.krylov_dim < 1:
            raise ValueError("krylov_dim must be >= 1")


LU = LinearSolverChoice("lu")
QR = LinearSolverChoice("qr")
CHOLESKY = LinearSolverChoice("cholesky")
SVD = LinearSolverChoice("svd")
AUTO = LinearSolverChoice("auto")


def GMRES(krylov_dim=None, precond=None):
    return LinearSolverChoice("gmres", krylov_dim, precond)


class LuFactorization:
    """Partial-pivoting LU of a square matrix, reusable for several solves.

    With ``strict=True`` any pivot below the scaled machine threshold
    raises SingularMatrix; ``strict=False`` (used by iteration drivers on
    wildly-scaled intermediate Jacobians) only rejects exactly zero pivots.
    """

    def __init__(self, A, strict=True):
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        if A.shape[0] != A.shape[1]:
            raise ValueError("LU requires a square matrix")
        anorm = float(np.max(np.abs(A))) if A.size else 0.0
        if anorm == 0.0 or not np.isfinite(anorm):
            raise SingularMatrix("zero or non-finite matrix")
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            self._lu, self._piv = scipy.linalg.lu_factor(A, check_finite=False)
        pivots = np.abs(np.diag(self._lu))
        tol = _EPS * anorm * n if strict else 0.0
        if np.min(pivots) <= tol:
            raise SingularMatrix(
                f"pivot {np.min(pivots):.3e} at or below threshold {tol:.3e}")
        self._anorm1 = float(np.linalg.norm(A, 1))
        self.n = n

    def solve(self, b):
        return scipy.linalg.lu_solve((self._lu, self._piv), b, check_finite=False)

    def solve_transpose(self, b):
        return scipy.linalg.lu_solve((self._lu, self._piv), b, trans=1,
                                     check_finite=False)

    def condition_1norm(self):
        """1-norm condition estimate from the factorization (LAPACK gecon)."""
        gecon = scipy.linalg.get_lapack_funcs("gecon", (self._lu,))
        rcond, _ = gecon(self._lu, self._anorm1)
        return 1.0 / rcond if rcond > 0 else math.inf


def lu_solve(A, b):
    """Solve A x = b by partial-pivoting LU; raises SingularMatrix."""
    return LuFactorization(A).solve(np.asarray(b, dtype=float))


def qr_solve(A, b):
    """Least-squares/minimum-residual solve via Householder QR.

    Square or tall A with full column rank; raises RankDeficient when an R
    diagonal entry falls below the scaled machine threshold.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    Q, R = np.linalg.qr(A, mode="reduced")
    anorm = float(np.max(np.abs(A))) if A.size else 0.0
    tol = _EPS * anorm * max(m, n)
    diag = np.abs(np.diag(R))
    if anorm == 0.0 or np.min(diag) < tol:
        raise RankDeficient(f"R diagonal below threshold {tol:.3e}")
    return scipy.linalg.solve_triangular(R, Q.T @ b, check_finite=False)


def cholesky_solve(A, b):
    """Solve with a symmetric positive definite A; raises NotPositiveDefinite."""
    A = np.asarray(A, dtype=float)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    y = scipy.linalg.solve_triangular(L, np.asarray(b, dtype=float),
                                      lower=True, check_finite=False)
    return scipy.linalg.solve_triangular(L.T, y, check_finite=False)


def svd_solve(A, b, rcond=None):
    """Minimum-norm least-squares solution with small singular values cut."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if rcond is None:
        rcond = _EPS * max(A.shape)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(A.shape[1])
    keep = s > rcond * s[0]
    coef = (U.T @ b)[keep] / s[keep]
    return Vt[keep].T @ coef


@dataclass
class KrylovResult:
    x: np.ndarray
    relres: float
    iterations: int
    residual_norms: np.ndarray


def gmres(op, b, krylov_dim=None, precond=None, reltol=1e-8):
    """GMRES without restarts: at most ``krylov_dim`` Arnoldi steps.

    ``op`` is a LinearOperator (or anything with .n/.apply); ``precond``
    optionally supplies apply(v) = M^-1 v for left preconditioning. Returns
    the iterate with the smallest preconditioned residual plus the achieved
    relative residual. Happy breakdown returns the exact subspace solution.
    """
    b = np.asarray(b, dtype=float)
    n = op.n
    m = krylov_dim if krylov_dim is not None else min(n, 100)
    M = precond.apply if precond is not None else (lambda v: v)

    r0 = M(b)
    beta = float(np.linalg.norm(r0))
    if beta == 0.0:
        return KrylovResult(np.zeros(n), 0.0, 0, np.zeros(0))
    if not np.isfinite(beta):
        raise KrylovBreakdown("preconditioned right-hand side is non-finite")

    V = np.zeros((n, m + 1))
    H = np.zeros((m + 1, m))
    cs = np.zeros(m)
    sn = np.zeros(m)
    g = np.zeros(m + 1)
    g[0] = beta
    V[:, 0] = r0 / beta
    resnorms = []
    k = 0
    for j in range(m):
        w = M(op.apply(V[:, j]))
        for i in range(j + 1):
            H[i, j] = V[:, i] @ w
            w -= H[i, j] * V[:, i]
        h_sub = float(np.linalg.norm(w))
        if not np.isfinite(h_sub):
            raise KrylovBreakdown("Arnoldi produced a non-finite basis vector")
        H[j + 1, j] = h_sub
        happy = h_sub <= _EPS * beta * 10.0

        # apply stored rotations, then eliminate the new subdiagonal entry
        for i in range(j):
            t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
            H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
            H[i, j] = t
        nu = math.hypot(H[j, j], H[j + 1, j])
        if nu == 0.0:
            raise KrylovBreakdown("zero rotation norm before convergence")
        cs[j] = H[j, j] / nu
        sn[j] = H[j + 1, j] / nu
        H[j, j] = nu
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]

        k = j + 1
        resnorms.append(abs(g[j + 1]) / beta)
        if happy or resnorms[-1] <= reltol:
            break
        V[:, j + 1] = w / h_sub

    y = scipy.linalg.solve_triangular(H[:k, :k], g[:k], check_finite=False)
    x = V[:, :k] @ y
    return KrylovResult(x, resnorms[-1], k, np.array(resnorms))


class Ilu0:
    """Zero-fill incomplete LU preconditioner on a CscMatrix pattern.

    apply(v) performs the unit-lower and upper triangular solves. Rows of
    the input must have their diagonal structurally present.
    """

    def __init__(self, A):
        n = A.n_rows
        if A.n_cols != n:
            raise ValueError("ILU(0) requires a square matrix")
        # row-wise copy of the pattern and values
        row_cols = [[] for _ in range(n)]
        row_vals = [[] for _ in range(n)]
        for j in range(A.n_cols):
            for k in range(A.indptr[j], A.indptr[j + 1]):
                row_cols[A.rowind[k]].append(j)
                row_vals[A.rowind[k]].append(A.values[k])
        rows = []
        for i in range(n):
            order = np.argsort(row_cols[i])
            cols = np.array(row_cols[i], dtype=np.int64)[order]
            vals = np.array(row_vals[i], dtype=float)[order]
            if i not in cols:
                raise ZeroPivot(f"row {i} lacks a structural diagonal entry")
            rows.append((cols, vals, {int(c): t for t, c in enumerate(cols)}))

        diag = np.zeros(n)
        for i in range(n):
            cols_i, vals_i, pos_i = rows[i]
            for t, kcol in enumerate(cols_i):
                if kcol >= i:
                    break
                if diag[kcol] == 0.0:
                    raise ZeroPivot(f"zero pivot at row {kcol}")
                vals_i[t] /= diag[kcol]
                cols_k, vals_k, _ = rows[kcol]
                start = np.searchsorted(cols_k, kcol + 1)
                for tt in range(start, len(cols_k)):
                    jcol = int(cols_k[tt])
                    tj = pos_i.get(jcol)
                    if tj is not None:
                        vals_i[tj] -= vals_i[t] * vals_k[tt]
            dpos = pos_i[i]
            if vals_i[dpos] == 0.0:
                raise ZeroPivot(f"zero pivot at row {i}")
            diag[i] = vals_i[dpos]

        self.n = n
        self._diag = diag
        # split into strictly-lower and upper (incl. diagonal) parts per row
        self._lower = []
        self._upper = []
        for i in range(n):
            cols_i, vals_i, pos_i = rows[i]
            d = pos_i[i]
            self._lower.append((cols_i[:d], vals_i[:d].copy()))
            self._upper.append((cols_i[d + 1:], vals_i[d + 1:].copy()))

    def apply(self, v):
        """Return (LU)^-1 v via forward and backward substitution."""
        n = self.n
        y = np.asarray(v, dtype=float).copy()
        for i in range(n):
            cols, vals = self._lower[i]
            if len(cols):
                y[i] -= vals @ y[cols]
        x = y
        for i in range(n - 1, -1, -1):
            cols, vals = self._upper[i]
            if len(cols):
                x[i] -= vals @ x[cols]
            x[i] /= self._diag[i]
        return x


def ilu0(A):
    """Build the zero-fill incomplete LU preconditioner for a CscMatrix."""
    return Ilu0(A)


@dataclass(frozen=True)
class OperatorTraits:
    """Facts about a linear system used by the selection policy."""

    n: int
    is_materialized: bool = True
    is_sparse: bool = False
    is_symmetric: bool = False
    density: float = None
    cond_estimate: float = None


# Cutoffs for the conditioning branches: SVD beyond 1/sqrt(eps), QR for
# merely ill-conditioned systems.
EXTREME_COND = 1.0 / math.sqrt(_EPS)
ILL_COND = 1e6


def select_linear_solver(traits):
    """Default policy mapping operator traits to a LinearSolverChoice.

    Matrix-free operators take GMRES; symmetric positive definite systems
    Cholesky; large/very sparse matrices GMRES with ILU(0) (no sparse direct
    factorization is shipped); very ill-conditioned dense systems fall back
    to QR and then SVD; everything else uses LU.
    """
    if not traits.is_materialized:
        return GMRES()
    if traits.is_symmetric:
        return CHOLESKY
    if traits.is_sparse and (traits.n > 10_000 or
                             (traits.density is not None and traits.density < 0.01)):
        return GMRES(precond="ilu0")
    if traits.cond_estimate is not None:
        if traits.cond_estimate > EXTREME_COND:
            return SVD
        if traits.cond_estimate > ILL_COND:
            return QR
    return LU
