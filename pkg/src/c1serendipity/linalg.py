"""Dense LU with partial pivoting and sparse SPD solvers.

Global systems are stored as ``scipy.sparse.csr_matrix``.  The direct solver
reorders with reverse Cuthill-McKee and factors the resulting band with
LAPACK's banded Cholesky; it never pivots, so a breakdown means the matrix is
not positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee


class SingularMatrixError(np.linalg.LinAlgError):
    pass


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class LUFactors:
    lu: np.ndarray
    perm: np.ndarray  # row permutation: P A = L U with (P A)[i] = A[perm[i]]


def lu_factor(A) -> LUFactors:
    """Doolittle LU with partial pivoting.  Raises on an exact zero pivot.

    ``np.longdouble`` input is factored in extended precision.
    """
    a = np.array(A, copy=True)
    if a.dtype != np.longdouble:
        a = a.astype(float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    perm = np.arange(n)
    for j in range(n):
        p = j + int(np.argmax(np.abs(a[j:, j])))
        if a[p, j] == 0.0:
            raise SingularMatrixError(f"zero pivot in column {j}")
        if p != j:
            a[[j, p]] = a[[p, j]]
            perm[[j, p]] = perm[[p, j]]
        a[j + 1 :, j] /= a[j, j]
        a[j + 1 :, j + 1 :] -= np.outer(a[j + 1 :, j], a[j, j + 1 :])
    return LUFactors(a, perm)


def _substitute(lu: np.ndarray, B: np.ndarray, lower: bool) -> np.ndarray:
    # dtype-preserving triangular solve (scipy only handles float64)
    n = lu.shape[0]
    X = np.array(B, dtype=lu.dtype, copy=True)
    order = range(n) if lower else range(n - 1, -1, -1)
    for i in order:
        if lower:
            X[i] -= lu[i, :i] @ X[:i]
        else:
            X[i] -= lu[i, i + 1 :] @ X[i + 1 :]
            X[i] /= lu[i, i]
    return X


def _lu_apply(f: LUFactors, B: np.ndarray, transpose: bool = False) -> np.ndarray:
    lu = f.lu
    if lu.dtype == np.longdouble:
        if transpose:
            raise NotImplementedError("transposed extended-precision solves")
        y = _substitute(lu, np.asarray(B)[f.perm], lower=True)
        return _substitute(lu, y, lower=False)
    if not transpose:
        y = scipy.linalg.solve_triangular(lu, B[f.perm], lower=True, unit_diagonal=True)
        return scipy.linalg.solve_triangular(lu, y, lower=False)
    # A^T x = b  <=>  U^T L^T P x = b
    z = scipy.linalg.solve_triangular(lu, B, lower=False, trans="T")
    w = scipy.linalg.solve_triangular(lu, z, lower=True, unit_diagonal=True, trans="T")
    x = np.empty_like(w)
    x[f.perm] = w
    return x


def lu_solve(A, B) -> np.ndarray:
    """Solve ``A X = B`` for a square ``A``; ``B`` may be a vector or a matrix."""
    B = np.asarray(B, dtype=float)
    f = lu_factor(A)
    if B.shape[0] != f.lu.shape[0]:
        raise ValueError("right-hand side has the wrong number of rows")
    return _lu_apply(f, B)


def lu_solve_factored(f: LUFactors, B) -> np.ndarray:
    return _lu_apply(f, np.asarray(B))


def condition_estimate(A, factors: LUFactors | None = None) -> float:
    """Estimate the 1-norm condition number ``||A||_1 ||A^-1||_1``.

    Uses Hager's estimator (the LAPACK ``xLACON`` iteration) for
    ``||A^-1||_1`` through solves with the LU factors.  Returns ``inf`` for a
    singular matrix.
    """
    A = np.asarray(A, dtype=float)
    if factors is not None and factors.lu.dtype != np.float64:
        factors = None
    try:
        f = factors if factors is not None else lu_factor(A)
    except SingularMatrixError:
        return float("inf")
    n = A.shape[0]
    if not np.all(np.isfinite(f.lu)) or np.any(np.diag(f.lu) == 0.0):
        return float("inf")
    anorm = np.abs(A).sum(axis=0).max()
    x = np.full(n, 1.0 / n)
    est = 0.0
    last_j = -1
    for _ in range(5):
        y = _lu_apply(f, x)
        est_new = np.abs(y).sum()
        if not np.isfinite(est_new):
            return float("inf")
        if est_new <= est:
            break
        est = est_new
        xi = np.where(y >= 0, 1.0, -1.0)
        z = _lu_apply(f, xi, transpose=True)
        j = int(np.argmax(np.abs(z)))
        if j == last_j or np.abs(z[j]) <= z @ x:
            break
        last_j = j
        x = np.zeros(n)
        x[j] = 1.0
    # alternative lower bound from the xLACON fallback vector
    alt = (-1.0) ** np.arange(n) * (1.0 + np.arange(n) / max(n - 1, 1))
    alt_est = 2.0 * np.abs(_lu_apply(f, alt)).sum() / (3.0 * n)
    return float(anorm * max(est, alt_est))


def as_csr(A) -> sp.csr_matrix:
    """CSR copy with sorted column indices and merged duplicates."""
    m = sp.csr_matrix(A, dtype=float, copy=True)
    m.sum_duplicates()
    m.sort_indices()
    return m


@dataclass
class SolveResult:
    x: np.ndarray
    residual: float  # ||A x - b||_2 / ||b||_2 (absolute when b = 0)
    iterations: int = 0
    x_ext: np.ndarray | None = None  # long-double solution when refined


def _relative_residual(A, x, b) -> float:
    r = np.linalg.norm(A @ x - b)
    nb = np.linalg.norm(b)
    return float(r / nb) if nb > 0 else float(r)


class ExtendedMatrix:
    """Square sparse matrix held in long double, used for residuals only.

    Entries are kept as row-sorted COO triplets with duplicates merged;
    ``self @ x`` forms every product and row sum in extended precision.
    """

    def __init__(self, rows, cols, vals, n: int):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.longdouble)
        key = rows * n + cols
        order = np.argsort(key, kind="stable")
        key, vals = key[order], vals[order]
        uniq, start = np.unique(key, return_index=True)
        self.vals = np.add.reduceat(vals, start) if len(vals) else vals
        self.rows, self.cols = uniq // n, uniq % n
        self.shape = (n, n)
        self._row_start = np.searchsorted(self.rows, np.arange(n))
        self._nonempty = np.unique(self.rows)

    def submatrix(self, keep: np.ndarray) -> "ExtendedMatrix":
        """Rows and columns listed in ``keep`` (sorted global ids)."""
        pos = np.full(self.shape[0], -1)
        pos[keep] = np.arange(len(keep))
        r, c = pos[self.rows], pos[self.cols]
        m = (r >= 0) & (c >= 0)
        return ExtendedMatrix(r[m], c[m], self.vals[m], len(keep))

    def to_csr(self) -> sp.csr_matrix:
        return as_csr(sp.coo_matrix((self.vals.astype(float), (self.rows, self.cols)), shape=self.shape))

    def __matmul__(self, x):
        x = np.asarray(x)
        out = np.zeros(self.shape[0], dtype=np.longdouble)
        if len(self.vals):
            prod = self.vals * x[self.cols].astype(np.longdouble)
            starts = np.searchsorted(self.rows, self._nonempty)
            out[self._nonempty] = np.add.reduceat(prod, starts)
        return out


def _banded_factor(A: sp.csr_matrix):
    """Jacobi-scaled, RCM-ordered banded Cholesky; returns a solve closure."""
    n = A.shape[0]
    d = A.diagonal()
    if np.any(d <= 0):
        raise NotPositiveDefiniteError("non-positive diagonal entry")
    s = 1.0 / np.sqrt(d)
    S = sp.diags(s) @ A @ sp.diags(s)
    perm = reverse_cuthill_mckee(as_csr(S), symmetric_mode=True)
    P = S.tocsr()[perm][:, perm].tocoo()
    upper = P.row <= P.col
    rows, cols, vals = P.row[upper], P.col[upper], P.data[upper]
    bw = int((cols - rows).max(initial=0))
    ab = np.zeros((bw + 1, n))
    np.add.at(ab, (bw + rows - cols, cols), vals)
    try:
        cb = scipy.linalg.cholesky_banded(ab, lower=False, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            f"Cholesky breakdown on a {n}x{n} system (band {bw}): {exc}"
        ) from exc

    def solve(rhs):
        rhs = np.asarray(rhs, dtype=float)
        y = scipy.linalg.cho_solve_banded((cb, False), (s * rhs)[perm], check_finite=False)
        out = np.empty(n)
        out[perm] = y
        return s * out

    return solve


def banded_cholesky_solve(A: sp.csr_matrix, b: np.ndarray, refine: int = 3) -> np.ndarray:
    """RCM-ordered banded Cholesky with symmetric diagonal scaling.

    The scaled matrix ``D A D`` (unit diagonal) is factored once; up to
    ``refine`` steps of iterative refinement then polish the solution.
    """
    solve = _banded_factor(A)
    x = solve(b)
    best, best_r = x, np.linalg.norm(A @ x - b)
    for _ in range(refine):
        r = b - A @ x
        x = x + solve(r)
        rn = np.linalg.norm(A @ x - b)
        if rn >= best_r:
            break
        best, best_r = x, rn
    return best


def refine_extended(A_ext: ExtendedMatrix, b_ext, solve, x0, maxiter: int = 10, rtol: float = 1e-15):
    """Mixed-precision iterative refinement.

    ``solve`` applies an approximate inverse in double precision; residuals
    and the accumulated solution are long double.  Stops once the relative
    residual is below ``rtol`` or stops decreasing.
    """
    b_ext = np.asarray(b_ext, dtype=np.longdouble)
    nb = float(np.sqrt(np.sum(b_ext * b_ext)))
    x = np.asarray(x0, dtype=np.longdouble)
    r = b_ext - A_ext @ x
    rn = float(np.sqrt(np.sum(r * r)))
    for _ in range(maxiter):
        if nb == 0 or rn <= rtol * nb:
            break
        x_new = x + np.asarray(solve(r.astype(float)), dtype=np.longdouble)
        r_new = b_ext - A_ext @ x_new
        rn_new = float(np.sqrt(np.sum(r_new * r_new)))
        if not rn_new < rn:
            break
        x, r, rn = x_new, r_new, rn_new
    return x, (rn / nb if nb > 0 else rn)


def pcg(A: sp.csr_matrix, b: np.ndarray, rtol: float = 1e-12, maxiter: int | None = None):
    """Jacobi-preconditioned conjugate gradients."""
    n = A.shape[0]
    maxiter = 50 * n if maxiter is None else maxiter
    d = A.diagonal()
    if np.any(d <= 0):
        raise NotPositiveDefiniteError("non-positive diagonal entry")
    x = np.zeros(n)
    r = b.copy()
    nb = np.linalg.norm(b)
    if nb == 0:
        return x, 0
    z = r / d
    p = z.copy()
    rz = r @ z
    for it in range(1, maxiter + 1):
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise NotPositiveDefiniteError(f"p^T A p = {pAp:.3e} at iteration {it}")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= rtol * nb:
            # guard against drift of the recursive residual
            if np.linalg.norm(b - A @ x) <= rtol * nb:
                return x, it
            r = b - A @ x
        z = r / d
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"PCG stopped after {maxiter} iterations with relative residual "
        f"{np.linalg.norm(b - A @ x) / nb:.3e}"
    )


def spd_solve(A, b, method: str = "cholesky", A_ext: ExtendedMatrix | None = None,
              b_ext=None) -> SolveResult:
    """Solve a sparse SPD system; the achieved relative residual is returned.

    When the long-double matrix ``A_ext`` (and optionally ``b_ext``) is given,
    the double-precision solution is refined against it and the residual is
    measured in extended precision.
    """
    A = as_csr(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}")
    if n == 0:
        return SolveResult(np.zeros(0), 0.0)
    if method == "cholesky":
        if A_ext is None:
            x = banded_cholesky_solve(A, b)
            return SolveResult(x, _relative_residual(A, x, b))
        solve = _banded_factor(A)
        x = solve(b)
        it = 0
    elif method == "pcg":
        x, it = pcg(A, b)

        def solve(r):
            return pcg(A, r, rtol=1e-12)[0]

    else:
        raise ValueError(f"unknown solver {method!r}")
    if A_ext is None:
        return SolveResult(x, _relative_residual(A, x, b), it)
    b_ext = b if b_ext is None else b_ext
    x_ext, res = refine_extended(A_ext, b_ext, solve, x)
    return SolveResult(x_ext.astype(float), res, it, x_ext)
