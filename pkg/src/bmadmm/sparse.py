"""Symmetric sparse matrices in CSR form plus the norm and extreme-eigenvalue
estimators every other module consumes.

Both triangles of the matrix are stored explicitly, so a product with a dense
factor is a single row scan with a deterministic (ascending column index)
accumulation order.  Matrices are immutable after construction and safe to
share between threads.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, EigenEstimateError


class SparseSymMatrix:
    """Immutable symmetric matrix in canonical CSR layout.

    Attributes
    ----------
    n : int
        Matrix dimension (n >= 1).
    row_ptr, col_idx, values : ndarray
        Canonical CSR arrays.  Every stored entry (i, j, v) has a stored
        mirror (j, i, v) with the identical value; column indices are
        strictly increasing within each row and there are no duplicates.
    """

    __slots__ = ("n", "row_ptr", "col_idx", "values", "_csr", "_norm_cache")

    def __init__(self, n, row_ptr, col_idx, values, validate=True):
        n = int(n)
        row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if validate:
            _validate_csr(n, row_ptr, col_idx, values)
        self.n = n
        self.row_ptr = row_ptr
        self.col_idx = col_idx
        self.values = values
        self._csr = sp.csr_matrix((values, col_idx, row_ptr), shape=(n, n))
        self._norm_cache = {}
        if validate:
            _validate_symmetry(self._csr)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_coo(cls, n, rows, cols, vals):
        """Build from COO triplets.  Duplicates are summed; the triplets must
        describe a symmetric matrix (both triangles present)."""
        coo = sp.coo_matrix(
            (np.asarray(vals, dtype=np.float64), (rows, cols)), shape=(n, n)
        )
        csr = coo.tocsr()
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(n, csr.indptr, csr.indices, csr.data)

    @classmethod
    def from_dense(cls, A):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
        csr = sp.csr_matrix(A)
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(A.shape[0], csr.indptr, csr.indices, csr.data)

    @classmethod
    def identity(cls, n):
        return cls.from_dense(np.eye(n))

    @classmethod
    def zeros(cls, n):
        n = int(n)
        return cls(n, np.zeros(n + 1, dtype=np.int64), [], [])

    # -- basic queries ------------------------------------------------

    @property
    def nnz(self):
        return int(self.values.size)

    def to_dense(self):
        return self._csr.toarray()

    def scaled(self, c):
        """Return c * C as a new matrix (same pattern)."""
        return SparseSymMatrix(
            self.n, self.row_ptr, self.col_idx, c * self.values, validate=False
        )

    def __matmul__(self, V):
        return spmm(self, V)

    def __repr__(self):
        return f"SparseSymMatrix(n={self.n}, nnz={self.nnz})"


def _validate_csr(n, row_ptr, col_idx, values):
    if n < 1:
        raise DimensionMismatch(f"matrix dimension must be >= 1, got {n}")
    if row_ptr.shape != (n + 1,):
        raise DimensionMismatch(
            f"row_ptr must have length n+1={n + 1}, got {row_ptr.shape[0]}"
        )
    if row_ptr[0] != 0 or np.any(np.diff(row_ptr) < 0):
        raise ValueError("row_ptr must start at 0 and be monotone nondecreasing")
    if row_ptr[-1] != col_idx.size or col_idx.size != values.size:
        raise DimensionMismatch(
            f"row_ptr[-1]={row_ptr[-1]} inconsistent with nnz arrays "
            f"({col_idx.size} indices, {values.size} values)"
        )
    if col_idx.size and (col_idx.min() < 0 or col_idx.max() >= n):
        raise ValueError("column index out of range")
    # strictly increasing columns inside each row (no duplicates)
    if col_idx.size > 1:
        diffs = np.diff(col_idx)
        boundary = np.zeros(col_idx.size + 1, dtype=bool)
        boundary[row_ptr] = True  # positions where a new row begins
        same_row = ~boundary[1 : col_idx.size]
        if np.any(diffs[same_row] <= 0):
            raise ValueError("column indices must be strictly increasing per row")


def _validate_symmetry(csr):
    diff = (csr - csr.T).tocoo()
    if diff.nnz and np.any(diff.data != 0.0):
        raise ValueError("matrix is not symmetric: mirrored entries disagree")


def spmm(C, V):
    """Product C @ V of a SparseSymMatrix with a dense factor.

    The accumulation per output row runs over stored entries in ascending
    column order, so results are bit-reproducible for a fixed build.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.shape[0] != C.n:
        raise DimensionMismatch(
            f"factor has {V.shape[0]} rows but matrix dimension is {C.n}"
        )
    return C._csr @ V


def inf_norm(C):
    """Maximum absolute row sum.  For symmetric C this also equals the
    maximum absolute column sum."""
    cached = C._norm_cache.get("inf")
    if cached is not None:
        return cached
    if C.nnz == 0:
        out = 0.0
    else:
        lengths = np.diff(C.row_ptr)
        rows = np.repeat(np.arange(C.n), lengths)
        out = float(np.bincount(rows, weights=np.abs(C.values), minlength=C.n).max())
    C._norm_cache["inf"] = out
    return out


def two_norm_estimate(C, rel_tol=1e-6, max_iter=5000, seed=0):
    """Spectral norm of a symmetric matrix.

    Runs power iteration on the squared operator v <- C^2 v from a seeded
    random unit start, accepting the Rayleigh quotient theta = ||C v||^2
    once its eigen-residual satisfies ||C^2 v - theta v|| <= rel_tol *
    theta.  Squaring merges the two spectrum ends, so when the extreme
    magnitudes are nearly tied (the residual then plateaus at the tie gap)
    the estimate escalates to Lanczos runs on both ends of C, whose local
    convergence is unaffected by the tie.

    Parameters
    ----------
    rel_tol : float
        Relative accuracy target (> 0).
    max_iter : int
        Total matrix-product budget across both phases.
    seed : int
        Seeds the start vectors, making the estimate deterministic.

    Returns
    -------
    float
        Estimate of ||C||_2.

    Raises
    ------
    EigenEstimateError
        If neither phase meets its residual target within the budget; the
        error carries the best estimate.
    """
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be > 0, got {rel_tol}")
    key = ("two", rel_tol, max_iter, seed)
    cached = C._norm_cache.get(key)
    if cached is not None:
        return cached
    if C.nnz == 0:
        C._norm_cache[key] = 0.0
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(C.n)
    v /= np.linalg.norm(v)
    theta = 0.0
    resid = np.inf
    power_budget = min(max_iter // 2, max(64, max_iter // 8))
    for _ in range(power_budget):
        w = spmm(C, v)
        theta = float(w @ w)
        if theta == 0.0:
            # start vector fell in the kernel; redraw deterministically
            v = rng.standard_normal(C.n)
            v /= np.linalg.norm(v)
            continue
        u = spmm(C, w)
        resid = float(np.linalg.norm(u - theta * v))
        if resid <= rel_tol * theta:
            out = float(np.sqrt(theta))
            C._norm_cache[key] = out
            return out
        v = u / np.linalg.norm(u)
    # near-tied extremes: bound each end of the spectrum separately
    side_budget = max(8, (max_iter - 2 * power_budget) // 2)
    best = float(np.sqrt(theta))
    try:
        v0 = rng.standard_normal(C.n)
        v0 /= np.linalg.norm(v0)
        lo, _ = _min_eig_restarted(C, v0, rel_tol, side_budget)
        hi, _ = _min_eig_restarted(C.scaled(-1.0), v0, rel_tol, side_budget)
        out = max(abs(lo), abs(hi))
        C._norm_cache[key] = out
        return out
    except EigenEstimateError as exc:
        best = max(best, abs(exc.estimate))
        raise EigenEstimateError(
            f"two_norm_estimate: residual above target after {max_iter} "
            f"matrix products",
            estimate=best,
            residual=min(resid, exc.residual),
            iterations=max_iter,
        ) from None


def min_eig_estimate(S, rel_tol=1e-8, max_iter=20000, seed=0):
    """Smallest eigenvalue and eigenvector of a symmetric matrix.

    Runs Lanczos from a seeded start vector on the shifted operator
    ``s I - S`` (shift s = spectral-norm upper bound), which makes the
    target eigenvalue dominant: the implicitly restarted ARPACK variant
    where available, falling back to an explicitly restarted iteration with
    full reorthogonalization on problems too small for it.  Convergence is
    accepted only on the explicitly verified residual
    ``||S v - lam v|| <= rel_tol * scale`` with ``scale`` an estimate of
    ||S||_2 from the Ritz values.

    Returns
    -------
    (float, ndarray)
        The eigenvalue estimate and a unit eigenvector (sign fixed so its
        largest-magnitude entry is positive).

    Raises
    ------
    EigenEstimateError
        If the residual target is not met within the budget; the error
        carries the best estimate and its residual.
    """
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be > 0, got {rel_tol}")
    n = S.n
    if n == 1:
        val = float(S.to_dense()[0, 0])
        return val, np.ones(1)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    v0 /= np.linalg.norm(v0)
    if n >= 8 and S.nnz:
        result = _min_eig_arpack(S, v0, rel_tol, max_iter)
        if result is not None:
            val, vec = result
            return float(val), _fix_sign(vec)
    return _min_eig_restarted(S, v0, rel_tol, max_iter)


def _min_eig_arpack(S, v0, rel_tol, max_iter):
    """Implicitly restarted Lanczos on the shifted operator; None when the
    residual check fails (callers fall back to the explicit restart)."""
    import scipy.sparse.linalg as spla

    try:
        shift = two_norm_estimate(S, rel_tol=1e-3, max_iter=500, seed=7) * (1 + 1e-6)
    except EigenEstimateError as exc:
        shift = exc.estimate * 2.0
    if shift == 0.0:
        return None
    B = sp.identity(S.n, format="csr") * shift - S._csr
    # a generous Krylov size resolves the clustered extremes that slack
    # matrices of near-optimal factors produce
    ncv = min(S.n, 64)
    try:
        theta, vecs = spla.eigsh(
            B, k=1, which="LA", v0=v0, ncv=ncv, maxiter=500, tol=rel_tol / 4
        )
    except spla.ArpackNoConvergence as exc:
        if exc.eigenvalues.size == 0:
            return None
        theta, vecs = exc.eigenvalues, exc.eigenvectors
    except spla.ArpackError:
        return None
    val = shift - float(theta[0])
    vec = vecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    resid = float(np.linalg.norm(spmm(S, vec) - val * vec))
    if resid <= rel_tol * max(shift / (1 + 1e-6), np.finfo(float).tiny):
        return val, vec
    return None


def _min_eig_restarted(S, v0, rel_tol, max_iter):
    m = min(S.n, 48)
    matvecs = 0
    best_val, best_vec, best_resid = np.inf, v0, np.inf
    while matvecs < max_iter:
        val, vec, spread, matvecs = _lanczos_bottom(S, v0, m, matvecs)
        resid = float(np.linalg.norm(spmm(S, vec) - val * vec))
        matvecs += 1
        if resid < best_resid:
            best_val, best_vec, best_resid = val, vec, resid
        if resid <= rel_tol * spread or resid == 0.0:
            return float(val), _fix_sign(vec)
        v0 = vec
    raise EigenEstimateError(
        f"min_eig_estimate: residual {best_resid:.3e} above target after "
        f"{max_iter} matrix products",
        estimate=float(best_val),
        residual=best_resid,
        iterations=matvecs,
    )


def _lanczos_bottom(S, v0, m, matvecs):
    """One Lanczos cycle of up to m steps; returns the bottom Ritz pair."""
    n = S.n
    V = np.zeros((m, n))
    alphas = np.zeros(m)
    betas = np.zeros(m)
    V[0] = v0
    steps = 0
    for j in range(m):
        w = spmm(S, V[j])
        matvecs += 1
        alphas[j] = float(V[j] @ w)
        w -= alphas[j] * V[j]
        if j > 0:
            w -= betas[j - 1] * V[j - 1]
        # full reorthogonalization keeps the basis usable at desk scale
        w -= V[: j + 1].T @ (V[: j + 1] @ w)
        steps = j + 1
        beta = float(np.linalg.norm(w))
        if j + 1 == m or beta <= 1e-14 * max(1.0, abs(alphas[j])):
            break
        betas[j] = beta
        V[j + 1] = w / beta
    T = np.diag(alphas[:steps]) + np.diag(betas[: steps - 1], 1) + np.diag(
        betas[: steps - 1], -1
    )
    evals, evecs = np.linalg.eigh(T)
    vec = V[:steps].T @ evecs[:, 0]
    nrm = np.linalg.norm(vec)
    if nrm > 0:
        vec /= nrm
    # lower bound on ||S||_2 from the Ritz range; scales the residual test
    spread = max(abs(float(evals[0])), abs(float(evals[-1])), np.finfo(float).tiny)
    return float(evals[0]), vec, spread, matvecs


def _fix_sign(v):
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v
