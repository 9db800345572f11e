r"""Global quadratic surrogates and the closed-form gradient-covariance
subspace estimator.

A least-squares quadratic $f(x) \approx \tfrac12 x^T A x + c^T x + e$ over
box-normalized inputs yields the gradient covariance in closed form,
$K = \gamma A^2 + c c^T$, whose leading eigenvectors span the directions of
strongest variation. Under the uniform measure on $[-1,1]^d$ the exact
constant is $\gamma = 1/3$; $\gamma = 4/3$ is accepted as a compatibility
option (see ``DEFAULT_GAMMA`` / ``COMPAT_GAMMA``).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import PreconditionError
from .subspace import Subspace

DEFAULT_GAMMA = 1.0 / 3.0
COMPAT_GAMMA = 4.0 / 3.0

_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticModel:
    """Coefficients of the fitted quadratic, with A symmetric."""

    A: np.ndarray
    c: np.ndarray
    e: float
    degenerate: bool = False

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        c = np.array(self.c, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if c.shape != (A.shape[0],):
            raise ValueError(
                f"c must be a vector of length {A.shape[0]}, got {c.shape}"
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(c))
                and np.isfinite(self.e)):
            raise ValueError("quadratic model entries must be finite")
        scale = max(1.0, np.abs(A).max())
        if np.abs(A - A.T).max() > _SYMMETRY_TOL * scale:
            raise ValueError("A must be symmetric")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)

    @property
    def dimension(self) -> int:
        return self.A.shape[0]

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.A, X) + X @ self.c + self.e


@dataclass(frozen=True)
class EigenReport:
    """Descending eigenvalues/eigenvectors of a gradient covariance, with
    optional per-index bootstrap min/max bands."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    bootstrap_lo: np.ndarray | None = None
    bootstrap_hi: np.ndarray | None = None
    replicates: int = 0
    subsample_size: int = 0

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        W = np.asarray(self.eigenvectors, dtype=float)
        if np.any(np.diff(w) > 0):
            raise ValueError("eigenvalues must be sorted descending")
        if np.any(w < 0):
            raise ValueError("eigenvalues must be non-negative")
        defect = np.abs(W.T @ W - np.eye(W.shape[1])).max()
        if defect > 1e-10:
            raise ValueError("eigenvector matrix must be column-orthonormal")
        if (self.bootstrap_lo is None) != (self.bootstrap_hi is None):
            raise ValueError("bootstrap bands must be provided together")
        if self.bootstrap_lo is not None:
            lo = np.asarray(self.bootstrap_lo, dtype=float)
            hi = np.asarray(self.bootstrap_hi, dtype=float)
            if lo.shape != w.shape or hi.shape != w.shape:
                raise ValueError("bands must match the eigenvalue count")
            if np.any(lo > hi):
                raise ValueError("lower band exceeds upper band")


def coefficient_count(d: int, k: int) -> int:
    """Number of coefficients in a total-order degree-k polynomial in d
    variables: binomial(d + k, k)."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    if k < 0:
        raise ValueError(f"degree must be non-negative, got {k}")
    return comb(d + k, k)


def _quadratic_design_matrix(X: np.ndarray) -> np.ndarray:
    """Columns: 1, x_1..x_d, then for i <= j the products (0.5 x_i^2 for
    i == j, x_i x_j otherwise), so the coefficients read back directly as
    e, c, and the free entries of symmetric A."""
    N, d = X.shape
    cols = [np.ones(N)] + [X[:, j] for j in range(d)]
    for i in range(d):
        cols.append(0.5 * X[:, i] ** 2)
        for j in range(i + 1, d):
            cols.append(X[:, i] * X[:, j])
    return np.column_stack(cols)


def _unpack_quadratic(theta: np.ndarray, d: int):
    e = float(theta[0])
    c = theta[1 : 1 + d].copy()
    A = np.zeros((d, d))
    pos = 1 + d
    for i in range(d):
        A[i, i] = theta[pos]
        pos += 1
        for j in range(i + 1, d):
            A[i, j] = A[j, i] = theta[pos]
            pos += 1
    return A, c, e


def fit_quadratic(
    doe,
    oversampling_min: float = 1.5,
    allow_undersampled: bool = False,
) -> QuadraticModel:
    """Least-squares fit of 0.5 x^T A x + c^T x + e to the sample pairs.

    Requires N >= oversampling_min * binomial(d+2, 2) unless
    ``allow_undersampled`` overrides (needed for bootstrap refits). A
    rank-deficient design matrix is solved in the minimum-norm sense and
    flagged through ``degenerate``.
    """
    X = np.asarray(doe.inputs, dtype=float)
    f = np.asarray(doe.outputs, dtype=float)
    N, d = X.shape
    M = coefficient_count(d, 2)
    if not allow_undersampled and N < oversampling_min * M:
        raise PreconditionError(
            f"{N} samples fall short of the oversampling floor "
            f"{oversampling_min} x {M} = {oversampling_min * M:g}; "
            f"pass allow_undersampled=True to override"
        )
    if N < 1:
        raise PreconditionError("at least one sample is required")

    V = _quadratic_design_matrix(X)
    theta, _, rank, _ = np.linalg.lstsq(V, f, rcond=None)
    A, c, e = _unpack_quadratic(theta, d)
    return QuadraticModel(A=A, c=c, e=e, degenerate=bool(rank < V.shape[1]))


def gradient_covariance(model: QuadraticModel, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """Closed-form covariance of the surrogate gradient, K = gamma A^2 + c c^T."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    K = gamma * (model.A @ model.A) + np.outer(model.c, model.c)
    return 0.5 * (K + K.T)


def _descending_eigh(K: np.ndarray):
    w, W = np.linalg.eigh(K)
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], W[:, order]


def pick_gap_dimension(eigenvalues: np.ndarray, n_max: int | None = None) -> int:
    """Dimension maximizing the eigenvalue ratio lambda_n / lambda_{n+1}.

    Ties and the 0/0 case resolve to the smallest n. ``n_max`` bounds the
    search (default d - 1).
    """
    w = np.asarray(eigenvalues, dtype=float)
    d = len(w)
    if d < 2:
        return d
    limit = d - 1 if n_max is None else min(n_max, d - 1)
    if limit < 1:
        raise ValueError(f"n_max must allow at least one dimension, got {n_max}")
    best_n, best_ratio = 1, -np.inf
    for n in range(1, limit + 1):
        lo = w[n]
        if lo > 0:
            ratio = w[n - 1] / lo
        else:
            ratio = np.inf if w[n - 1] > 0 else 1.0
        if ratio > best_ratio:
            best_n, best_ratio = n, ratio
    return best_n


def active_subspace(
    K: np.ndarray,
    n: int | None = None,
    n_max: int | None = None,
) -> tuple[Subspace, EigenReport]:
    """Leading eigenvector span of a symmetric PSD covariance matrix.

    Pass ``n`` for a fixed dimension, or leave it None to pick the dimension
    with the largest eigenvalue gap (bounded by ``n_max``).
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"covariance must be square, got shape {K.shape}")
    scale = max(1.0, np.abs(K).max())
    if np.abs(K - K.T).max() > 1e-8 * scale:
        raise ValueError("covariance matrix is not symmetric within tolerance")
    K = 0.5 * (K + K.T)

    w, W = _descending_eigh(K)
    floor = -1e-10 * max(1.0, abs(w[0]))
    if np.any(w < floor):
        raise ValueError(
            "covariance matrix has a significantly negative eigenvalue; "
            "it is not positive semidefinite"
        )
    w = np.maximum(w, 0.0)

    if n is None:
        n = pick_gap_dimension(w, n_max)
    if not 1 <= n <= K.shape[0]:
        raise ValueError(f"target dimension {n} out of range for d={K.shape[0]}")

    report = EigenReport(eigenvalues=w, eigenvectors=W)
    return Subspace(W[:, :n]), report


def bootstrap_eigenvalues(
    doe,
    subsample_size: int,
    replicates: int,
    seed: int,
    gamma: float = DEFAULT_GAMMA,
) -> EigenReport:
    """Subsample-without-replacement bands around the covariance eigenvalues.

    Each replicate draws ``subsample_size`` distinct rows, refits the
    quadratic, and recomputes the eigenvalues of K; the bands are per-index
    min/max over replicates while the point estimate uses all samples.
    Replicate r draws from an RNG stream keyed by (seed, r), so results are
    identical however the replicates are scheduled.
    """
    X = np.asarray(doe.inputs, dtype=float)
    N, d = X.shape
    M = coefficient_count(d, 2)
    if replicates < 1:
        raise PreconditionError("at least one replicate is required")
    if subsample_size > N:
        raise PreconditionError(
            f"subsample size {subsample_size} exceeds the {N} available samples"
        )
    if subsample_size < M:
        raise PreconditionError(
            f"subsample size {subsample_size} is below the coefficient count "
            f"{M}; the quadratic refit would be under-determined"
        )

    point = fit_quadratic(doe, allow_undersampled=True)
    w, W = _descending_eigh(gradient_covariance(point, gamma))
    w = np.maximum(w, 0.0)

    f = np.asarray(doe.outputs, dtype=float)
    lo = np.full(d, np.inf)
    hi = np.full(d, -np.inf)
    for r in range(replicates):
        rng = np.random.default_rng([seed, r])
        rows = rng.choice(N, size=subsample_size, replace=False)
        sub = _SampleView(X[rows], f[rows])
        model = fit_quadratic(sub, allow_undersampled=True)
        wr = np.linalg.eigvalsh(gradient_covariance(model, gamma))[::-1]
        wr = np.maximum(wr, 0.0)
        lo = np.minimum(lo, wr)
        hi = np.maximum(hi, wr)

    return EigenReport(
        eigenvalues=w,
        eigenvectors=W,
        bootstrap_lo=lo,
        bootstrap_hi=hi,
        replicates=replicates,
        subsample_size=subsample_size,
    )


@dataclass(frozen=True)
class _SampleView:
    inputs: np.ndarray
    outputs: np.ndarray
