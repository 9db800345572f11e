r"""Classical sufficient-dimension-reduction estimators.

Four moment-based estimators of a dimension reducing subspace from
input-output pairs alone: slice means (SIR), slice variances (SAVE), the
average-Hessian proxy (pHd), and empirical-direction accumulation (contour
regression). All of them whiten the inputs first and back-map the recovered
directions to original coordinates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .doe import DesignOfExperiments
from .errors import DegenerateInputError, EmptyAccumulatorError
from .subspace import Subspace, orthonormalize

DEFAULT_SLICES = 10
CR_PAIR_CAP = 2000

_COV_RANK_TOL = 1e-12


class DegenerateSliceWarning(UserWarning):
    """A slice had fewer than two samples; its variance term was dropped."""


@dataclass(frozen=True)
class Standardization:
    """Affine whitening transform and its inverse.

    Whitened rows are ``(x - mean) @ whitener`` with the symmetric inverse
    square root of the sample covariance, so the whitened sample covariance
    is the identity. Directions found in whitened coordinates back-map
    through ``whitener.T``.
    """

    mean: np.ndarray
    whitener: np.ndarray
    inverse_whitener: np.ndarray

    def whiten(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) @ self.whitener

    def unwhiten(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) @ self.inverse_whitener + self.mean

    def back_map(self, directions: np.ndarray) -> Subspace:
        """Map whitened-space directions to original coordinates and
        re-orthonormalize."""
        return orthonormalize(self.whitener.T @ np.asarray(directions, dtype=float))


@dataclass(frozen=True)
class SliceAssignment:
    """Contiguous near-equal-count slices of the sorted outputs."""

    slice_count: int
    membership: np.ndarray  # per-sample slice id, original order
    counts: np.ndarray

    def __post_init__(self):
        if int(self.counts.sum()) != len(self.membership):
            raise ValueError("slice counts must sum to the sample count")
        if self.counts.max() - self.counts.min() > 1:
            raise ValueError("slice counts must differ by at most one")


def standardize(doe: DesignOfExperiments) -> tuple[DesignOfExperiments, Standardization]:
    """Whiten the inputs to zero mean and identity sample covariance.

    Raises ``DegenerateInputError`` when N <= d or when the sample covariance
    is singular; the exception carries the null directions.
    """
    X = doe.inputs
    N, d = X.shape
    if N <= d:
        raise DegenerateInputError(
            f"need more samples than dimensions to whiten (N={N}, d={d})"
        )
    mean = X.mean(axis=0)
    C = np.cov(X, rowvar=False, ddof=1)
    C = np.atleast_2d(C)
    w, V = np.linalg.eigh(C)
    tol = _COV_RANK_TOL * max(w.max(), 1.0)
    null = w <= tol
    if np.any(null):
        dirs = V[:, null]
        raise DegenerateInputError(
            f"sample covariance is singular along {int(null.sum())} "
            f"direction(s); inputs do not vary there",
            null_directions=dirs,
        )
    whitener = V @ np.diag(1.0 / np.sqrt(w)) @ V.T
    inverse = V @ np.diag(np.sqrt(w)) @ V.T
    std = Standardization(mean=mean, whitener=whitener, inverse_whitener=inverse)
    whitened = DesignOfExperiments(
        inputs=std.whiten(X),
        outputs=doe.outputs,
        objective_name=doe.objective_name,
        normalized=False,
        metadata=dict(doe.metadata),
    )
    return whitened, std


def slice_outputs(f: np.ndarray, S: int) -> SliceAssignment:
    """Sort samples by output and cut into S contiguous near-equal groups.

    Ties are broken by original sample index; when N is not divisible by S
    the first N mod S slices take the extra sample.
    """
    f = np.asarray(f, dtype=float)
    N = len(f)
    if not 1 <= S <= N:
        raise ValueError(f"slice count must satisfy 1 <= S <= {N}, got {S}")
    order = np.argsort(f, kind="stable")
    base, extra = divmod(N, S)
    counts = np.full(S, base, dtype=int)
    counts[:extra] += 1
    membership = np.empty(N, dtype=int)
    start = 0
    for s, cnt in enumerate(counts):
        membership[order[start : start + cnt]] = s
        start += cnt
    return SliceAssignment(slice_count=S, membership=membership, counts=counts)


def _top_eigvecs(K: np.ndarray, n: int, smallest: bool = False, by_abs: bool = False):
    w, V = np.linalg.eigh(K)  # ascending
    if by_abs:
        order = np.argsort(-np.abs(w), kind="stable")
    elif smallest:
        order = np.arange(len(w))
    else:
        order = np.arange(len(w))[::-1]
    return w[order][:n], V[:, order][:, :n]


def _check_n(n: int, d: int):
    if not 1 <= n <= d:
        raise ValueError(f"target dimension must satisfy 1 <= n <= {d}, got {n}")


def sir_matrix(Z: np.ndarray, assignment: SliceAssignment) -> np.ndarray:
    """Slice-mean covariance (1/N) sum_s N_s mu_s mu_s^T over whitened inputs."""
    N, d = Z.shape
    K = np.zeros((d, d))
    for s in range(assignment.slice_count):
        rows = Z[assignment.membership == s]
        if rows.shape[0] == 0:
            continue
        mu = rows.mean(axis=0)
        K += rows.shape[0] * np.outer(mu, mu)
    return K / N


def sir(doe: DesignOfExperiments, S: int = DEFAULT_SLICES, n: int = 1) -> Subspace:
    """Sliced inverse regression: first-moment slice statistics.

    Fails by construction on even-symmetric responses, whose slice means
    vanish.
    """
    whitened, std = standardize(doe)
    _check_n(n, doe.dimension)
    assignment = slice_outputs(whitened.outputs, S)
    K = sir_matrix(whitened.inputs, assignment)
    _, V = _top_eigvecs(K, n)
    return std.back_map(V)


def save_matrix(Z: np.ndarray, assignment: SliceAssignment) -> tuple[np.ndarray, bool]:
    """Slice-variance covariance (1/N) sum_s N_s (I - Omega_s)^2.

    Slices with fewer than two samples have no defined covariance; their term
    is dropped (Omega_s treated as I) and the flag is returned.
    """
    N, d = Z.shape
    K = np.zeros((d, d))
    I = np.eye(d)
    degenerate = False
    for s in range(assignment.slice_count):
        rows = Z[assignment.membership == s]
        if rows.shape[0] < 2:
            degenerate = True
            continue
        omega = np.cov(rows, rowvar=False, ddof=1)
        term = I - np.atleast_2d(omega)
        K += rows.shape[0] * (term @ term)
    return K / N, degenerate


def save(doe: DesignOfExperiments, S: int = DEFAULT_SLICES, n: int = 1) -> Subspace:
    """Sliced average variance estimation: second-moment slice statistics."""
    whitened, std = standardize(doe)
    _check_n(n, doe.dimension)
    assignment = slice_outputs(whitened.outputs, S)
    K, degenerate = save_matrix(whitened.inputs, assignment)
    if degenerate:
        warnings.warn(
            "slices with fewer than two samples contributed nothing",
            DegenerateSliceWarning,
            stacklevel=2,
        )
    _, V = _top_eigvecs(K, n)
    return std.back_map(V)


def phd_matrix(Z: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Average-Hessian proxy (1/N) sum_i (f_i - fbar)(z_i - zbar)(z_i - zbar)^T."""
    zc = Z - Z.mean(axis=0)
    fc = f - f.mean()
    return (zc * fc[:, None]).T @ zc / len(f)


def phd(doe: DesignOfExperiments, n: int = 1) -> Subspace:
    """Principal Hessian directions, ranked by absolute eigenvalue.

    The proxy matrix is symmetric indefinite, so magnitude ordering is used;
    curvature of either sign counts.
    """
    whitened, std = standardize(doe)
    _check_n(n, doe.dimension)
    K = phd_matrix(whitened.inputs, whitened.outputs)
    _, V = _top_eigvecs(K, n, by_abs=True)
    return std.back_map(V)


def contour_regression_matrix(Z: np.ndarray, f: np.ndarray, c: float) -> np.ndarray:
    """Empirical-direction covariance over pairs with nearly equal outputs.

    K(c) = 2/(N(N-1)) sum_{i<j} (z_j - z_i)(z_j - z_i)^T 1(|f_j - f_i| <= c).
    Accumulates row blocks to keep memory at O(N d).
    """
    N, d = Z.shape
    K = np.zeros((d, d))
    kept = 0
    for i in range(N - 1):
        diffs = Z[i + 1 :] - Z[i]
        mask = np.abs(f[i + 1 :] - f[i]) <= c
        D = diffs[mask]
        kept += D.shape[0]
        if D.shape[0]:
            K += D.T @ D
    if kept == 0:
        raise EmptyAccumulatorError(
            f"no sample pair differs by at most c={c:g} in output; "
            f"increase the tolerance"
        )
    return 2.0 * K / (N * (N - 1))


def contour_regression(
    doe: DesignOfExperiments,
    c: float,
    n: int = 1,
    pair_cap: int = CR_PAIR_CAP,
    seed: int = 0,
) -> Subspace:
    """Contour regression: directions of least output variation.

    Returns the eigenvectors of the *smallest* eigenvalues, which span the
    subspace along which the output actually varies. The O(N^2) pair loop is
    bounded by ``pair_cap``; larger designs are subsampled deterministically
    from ``seed``.
    """
    if c <= 0:
        raise ValueError(f"tolerance c must be positive, got {c}")
    _check_n(n, doe.dimension)
    if doe.n_samples < 2:
        raise EmptyAccumulatorError("need at least two samples to form pairs")
    if doe.n_samples > pair_cap:
        rng = np.random.default_rng([seed, doe.n_samples])
        rows = np.sort(rng.choice(doe.n_samples, size=pair_cap, replace=False))
        doe = DesignOfExperiments(
            inputs=doe.inputs[rows],
            outputs=doe.outputs[rows],
            objective_name=doe.objective_name,
            normalized=doe.normalized,
            metadata=dict(doe.metadata),
        )
    whitened, std = standardize(doe)
    K = contour_regression_matrix(whitened.inputs, whitened.outputs, c)
    _, V = _top_eigvecs(K, n, smallest=True)
    return std.back_map(V)
