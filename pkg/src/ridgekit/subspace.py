"""Subspace algebra: distance angles, projections, null-space completion,
and polynomial response surfaces over fixed projected coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import polybasis
from .errors import PreconditionError

ORTHONORMALITY_TOL = 1e-10


@dataclass(frozen=True)
class Subspace:
    """An m x n matrix with orthonormal columns, n <= m."""

    columns: np.ndarray

    def __post_init__(self):
        cols = np.array(self.columns, dtype=float)
        if cols.ndim == 1:
            cols = cols[:, None]
        if cols.ndim != 2 or cols.shape[1] > cols.shape[0]:
            raise ValueError(
                f"subspace basis must be m x n with n <= m, got {cols.shape}"
            )
        gram_defect = np.abs(cols.T @ cols - np.eye(cols.shape[1])).max()
        if gram_defect > ORTHONORMALITY_TOL:
            raise ValueError(
                f"columns are not orthonormal (defect {gram_defect:.3e} "
                f"> {ORTHONORMALITY_TOL:.0e})"
            )
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @property
    def ambient_dim(self) -> int:
        return self.columns.shape[0]

    @property
    def dim(self) -> int:
        return self.columns.shape[1]


def orthonormalize(M: np.ndarray) -> Subspace:
    """Subspace spanned by the columns of M, via thin QR.

    The factor's diagonal is sign-fixed to be non-negative so the result is
    deterministic.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    Q, R = np.linalg.qr(M)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Subspace(Q * signs)


def subspace_angle(U1, U2) -> float:
    """Distance angle phi = arcsin of the spectral norm of the projector gap.

    Computed from the singular values of U1 U1^T - U2 U2^T; equals the sine
    of the largest principal angle when the two subspaces have equal
    dimension. Clamped to [0, pi/2].
    """
    A = polybasis._as_columns(U1)
    B = polybasis._as_columns(U2)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[0] != B.shape[0]:
        raise ValueError(
            f"subspaces live in different ambient dimensions "
            f"({A.shape[0]} vs {B.shape[0]})"
        )
    diff = A @ A.T - B @ B.T
    smax = float(np.linalg.svd(diff, compute_uv=False)[0]) if diff.size else 0.0
    return float(np.arcsin(min(1.0, max(0.0, smax))))


def project(doe, U) -> np.ndarray:
    """Projected coordinates Y = X U for a sample matrix or a DoE."""
    X = np.asarray(getattr(doe, "inputs", doe), dtype=float)
    Ucols = polybasis._as_columns(U)
    if X.ndim != 2 or X.shape[1] != Ucols.shape[0]:
        raise ValueError(
            f"sample matrix of shape {X.shape} does not match subspace with "
            f"{Ucols.shape[0]} rows"
        )
    return X @ Ucols


def null_complement(U) -> Subspace:
    """Orthonormal basis V of the orthogonal complement, so [U V] is square
    orthogonal."""
    Ucols = polybasis._as_columns(U)
    m, n = Ucols.shape
    if n >= m:
        raise ValueError(
            f"subspace of dimension {n} in R^{m} has an empty complement"
        )
    Q = np.linalg.qr(Ucols, mode="complete")[0]
    V = Q[:, n:]
    if np.abs(Ucols.T @ V).max() > ORTHONORMALITY_TOL:
        raise AssertionError("complement construction lost orthogonality")
    return Subspace(V)


def _rescale(Y: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """Affine map of raw coordinates into [-1, 1]^n; collapsed coordinates
    (zero training span) map to 0."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    lo = bounds[:, 0]
    span = bounds[:, 1] - lo
    safe = np.where(span > 0, span, 1.0)
    T = 2.0 * (Y - lo) / safe - 1.0
    return np.where(span > 0, T, 0.0)


@dataclass(frozen=True)
class ResponseSurface:
    """Least-squares polynomial over projected coordinates.

    Coordinates are affinely rescaled to [-1, 1]^n through ``y_bounds``
    (per-coordinate training min/max) before basis evaluation, so the
    orthonormal basis stays well conditioned off the unit box.
    """

    idx: polybasis.MultiIndexSet
    alpha: np.ndarray
    r_squared: float
    y_bounds: np.ndarray  # (n, 2) columns lo, hi
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return self.idx.dimension

    def rescale(self, Y: np.ndarray) -> np.ndarray:
        """Map raw coordinates into the training box [-1, 1]^n."""
        return _rescale(Y, self.y_bounds)

    def evaluate(self, Y: np.ndarray) -> np.ndarray:
        """Surface values at rows of Y (raw, unscaled coordinates)."""
        T = self.rescale(Y)
        P = polybasis.eval_basis_matrix(np.eye(self.dim), T, self.idx)
        return P @ self.alpha

    def out_of_bounds(self, Y: np.ndarray) -> np.ndarray:
        """Per-row flag: any coordinate outside the training bounds."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        lo = self.y_bounds[:, 0]
        hi = self.y_bounds[:, 1]
        return np.any((Y < lo) | (Y > hi), axis=1)


def fit_response_surface(Y, f, p: int, kind: str = "total") -> ResponseSurface:
    """Fit a degree-p polynomial surface to outputs over projected coordinates.

    R^2 is reported against the output variance, with the zero-variance
    convention R^2 = 1. A rank-deficient design matrix falls back to the
    minimum-norm solution and sets ``degenerate``.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    f = np.asarray(f, dtype=float)
    if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(f))):
        raise ValueError("projected coordinates and outputs must be finite")
    N, n = Y.shape
    if f.shape != (N,):
        raise ValueError(f"expected {N} outputs, got shape {f.shape}")

    idx = polybasis.make_index_set(kind, n, p)
    if len(idx) > N:
        raise PreconditionError(
            f"basis has {len(idx)} terms but only {N} samples are available"
        )

    bounds = np.column_stack([Y.min(axis=0), Y.max(axis=0)])
    T = _rescale(Y, bounds)
    P = polybasis.eval_basis_matrix(np.eye(n), T, idx)
    alpha, _, rank, _ = np.linalg.lstsq(P, f, rcond=None)
    degenerate = bool(rank < len(idx))

    resid = f - P @ alpha
    total = f - f.mean()
    ss_tot = float(total @ total)
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    r2 = min(1.0, max(0.0, r2))

    return ResponseSurface(
        idx=idx,
        alpha=alpha,
        r_squared=r2,
        y_bounds=bounds,
        degenerate=degenerate,
    )


def contour_grid(surface: ResponseSurface, resolution: int):
    """Regular grid of surface values over the training bounds.

    Returns (Y1, Y2, V), each ``resolution x resolution``, row-major in the
    first coordinate. Only defined for two-dimensional surfaces.
    """
    if surface.dim != 2:
        raise ValueError(
            f"contour grids need a 2-dimensional surface, got n={surface.dim}"
        )
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    g1 = np.linspace(surface.y_bounds[0, 0], surface.y_bounds[0, 1], resolution)
    g2 = np.linspace(surface.y_bounds[1, 0], surface.y_bounds[1, 1], resolution)
    Y1, Y2 = np.meshgrid(g1, g2, indexing="ij")
    pts = np.column_stack([Y1.ravel(), Y2.ravel()])
    V = surface.evaluate(pts).reshape(resolution, resolution)
    return Y1, Y2, V
