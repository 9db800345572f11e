r"""Polynomial variable projection.

Eliminates the linear coefficients from the separable ridge-fitting problem

$$
    \min_{\alpha,\, U} \; \lVert f - P(U^T x)\, \alpha \rVert_2^2
$$

and minimizes the projected residual $r(U) = (I - P P^\dagger) f$ over
matrices with orthonormal columns by Gauss-Newton: linearize through the
analytic Jacobian, project the step onto the tangent space, line-search, and
retract by thin orthogonal factorization. The Jacobian needs only a
symmetric generalized inverse of $P$ ($P P^- P = P$, $(P P^-)^T = P P^-$),
realized here through a pivoted rank-revealing QR factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr as _pivoted_qr
from scipy.linalg import solve_triangular

from . import polybasis
from .errors import NumericalFailureError, PreconditionError
from .subspace import Subspace

_RANK_TOL = 1e-12
_MIN_STEP = 1e-14
_ARMIJO = 1e-4


@dataclass(frozen=True)
class VarproOptions:
    max_iterations: int = 100
    gradient_tolerance: float = 1e-8
    residual_stall_tolerance: float = 1e-12
    restarts: int = 5
    seed: int = 0
    damping: str = "line-search"  # or "fixed-step"

    def __post_init__(self):
        if self.max_iterations < 1 or self.restarts < 1:
            raise ValueError("iteration and restart counts must be positive")
        if self.gradient_tolerance <= 0 or self.residual_stall_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.damping not in ("line-search", "fixed-step"):
            raise ValueError(f"unknown damping mode {self.damping!r}")


@dataclass(frozen=True)
class RidgeModel:
    """Fitted ridge surrogate g(U^T x) with its diagnostics."""

    U: Subspace
    idx: polybasis.MultiIndexSet
    alpha: np.ndarray
    residual_norm: float
    r_squared: float
    iterations: int
    converged: bool

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        P = polybasis.eval_basis_matrix(self.U, X, self.idx)
        return P @ self.alpha


@dataclass(frozen=True)
class _Projection:
    """Pivoted-QR view of P: orthogonal projector, basic least-squares
    solution, and the symmetric generalized inverse actions."""

    Q1: np.ndarray
    R11: np.ndarray
    piv: np.ndarray
    rank: int
    n_terms: int
    alpha: np.ndarray
    resid: np.ndarray

    def apply_pinv_t(self, v: np.ndarray) -> np.ndarray:
        """x = (P^-)^T v for a coefficient-space vector v."""
        if self.rank == 0:
            return np.zeros(self.Q1.shape[0])
        w = solve_triangular(self.R11, v[self.piv[: self.rank]], trans="T")
        return self.Q1 @ w

    def project_out(self, V: np.ndarray) -> np.ndarray:
        """(I - P P^dagger) V."""
        if self.rank == 0:
            return V
        return V - self.Q1 @ (self.Q1.T @ V)


def _factor(P: np.ndarray, f: np.ndarray) -> _Projection:
    N, L = P.shape
    Q, R, piv = _pivoted_qr(P, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    scale = diag[0] if diag.size and diag[0] > 0 else 0.0
    rank = int(np.sum(diag > _RANK_TOL * scale)) if scale > 0 else 0
    Q1 = Q[:, :rank]
    R11 = R[:rank, :rank]
    alpha = np.zeros(L)
    if rank:
        alpha[piv[:rank]] = solve_triangular(R11, Q1.T @ f)
    resid = f - Q1 @ (Q1.T @ f) if rank else f.copy()
    return _Projection(
        Q1=Q1, R11=R11, piv=piv, rank=rank, n_terms=L, alpha=alpha, resid=resid
    )


def residual(U, doe, idx: polybasis.MultiIndexSet) -> np.ndarray:
    """Projected residual r = (I - P P^dagger) f at the given subspace."""
    X = np.asarray(doe.inputs, dtype=float)
    f = np.asarray(doe.outputs, dtype=float)
    P = polybasis.eval_basis_matrix(U, X, idx)
    return _factor(P, f).resid


def coefficients(U, doe, idx: polybasis.MultiIndexSet) -> np.ndarray:
    """Least-squares basis coefficients at the given subspace."""
    X = np.asarray(doe.inputs, dtype=float)
    f = np.asarray(doe.outputs, dtype=float)
    P = polybasis.eval_basis_matrix(U, X, idx)
    return _factor(P, f).alpha


def _jacobian_parts(proj: _Projection, X: np.ndarray, G: np.ndarray) -> np.ndarray:
    """J[:, j, k] = -(I-PP^+) dP/dU_jk P^- f - ((I-PP^+) dP/dU_jk P^-)^T f,
    with dP/dU_jk(i, l) = G[i, l, k] * X[i, j]."""
    N, L, n = G.shape
    m = X.shape[1]
    r = proj.resid
    J = np.empty((N, m, n))
    g_alpha = np.einsum("ilk,l->ik", G, proj.alpha)
    Xr = X * r[:, None]
    for k in range(n):
        T1 = proj.project_out(X * g_alpha[:, k : k + 1])
        S = G[:, :, k].T @ Xr  # (L, m)
        if proj.rank:
            W = solve_triangular(proj.R11, S[proj.piv[: proj.rank], :], trans="T")
            T2 = proj.Q1 @ W
        else:
            T2 = np.zeros((N, m))
        J[:, :, k] = -T1 - T2
    return J


def jacobian(U, doe, idx: polybasis.MultiIndexSet) -> np.ndarray:
    """Derivative tensor of the projected residual with respect to the
    entries of U, shape (N, m, n)."""
    X = np.asarray(doe.inputs, dtype=float)
    f = np.asarray(doe.outputs, dtype=float)
    P = polybasis.eval_basis_matrix(U, X, idx)
    G = polybasis.eval_basis_gradient(U, X, idx)
    return _jacobian_parts(_factor(P, f), X, G)


def flatten_jacobian(J: np.ndarray) -> np.ndarray:
    """Flatten (N, m, n) to (N, m*n) column-major over (j, k): the column
    for entry U[j, k] is k*m + j."""
    N, m, n = J.shape
    return J.transpose(0, 2, 1).reshape(N, m * n)


def _unflatten(vec: np.ndarray, m: int, n: int) -> np.ndarray:
    return vec.reshape(n, m).T


def _retract(M: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(M)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def _gauss_newton(X, f, idx, U0, options: VarproOptions):
    """One optimization run from a fixed starting subspace. Returns
    (U, alpha, rnorm2, iterations, converged) or None if it diverged."""
    m, n = U0.shape
    U = U0

    def evaluate(Umat):
        P = polybasis.eval_basis_matrix(Umat, X, idx)
        return _factor(P, f)

    proj = evaluate(U)
    rnorm2 = float(proj.resid @ proj.resid)
    if not np.isfinite(rnorm2):
        return None

    iterations = 0
    converged = False
    for it in range(1, options.max_iterations + 1):
        G = polybasis.eval_basis_gradient(U, X, idx)
        J = _jacobian_parts(proj, X, G)
        Jmat = flatten_jacobian(J)

        grad = _unflatten(Jmat.T @ proj.resid, m, n)
        grad_t = grad - U @ (U.T @ grad)
        if np.linalg.norm(grad_t) <= options.gradient_tolerance:
            converged = True
            break

        step, *_ = np.linalg.lstsq(Jmat, -proj.resid, rcond=None)
        delta = _unflatten(step, m, n)
        delta_t = delta - U @ (U.T @ delta)
        slope = 2.0 * float(np.sum(grad * delta_t))
        if not np.isfinite(slope) or slope >= 0:
            break  # no usable descent direction

        if options.damping == "fixed-step":
            U_new = _retract(U + delta_t)
            proj_new = evaluate(U_new)
            new2 = float(proj_new.resid @ proj_new.resid)
            if not np.isfinite(new2):
                return None
        else:
            t = 1.0
            proj_new = None
            while t >= _MIN_STEP:
                cand = _retract(U + t * delta_t)
                cand_proj = evaluate(cand)
                cand2 = float(cand_proj.resid @ cand_proj.resid)
                if np.isfinite(cand2) and cand2 <= rnorm2 + _ARMIJO * t * slope:
                    U_new, proj_new, new2 = cand, cand_proj, cand2
                    break
                t *= 0.5
            if proj_new is None:
                break  # line search stalled at the current point

        iterations = it
        decrease = rnorm2 - new2
        U, proj, rnorm2 = U_new, proj_new, new2
        if decrease <= options.residual_stall_tolerance * max(rnorm2, 1e-300):
            converged = True
            break

    return U, proj.alpha, rnorm2, iterations, converged


def varpro_fit(
    doe,
    n: int,
    p: int,
    kind: str = "total",
    options: VarproOptions | None = None,
) -> RidgeModel:
    """Fit a ridge polynomial by variable projection with seeded restarts.

    Runs ``options.restarts`` independent Gauss-Newton descents from random
    orthonormal starts (stream keyed by (seed, restart)) and keeps the lowest
    residual, ties resolved by restart index. Raises ``PreconditionError``
    when the basis has more terms than samples and ``NumericalFailureError``
    when every restart diverges.
    """
    options = options or VarproOptions()
    X = np.asarray(doe.inputs, dtype=float)
    f = np.asarray(doe.outputs, dtype=float)
    N, m = X.shape
    if not 1 <= n < m:
        raise ValueError(f"reduced dimension must satisfy 1 <= n < {m}, got {n}")
    idx = polybasis.make_index_set(kind, n, p)
    if len(idx) > N:
        raise PreconditionError(
            f"basis has {len(idx)} terms but only {N} samples are available"
        )

    best = None
    for restart in range(options.restarts):
        rng = np.random.default_rng([options.seed, restart])
        U0 = _retract(rng.standard_normal((m, n)))
        result = _gauss_newton(X, f, idx, U0, options)
        if result is None:
            continue
        if best is None or result[2] < best[2]:
            best = result
    if best is None:
        raise NumericalFailureError(
            "every restart produced a non-finite residual"
        )

    U, alpha, rnorm2, iterations, converged = best
    centered = f - f.mean()
    ss_tot = float(centered @ centered)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - rnorm2 / ss_tot
    return RidgeModel(
        U=Subspace(U),
        idx=idx,
        alpha=alpha,
        residual_norm=float(np.sqrt(max(rnorm2, 0.0))),
        r_squared=min(1.0, max(0.0, r2)),
        iterations=iterations,
        converged=converged,
    )
