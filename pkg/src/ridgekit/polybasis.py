r"""Orthonormal univariate polynomials, multi-index sets, and multivariate bases.

The univariate family is the Legendre one, rescaled to be orthonormal with
respect to the uniform weight on $[-1, 1]$:

$$
    \int_{-1}^{1} \psi_q(t)\, \psi_r(t)\, \frac{dt}{2} = \delta_{qr},
$$

so $\psi_q(t) = \sqrt{2q + 1}\, P_q(t)$ with $P_q$ the classical Legendre
polynomial. Multivariate basis terms are products of univariate ones over a
multi-index set, evaluated on coordinates projected through an
orthonormal-column matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb

import numpy as np

_KINDS = ("total", "tensor")

# Hard ceiling on index-set cardinality; tensor sets grow as (p+1)^n and a
# mistyped dimension must fail fast instead of exhausting memory.
_MAX_CARDINALITY = 2**24


@dataclass(frozen=True)
class MultiIndexSet:
    """An ordered set of n-dimensional polynomial degree tuples.

    ``kind`` is ``"total"`` (all tuples with degree sum <= p) or ``"tensor"``
    (all tuples with max degree <= p). Tuples are graded-lexicographically
    ordered, so the all-zero tuple comes first and the basis column order is
    reproducible.
    """

    dimension: int
    kind: str
    degree: int
    indices: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.indices)

    def as_array(self) -> np.ndarray:
        """Index tuples stacked into a ``(cardinality, dimension)`` array."""
        return np.asarray(self.indices, dtype=np.intp).reshape(
            len(self.indices), self.dimension
        )

    @property
    def max_degree(self) -> int:
        return self.degree


def _total_order_tuples(n: int, p: int):
    # Graded lexicographic: ascending total degree, then lexicographic.
    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    for g in range(p + 1):
        yield from compositions(g, n)


def make_index_set(kind: str, n: int, p: int) -> MultiIndexSet:
    """Build the multi-index set of the given kind, graded-lex ordered.

    Raises ``ValueError`` for an unknown kind, ``n < 1``, or ``p < 0``.
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown basis kind {kind!r}; expected one of {_KINDS}")
    if n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    if p < 0:
        raise ValueError(f"maximum degree must be non-negative, got {p}")

    if kind == "total":
        cardinality = comb(n + p, p)
        if cardinality > _MAX_CARDINALITY:
            raise ValueError(
                f"total-order set of dimension {n}, degree {p} has "
                f"{cardinality} terms; refusing to build more than "
                f"{_MAX_CARDINALITY}"
            )
        indices = tuple(_total_order_tuples(n, p))
    else:
        cardinality = (p + 1) ** n
        if cardinality > _MAX_CARDINALITY:
            raise ValueError(
                f"tensor-order set of dimension {n}, degree {p} has "
                f"{cardinality} terms; refusing to build more than "
                f"{_MAX_CARDINALITY}"
            )
        indices = tuple(
            sorted(product(range(p + 1), repeat=n), key=lambda q: (sum(q), q))
        )

    assert len(indices) == cardinality
    return MultiIndexSet(dimension=n, kind=kind, degree=p, indices=indices)


def _legendre_tables(t: np.ndarray, p: int, derivatives: bool = False):
    """Values (and optionally derivatives) of psi_0..psi_p at the points t.

    Three-term recurrence for the classical polynomials,
    $(q+1) P_{q+1} = (2q+1) t P_q - q P_{q-1}$, differentiated once for the
    derivative table, then scaled by $\\sqrt{2q+1}$.
    """
    t = np.asarray(t, dtype=float)
    vals = np.empty(t.shape + (p + 1,))
    vals[..., 0] = 1.0
    if p >= 1:
        vals[..., 1] = t
    for q in range(1, p):
        vals[..., q + 1] = (
            (2 * q + 1) * t * vals[..., q] - q * vals[..., q - 1]
        ) / (q + 1)

    scale = np.sqrt(2.0 * np.arange(p + 1) + 1.0)
    if not derivatives:
        return vals * scale

    ders = np.zeros_like(vals)
    if p >= 1:
        ders[..., 1] = 1.0
    for q in range(1, p):
        ders[..., q + 1] = (
            (2 * q + 1) * (vals[..., q] + t * ders[..., q]) - q * ders[..., q - 1]
        ) / (q + 1)
    return vals * scale, ders * scale


def eval_univariate(q: int, t: float) -> float:
    """Value of the degree-q orthonormal polynomial at t.

    The recurrence extends analytically outside [-1, 1], so t is
    unrestricted.
    """
    if q < 0:
        raise ValueError(f"degree must be non-negative, got {q}")
    table = _legendre_tables(np.asarray([t], dtype=float), q)
    return float(table[0, q])


def eval_univariate_derivative(q: int, t: float) -> float:
    """First derivative of the degree-q orthonormal polynomial at t."""
    if q < 0:
        raise ValueError(f"degree must be non-negative, got {q}")
    _, ders = _legendre_tables(np.asarray([t], dtype=float), q, derivatives=True)
    return float(ders[0, q])


def _as_columns(U) -> np.ndarray:
    """Accept a Subspace or a plain matrix of orthonormal columns."""
    return np.asarray(getattr(U, "columns", U), dtype=float)


def _check_shapes(Ucols: np.ndarray, X: np.ndarray, idx: MultiIndexSet):
    if Ucols.ndim != 2:
        raise ValueError("projection matrix must be two-dimensional")
    m, n = Ucols.shape
    if idx.dimension != n:
        raise ValueError(
            f"index set dimension {idx.dimension} does not match "
            f"subspace column count {n}"
        )
    if X.ndim != 2 or X.shape[1] != m:
        raise ValueError(
            f"sample matrix must be N x {m} to match the subspace rows, "
            f"got shape {X.shape}"
        )


def eval_basis_matrix(U, X, idx: MultiIndexSet) -> np.ndarray:
    """Basis matrix P with P[i, l] = prod_j psi_{q(l)_j}(y_i^(j)), y = U^T x.

    Rows follow the samples in X, columns follow the graded-lex order of the
    index set; the constant term is always column 0.
    """
    Ucols = _as_columns(U)
    X = np.asarray(X, dtype=float)
    _check_shapes(Ucols, X, idx)

    Y = X @ Ucols
    Q = idx.as_array()
    tables = _legendre_tables(Y, idx.max_degree)  # (N, n, p+1)
    n = idx.dimension
    # sel[i, l, j] = psi_{Q[l, j]}(Y[i, j])
    sel = tables[:, np.arange(n)[None, :], Q]
    return sel.prod(axis=2)


def eval_basis_gradient(U, X, idx: MultiIndexSet) -> np.ndarray:
    """Gradient of each basis term with respect to the projected coordinates.

    Returns G with G[i, l, k] = psi'_{q(l)_k}(y_i^(k)) * prod_{j != k}
    psi_{q(l)_j}(y_i^(j)).
    """
    Ucols = _as_columns(U)
    X = np.asarray(X, dtype=float)
    _check_shapes(Ucols, X, idx)

    Y = X @ Ucols
    Q = idx.as_array()
    vals, ders = _legendre_tables(Y, idx.max_degree, derivatives=True)
    n = idx.dimension
    j_idx = np.arange(n)[None, :]
    sel = vals[:, j_idx, Q]   # (N, L, n)
    dsel = ders[:, j_idx, Q]  # (N, L, n)

    N, L = sel.shape[0], sel.shape[1]
    grad = np.empty((N, L, n))
    for k in range(n):
        others = [j for j in range(n) if j != k]
        partial = sel[:, :, others].prod(axis=2) if others else np.ones((N, L))
        grad[:, :, k] = dsel[:, :, k] * partial
    return grad
