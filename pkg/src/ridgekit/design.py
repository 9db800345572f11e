r"""Constrained design generation inside the unit box.

Given an orthonormal basis U and fixed reduced coordinates y, every design
$x = U y + V z$ (with $V$ the orthogonal complement) shares the coordinates
$U^T x = y$; the box constraint becomes $-1 \le U y + V z \le 1$, a polytope
in z explored here with a dense two-phase primal simplex solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleRegionError
from .subspace import ResponseSurface, Subspace, null_complement

# Simplex tolerances: reduced-cost optimality, pivot admissibility, and the
# phase-1 infeasibility threshold.
_COST_TOL = 1e-9
_PIVOT_TOL = 1e-10
_FEAS_TOL = 1e-9

BOX_SLACK = 1e-9
COORDINATE_TOL = 1e-8
DUPLICATE_TOL = 1e-9


@dataclass(frozen=True)
class LinearProgram:
    """minimize c^T z subject to G z <= h, with optional variable bounds."""

    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        h = np.asarray(self.h, dtype=float)
        if c.ndim != 1:
            raise ValueError("objective must be a vector")
        if G.size and G.shape[1] != c.shape[0]:
            raise ValueError(
                f"constraint matrix has {G.shape[1]} columns for "
                f"{c.shape[0]} variables"
            )
        if h.shape != (G.shape[0],):
            raise ValueError("right-hand side length must match the row count")
        for name, arr in (("c", c), ("G", G), ("h", h)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        for bound in (self.lb, self.ub):
            if bound is not None and np.asarray(bound).shape != c.shape:
                raise ValueError("bounds must match the variable count")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    z: np.ndarray | None = None
    value: float | None = None


def _pivot(T: np.ndarray, row: int, col: int, basis: list[int]):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run_simplex(T: np.ndarray, basis: list[int], ncols: int) -> str:
    """Bland's-rule iteration on a tableau whose last row holds reduced
    costs and last column the right-hand side. Returns optimal/unbounded."""
    nrows = T.shape[0] - 1
    while True:
        enter = -1
        for j in range(ncols):
            if T[-1, j] < -_COST_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best_ratio = np.inf
        for i in range(nrows):
            a = T[i, enter]
            if a > _PIVOT_TOL:
                ratio = T[i, -1] / a
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(T, leave, enter, basis)


def simplex_solve(lp: LinearProgram) -> LPResult:
    """Two-phase dense primal simplex with Bland's anti-cycling rule.

    Free variables are split into positive parts internally; bounds become
    inequality rows. Infeasibility and unboundedness are reported as result
    statuses, never raised.
    """
    k = lp.c.shape[0]
    G_rows = [lp.G] if lp.G.size else []
    h_parts = [lp.h] if lp.h.size else []
    if lp.ub is not None:
        G_rows.append(np.eye(k))
        h_parts.append(np.asarray(lp.ub, dtype=float))
    if lp.lb is not None:
        G_rows.append(-np.eye(k))
        h_parts.append(-np.asarray(lp.lb, dtype=float))
    G = np.vstack(G_rows) if G_rows else np.zeros((0, k))
    h = np.concatenate(h_parts) if h_parts else np.zeros(0)
    m = G.shape[0]

    if m == 0:
        # Unconstrained: bounded only if the objective is zero.
        if np.any(lp.c != 0):
            return LPResult(status="unbounded")
        return LPResult(status="optimal", z=np.zeros(k), value=0.0)

    # Standard form columns: [z+ (k), z- (k), slack (m), artificial (<=m)].
    A = np.hstack([G, -G, np.eye(m)])
    b = h.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    art_rows = np.flatnonzero(neg)
    n_struct = 2 * k + m
    n_art = len(art_rows)
    Afull = np.hstack([A, np.zeros((m, n_art))])
    basis: list[int] = []
    art_col = {}
    for pos, i in enumerate(art_rows):
        Afull[i, n_struct + pos] = 1.0
        art_col[i] = n_struct + pos
    for i in range(m):
        basis.append(art_col[i] if i in art_col else 2 * k + i)

    ncols = n_struct + n_art
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :ncols] = Afull
    T[:m, -1] = b

    if n_art:
        cost1 = np.zeros(ncols)
        cost1[n_struct:] = 1.0
        T[-1, :ncols] = cost1
        for i, bcol in enumerate(basis):
            if cost1[bcol]:
                T[-1] -= T[i]
        _run_simplex(T, basis, ncols)
        infeasibility = -T[-1, -1]
        if infeasibility > _FEAS_TOL * max(1.0, np.abs(h).max() if m else 1.0):
            return LPResult(status="infeasible")
        # Pivot lingering artificials out of the basis, or drop their rows.
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n_struct:
                piv = next(
                    (j for j in range(n_struct) if abs(T[i, j]) > _PIVOT_TOL),
                    -1,
                )
                if piv >= 0:
                    _pivot(T, i, piv, basis)
                else:
                    keep[i] = False
        if not keep.all():
            rows = [r for r in range(m) if keep[r]]
            T = np.vstack([T[rows], T[-1:]])
            basis = [basis[r] for r in rows]
            m = len(rows)

    # Phase 2 on the structural columns only.
    cost2 = np.concatenate([lp.c, -lp.c, np.zeros(T.shape[1] - 1 - 2 * k)])
    cost2[n_struct:] = 0.0
    T[-1, :-1] = cost2
    T[-1, -1] = 0.0
    for i, bcol in enumerate(basis):
        if cost2[bcol]:
            T[-1] -= cost2[bcol] * T[i]
    T[:, n_struct : T.shape[1] - 1] = 0.0  # retire artificial columns
    status = _run_simplex(T, basis, n_struct)
    if status == "unbounded":
        return LPResult(status="unbounded")

    w = np.zeros(T.shape[1] - 1)
    for i, bcol in enumerate(basis):
        w[bcol] = T[i, -1]
    z = w[:k] - w[k : 2 * k]
    return LPResult(status="optimal", z=z, value=float(lp.c @ z))


@dataclass(frozen=True)
class DesignBatch:
    """Designs sharing the reduced coordinates y inside the unit box."""

    y: np.ndarray
    subspace: Subspace
    designs: list[np.ndarray]
    strategies: list[str]
    slacks: list[float]
    short: bool = False

    def __post_init__(self):
        U = self.subspace.columns
        for x in self.designs:
            if np.abs(x).max() > 1.0 + BOX_SLACK:
                raise AssertionError("generated design escapes the unit box")
            if np.abs(U.T @ x - self.y).max() > COORDINATE_TOL:
                raise AssertionError(
                    "generated design drifts from the fixed reduced coordinates"
                )

    def __len__(self) -> int:
        return len(self.designs)


def _box_slack(x: np.ndarray) -> float:
    return float(1.0 - np.abs(x).max())


def _slice_rows(V: np.ndarray, base: np.ndarray):
    """Constraint rows of -1 <= base + V z <= 1 in the form G z <= h."""
    G = np.vstack([V, -V])
    h = np.concatenate([1.0 - base, 1.0 + base])
    return G, h


def _max_slack(U: Subspace, y: np.ndarray):
    """Chebyshev slack of the feasible slice: maximize s with
    base + V z within [-1 + s, 1 - s]. Returns (slack, z, V, base)."""
    Ucols = U.columns
    d, n = Ucols.shape
    base = Ucols @ y
    if n == d:
        return 1.0 - np.abs(base).max(), np.zeros(0), np.zeros((d, 0)), base
    V = null_complement(U).columns
    nz = V.shape[1]
    G, h = _slice_rows(V, base)
    Gs = np.hstack([G, np.ones((G.shape[0], 1))])
    lp = LinearProgram(c=np.concatenate([np.zeros(nz), [-1.0]]), G=Gs, h=h)
    res = simplex_solve(lp)
    if res.status != "optimal":  # the slack variable makes this LP solvable
        raise AssertionError(f"slack program came back {res.status}")
    return float(res.z[-1]), res.z[:nz], V, base


def feasible_box(U: Subspace, y) -> tuple[bool, np.ndarray | None]:
    """Whether any design in the unit box has reduced coordinates y; returns
    a witness design when one exists."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("reduced coordinates must be finite")
    slack, z, V, base = _max_slack(U, y)
    if slack < -_FEAS_TOL:
        return False, None
    return True, base + (V @ z if V.size else 0.0)


def chebyshev_center(U: Subspace, y) -> tuple[np.ndarray, float]:
    """Most interior design with the given reduced coordinates.

    Maximizes the uniform distance to the box faces; among designs attaining
    that slack, the null-space coordinates of least l1 norm are selected (a
    second LP), which pins the answer deterministically.
    Raises ``InfeasibleRegionError`` with the negative optimal slack as
    certificate when no design exists.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("reduced coordinates must be finite")
    slack, z1, V, base = _max_slack(U, y)
    if slack < -_FEAS_TOL:
        raise InfeasibleRegionError(
            f"no design in the unit box attains the requested coordinates "
            f"(best slack {slack:.3e})",
            certificate={"max_slack": slack},
        )
    nz = V.shape[1]
    if nz == 0:
        return base.copy(), slack

    s_target = max(slack, 0.0)
    G, h = _slice_rows(V, base)
    h = h - s_target
    # Variables [z, t]: minimize sum t with -t <= z <= t inside the shrunk box.
    eye = np.eye(nz)
    Gfull = np.vstack(
        [
            np.hstack([G, np.zeros((G.shape[0], nz))]),
            np.hstack([eye, -eye]),
            np.hstack([-eye, -eye]),
        ]
    )
    hfull = np.concatenate([h, np.zeros(2 * nz)])
    lp = LinearProgram(
        c=np.concatenate([np.zeros(nz), np.ones(nz)]), G=Gfull, h=hfull
    )
    res = simplex_solve(lp)
    z = res.z[:nz] if res.status == "optimal" else z1
    x = base + V @ z
    return x, _box_slack(x)


def generate_designs(U: Subspace, y, count: int, seed: int = 0) -> DesignBatch:
    """One Chebyshev center plus random-objective vertices of the feasible
    slice, deduplicated.

    Vertex k is the minimizer of a random unit objective drawn from the
    stream (seed, attempt); duplicates within 1e-9 are regenerated for up to
    10x count attempts, after which the batch is returned short and flagged.
    With an empty null space there is exactly one design, also flagged.
    """
    if count < 1:
        raise ValueError(f"design count must be positive, got {count}")
    y = np.asarray(y, dtype=float)
    center, slack = chebyshev_center(U, y)

    designs = [center]
    strategies = ["chebyshev-center"]
    slacks = [slack]

    Ucols = U.columns
    d, n = Ucols.shape
    if n == d:
        return DesignBatch(
            y=y,
            subspace=U,
            designs=designs,
            strategies=strategies,
            slacks=slacks,
            short=count > 1,
        )

    V = null_complement(U).columns
    nz = V.shape[1]
    base = Ucols @ y
    G, h = _slice_rows(V, base)
    attempt = 0
    while len(designs) < count and attempt < 10 * count:
        rng = np.random.default_rng([seed, attempt])
        attempt += 1
        c = rng.standard_normal(nz)
        norm = np.linalg.norm(c)
        if norm == 0.0:
            continue
        res = simplex_solve(LinearProgram(c=c / norm, G=G, h=h))
        if res.status != "optimal":
            continue
        x = base + V @ res.z
        if any(np.abs(x - prev).max() <= DUPLICATE_TOL for prev in designs):
            continue
        designs.append(x)
        strategies.append("random-vertex")
        slacks.append(_box_slack(x))

    return DesignBatch(
        y=y,
        subspace=U,
        designs=designs,
        strategies=strategies,
        slacks=slacks,
        short=len(designs) < count,
    )


@dataclass(frozen=True)
class CrossProjection:
    """A design's coordinates and predicted value on another operating
    point's subspace."""

    y: np.ndarray
    value: float
    extrapolated: bool


def crossproject(
    batch: DesignBatch,
    other_surface: ResponseSurface,
    other_U: Subspace,
) -> list[CrossProjection]:
    """Project every design onto a second subspace and evaluate that
    point's response surface, flagging out-of-bounds projections."""
    if other_U.ambient_dim != batch.subspace.ambient_dim:
        raise ValueError("subspaces live in different ambient dimensions")
    if other_surface.dim != other_U.dim:
        raise ValueError("surface dimension does not match the subspace")
    out = []
    for x in batch.designs:
        yp = other_U.columns.T @ x
        value = float(other_surface.evaluate(yp)[0])
        flag = bool(other_surface.out_of_bounds(yp)[0])
        out.append(CrossProjection(y=yp, value=value, extrapolated=flag))
    return out
