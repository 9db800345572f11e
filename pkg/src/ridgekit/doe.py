"""Design-of-experiments container and synthetic test-function generators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import polybasis
from .quadsurf import QuadraticModel
from .subspace import Subspace, orthonormalize

NORMALIZED_SLACK = 1e-9

# The 4-D exponential ridge varies only along this direction; the second
# vector is a deliberately poor comparison axis for summary plots.
EXP_RIDGE_DIRECTION = np.array([1.0, 1.0, 1.0, 1.0])
EXP_RIDGE_BAD_DIRECTION = np.array([0.4, -0.3, 0.5, 0.4])


@dataclass(frozen=True)
class DesignOfExperiments:
    """N x d input matrix plus N output values.

    When ``normalized`` is set the inputs are asserted to lie in the unit box
    [-1, 1]^d (with 1e-9 slack).
    """

    inputs: np.ndarray
    outputs: np.ndarray
    objective_name: str = "f"
    normalized: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.inputs, dtype=float)
        f = np.array(self.outputs, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"inputs must be an N x d matrix, got shape {X.shape}")
        if f.ndim != 1 or f.shape[0] != X.shape[0]:
            raise ValueError(
                f"outputs must be a vector of length {X.shape[0]}, got shape {f.shape}"
            )
        if not np.all(np.isfinite(X)):
            raise ValueError("inputs contain non-finite entries")
        if not np.all(np.isfinite(f)):
            raise ValueError("outputs contain non-finite entries")
        if self.normalized and X.size:
            worst = np.abs(X).max()
            if worst > 1.0 + NORMALIZED_SLACK:
                col = int(np.abs(X).max(axis=0).argmax())
                raise ValueError(
                    f"normalized inputs must lie in [-1, 1]; column x{col + 1} "
                    f"reaches magnitude {worst:.6g}"
                )
        X.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "outputs", f)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def dimension(self) -> int:
        return self.inputs.shape[1]


def synth_exp_ridge(N: int, seed: int = 0) -> DesignOfExperiments:
    """Uniform samples on [-1, 1]^4 with outputs exp(x1 + x2 + x3 + x4).

    The true ridge direction is recorded in the metadata.
    """
    if N < 1:
        raise ValueError(f"sample count must be positive, got {N}")
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(N, 4))
    f = np.exp(X.sum(axis=1))
    return DesignOfExperiments(
        inputs=X,
        outputs=f,
        objective_name="exp_ridge",
        normalized=True,
        metadata={
            "true_direction": EXP_RIDGE_DIRECTION.tolist(),
            "bad_direction": EXP_RIDGE_BAD_DIRECTION.tolist(),
        },
    )


def synth_quadratic(
    d: int,
    N: int,
    seed: int = 0,
    spectrum=None,
    linear_scale: float = 1.0,
) -> tuple[DesignOfExperiments, QuadraticModel]:
    """Exact samples of a random quadratic with a prescribed Hessian spectrum.

    Returns the design together with the generating model so fits can be
    checked against ground truth. ``spectrum`` defaults to a geometric decay.
    """
    if d < 1 or N < 1:
        raise ValueError("dimension and sample count must be positive")
    rng = np.random.default_rng(seed)
    if spectrum is None:
        spectrum = 2.0 ** (-np.arange(d, dtype=float))
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.shape != (d,):
        raise ValueError(f"spectrum must have {d} entries, got {spectrum.shape}")

    Q = np.linalg.qr(rng.standard_normal((d, d)))[0]
    A = Q @ np.diag(spectrum) @ Q.T
    A = 0.5 * (A + A.T)
    c = linear_scale * rng.standard_normal(d)
    e = float(rng.standard_normal())
    model = QuadraticModel(A=A, c=c, e=e)

    X = rng.uniform(-1.0, 1.0, size=(N, d))
    f = model.evaluate(X)
    doe = DesignOfExperiments(
        inputs=X,
        outputs=f,
        objective_name="synthetic_quadratic",
        normalized=True,
        metadata={"generator_seed": seed},
    )
    return doe, model


def synth_poly_ridge(
    d: int,
    n: int,
    degree: int,
    N: int,
    seed: int = 0,
    kind: str = "total",
) -> tuple[DesignOfExperiments, Subspace, np.ndarray]:
    """Exact polynomial ridge: random subspace U and coefficients alpha,
    outputs from the degree-``degree`` basis over U^T x."""
    if not 1 <= n < d:
        raise ValueError(f"need 1 <= n < d, got n={n}, d={d}")
    if N < 1:
        raise ValueError(f"sample count must be positive, got {N}")
    rng = np.random.default_rng(seed)
    U = orthonormalize(rng.standard_normal((d, n)))
    idx = polybasis.make_index_set(kind, n, degree)
    alpha = rng.standard_normal(len(idx))
    X = rng.uniform(-1.0, 1.0, size=(N, d))
    f = polybasis.eval_basis_matrix(U, X, idx) @ alpha
    doe = DesignOfExperiments(
        inputs=X,
        outputs=f,
        objective_name="synthetic_ridge",
        normalized=True,
        metadata={"generator_seed": seed, "ridge_dimension": n},
    )
    return doe, U, alpha
