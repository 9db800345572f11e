import numpy as np
import pytest

from ridgekit import polybasis, varpro
from ridgekit.doe import DesignOfExperiments, synth_exp_ridge
from ridgekit.errors import PreconditionError
from ridgekit.subspace import orthonormalize, subspace_angle

from oracles import central_difference


def _random_instance(seed, N=40, m=5, n=2, p=2):
    rng = np.random.default_rng(seed)
    U = orthonormalize(rng.standard_normal((m, n))).columns
    X = rng.uniform(-1, 1, (N, m))
    f = rng.standard_normal(N)
    idx = polybasis.make_index_set("total", n, p)
    doe = DesignOfExperiments(inputs=X, outputs=f)
    return U, doe, idx


class TestResidual:
    def test_annihilates_range(self):
        U, doe, idx = _random_instance(0)
        P = polybasis.eval_basis_matrix(U, doe.inputs, idx)
        rng = np.random.default_rng(1)
        f = P @ rng.standard_normal(P.shape[1])
        inrange = DesignOfExperiments(inputs=doe.inputs, outputs=f)
        r = varpro.residual(U, inrange, idx)
        assert np.abs(r).max() < 1e-10

    def test_orthogonal_outputs_untouched(self):
        U, doe, idx = _random_instance(2)
        P = polybasis.eval_basis_matrix(U, doe.inputs, idx)
        rng = np.random.default_rng(3)
        f = rng.standard_normal(P.shape[0])
        f -= P @ np.linalg.lstsq(P, f, rcond=None)[0]  # strip the range part
        ortho = DesignOfExperiments(inputs=doe.inputs, outputs=f)
        r = varpro.residual(U, ortho, idx)
        assert np.abs(r - f).max() < 1e-10

    def test_matches_least_squares_oracle(self):
        # oracle: coarse random coefficient scan plus a normal-equation solve
        U, doe, idx = _random_instance(4)
        r = varpro.residual(U, doe, idx)
        P = polybasis.eval_basis_matrix(U, doe.inputs, idx)
        f = doe.outputs

        alpha_star = np.linalg.solve(P.T @ P, P.T @ f)
        best = float(np.sum((f - P @ alpha_star) ** 2))
        rng = np.random.default_rng(5)
        for _ in range(200):
            trial = alpha_star + rng.uniform(-1, 1, P.shape[1])
            best = min(best, float(np.sum((f - P @ trial) ** 2)))
        assert float(r @ r) == pytest.approx(best, rel=1e-10)


class TestJacobian:
    def test_constant_basis_gives_zero(self):
        U, doe, _ = _random_instance(6)
        idx = polybasis.make_index_set("total", U.shape[1], 0)
        J = varpro.jacobian(U, doe, idx)
        assert np.all(J == 0.0)

    def test_zero_outputs_give_zero(self):
        U, doe, idx = _random_instance(7)
        zero = DesignOfExperiments(inputs=doe.inputs, outputs=np.zeros(doe.n_samples))
        J = varpro.jacobian(U, zero, idx)
        assert np.abs(J).max() < 1e-12

    def test_matches_finite_differences_across_20_instances(self):
        worst = 0.0
        for seed in range(20):
            U, doe, idx = _random_instance(100 + seed)
            J = varpro.jacobian(U, doe, idx)

            def resid_of(Umat):
                return varpro.residual(Umat, doe, idx)

            fd = central_difference(resid_of, U, 1e-6)
            scale = max(np.abs(fd).max(), 1e-30)
            worst = max(worst, np.abs(J - fd).max() / scale)
        assert worst < 1e-5

    def test_flattening_convention(self):
        U, doe, idx = _random_instance(8, m=4, n=2)
        J = varpro.jacobian(U, doe, idx)
        flat = varpro.flatten_jacobian(J)
        m, n = U.shape
        for k in range(n):
            for j in range(m):
                assert np.array_equal(flat[:, k * m + j], J[:, j, k])


class TestVarproFit:
    def test_exact_cubic_ridge_recovery(self):
        rng = np.random.default_rng(9)
        d = 10
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        X = rng.uniform(-1, 1, (300, d))
        t = X @ u
        doe = DesignOfExperiments(inputs=X, outputs=t**3 + t, normalized=True)
        model = varpro.varpro_fit(doe, n=1, p=3,
                                  options=varpro.VarproOptions(seed=11))
        assert model.residual_norm < 1e-8
        assert subspace_angle(model.U, u[:, None]) < 1e-6
        assert model.r_squared > 1.0 - 1e-12

    def test_exponential_ridge_direction(self):
        doe = synth_exp_ridge(500, seed=13)
        model = varpro.varpro_fit(doe, n=1, p=5,
                                  options=varpro.VarproOptions(seed=17))
        w = np.full((4, 1), 0.5)
        assert subspace_angle(model.U, w) < 0.05

    def test_degree_zero_returns_centered_norm(self):
        rng = np.random.default_rng(19)
        X = rng.uniform(-1, 1, (50, 3))
        f = rng.standard_normal(50)
        doe = DesignOfExperiments(inputs=X, outputs=f)
        model = varpro.varpro_fit(doe, n=1, p=0)
        assert model.iterations == 0
        assert model.converged
        assert model.residual_norm == pytest.approx(
            np.linalg.norm(f - f.mean()), rel=1e-12
        )

    def test_too_many_terms_rejected(self):
        rng = np.random.default_rng(21)
        X = rng.uniform(-1, 1, (5, 4))
        doe = DesignOfExperiments(inputs=X, outputs=np.ones(5))
        with pytest.raises(PreconditionError):
            varpro.varpro_fit(doe, n=2, p=3)

    def test_right_rotation_invariance(self):
        # total-order bases span all polynomials up to the degree, so the
        # objective depends only on range(U)
        U, doe, idx = _random_instance(23, N=60, m=6, n=2, p=3)
        rng = np.random.default_rng(24)
        Q = np.linalg.qr(rng.standard_normal((2, 2)))[0]
        r1 = varpro.residual(U, doe, idx)
        r2 = varpro.residual(U @ Q, doe, idx)
        assert abs(np.linalg.norm(r1) - np.linalg.norm(r2)) < 1e-10

    def test_exact_polynomial_over_known_subspace(self):
        rng = np.random.default_rng(25)
        m, n, p = 8, 2, 2
        idx = polybasis.make_index_set("total", n, p)
        U = orthonormalize(rng.standard_normal((m, n)))
        X = rng.uniform(-1, 1, (2 * len(idx) + 20, m))
        f = polybasis.eval_basis_matrix(U, X, idx) @ rng.standard_normal(len(idx))
        doe = DesignOfExperiments(inputs=X, outputs=f)
        model = varpro.varpro_fit(doe, n=n, p=p,
                                  options=varpro.VarproOptions(seed=27))
        assert model.residual_norm < 1e-8

    def test_deterministic_under_seed(self):
        doe = synth_exp_ridge(120, seed=29)
        opts = varpro.VarproOptions(seed=31, restarts=2, max_iterations=25)
        m1 = varpro.varpro_fit(doe, n=1, p=3, options=opts)
        m2 = varpro.varpro_fit(doe, n=1, p=3, options=opts)
        assert np.array_equal(m1.U.columns, m2.U.columns)
        assert np.array_equal(m1.alpha, m2.alpha)
        assert m1.residual_norm == m2.residual_norm

    def test_returned_subspace_orthonormal(self):
        doe = synth_exp_ridge(200, seed=33)
        model = varpro.varpro_fit(doe, n=2, p=2,
                                  options=varpro.VarproOptions(seed=35, restarts=2))
        defect = np.abs(model.U.columns.T @ model.U.columns - np.eye(2)).max()
        assert defect <= 1e-10

    def test_monotone_residual_decrease_under_line_search(self):
        # instrument the solver by sweeping iteration caps: with a fresh
        # line-searched run the best residual cannot grow with more steps
        doe = synth_exp_ridge(150, seed=37)
        prev = np.inf
        for cap in (1, 2, 4, 8, 16):
            opts = varpro.VarproOptions(seed=39, restarts=1, max_iterations=cap)
            model = varpro.varpro_fit(doe, n=1, p=3, options=opts)
            assert model.residual_norm <= prev + 1e-12
            prev = model.residual_norm

    def test_invalid_options(self):
        with pytest.raises(ValueError):
            varpro.VarproOptions(restarts=0)
        with pytest.raises(ValueError):
            varpro.VarproOptions(gradient_tolerance=-1.0)
        with pytest.raises(ValueError):
            varpro.VarproOptions(damping="other")
