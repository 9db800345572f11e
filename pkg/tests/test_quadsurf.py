import numpy as np
import pytest

from ridgekit import quadsurf
from ridgekit.doe import DesignOfExperiments, synth_quadratic
from ridgekit.errors import PreconditionError
from ridgekit.subspace import subspace_angle

from oracles import mc_gradient_covariance


class TestCoefficientCount:
    @pytest.mark.parametrize("d,k,expected", [(25, 2, 351), (50, 2, 1326),
                                              (100, 2, 5151)])
    def test_quadratic_scaling(self, d, k, expected):
        assert quadsurf.coefficient_count(d, k) == expected

    def test_invalid(self):
        with pytest.raises(ValueError):
            quadsurf.coefficient_count(0, 2)
        with pytest.raises(ValueError):
            quadsurf.coefficient_count(3, -1)


class TestFitQuadratic:
    def test_exact_recovery_at_double_oversampling(self):
        d = 8
        M = quadsurf.coefficient_count(d, 2)
        doe, truth = synth_quadratic(d, 2 * M, seed=5)
        model = quadsurf.fit_quadratic(doe)
        assert np.abs(model.A - truth.A).max() < 1e-8
        assert np.abs(model.c - truth.c).max() < 1e-8
        assert abs(model.e - truth.e) < 1e-8
        assert not model.degenerate

    def test_constant_outputs(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(-1, 1, (60, 3))
        doe = DesignOfExperiments(inputs=X, outputs=np.full(60, 2.5))
        model = quadsurf.fit_quadratic(doe)
        assert np.abs(model.A).max() < 1e-10
        assert np.abs(model.c).max() < 1e-10
        assert model.e == pytest.approx(2.5, abs=1e-10)

    def test_paper_scale_sample_budget_passes_floor(self):
        # 548 samples against 1.5 * 351 = 526.5 coefficients in 25-D
        doe, _ = synth_quadratic(25, 548, seed=1)
        model = quadsurf.fit_quadratic(doe)
        assert model.dimension == 25

    def test_undersampled_needs_override(self):
        # 6-D quadratic has 28 coefficients; 20 rows are under-determined
        doe, _ = synth_quadratic(6, 20, seed=2)
        with pytest.raises(PreconditionError):
            quadsurf.fit_quadratic(doe)
        model = quadsurf.fit_quadratic(doe, allow_undersampled=True)
        assert model.degenerate

    def test_rank_deficient_design_flagged(self):
        # all samples on a line: quadratic coefficients unidentifiable
        rng = np.random.default_rng(3)
        t = rng.uniform(-1, 1, 40)
        X = np.column_stack([t, t])
        doe = DesignOfExperiments(inputs=X, outputs=t**2)
        model = quadsurf.fit_quadratic(doe, allow_undersampled=True)
        assert model.degenerate


class TestGradientCovariance:
    def test_identity_hessian(self):
        model = quadsurf.QuadraticModel(A=np.eye(3), c=np.zeros(3), e=0.0)
        K = quadsurf.gradient_covariance(model, gamma=1.0 / 3.0)
        assert K == pytest.approx(np.eye(3) / 3.0, abs=1e-14)

    def test_pure_linear_rank_one(self):
        c = np.array([2.0, -1.0, 0.5])
        model = quadsurf.QuadraticModel(A=np.zeros((3, 3)), c=c, e=1.0)
        K = quadsurf.gradient_covariance(model)
        assert K == pytest.approx(np.outer(c, c), abs=1e-14)
        assert np.linalg.matrix_rank(K) == 1

    def test_monte_carlo_oracle_agreement(self):
        rng = np.random.default_rng(7)
        d = 5
        B = rng.standard_normal((d, d))
        A = 0.5 * (B + B.T)
        c = rng.standard_normal(d)
        model = quadsurf.QuadraticModel(A=A, c=c, e=0.0)
        K = quadsurf.gradient_covariance(model, gamma=1.0 / 3.0)
        K_mc = mc_gradient_covariance(A, c, 1_000_000, seed=11)
        rel = np.linalg.norm(K - K_mc) / np.linalg.norm(K_mc)
        assert rel < 0.02

    def test_gamma_must_be_positive(self):
        model = quadsurf.QuadraticModel(A=np.eye(2), c=np.zeros(2), e=0.0)
        with pytest.raises(ValueError):
            quadsurf.gradient_covariance(model, gamma=0.0)

    def test_psd_for_fitted_models(self):
        doe, _ = synth_quadratic(6, 120, seed=9)
        model = quadsurf.fit_quadratic(doe)
        for gamma in (quadsurf.DEFAULT_GAMMA, quadsurf.COMPAT_GAMMA):
            K = quadsurf.gradient_covariance(model, gamma)
            assert np.abs(K - K.T).max() < 1e-10
            assert np.linalg.eigvalsh(K).min() > -1e-10


class TestActiveSubspace:
    def test_dominant_axis(self):
        U, _ = quadsurf.active_subspace(np.diag([4.0, 1.0, 0.01]), n=1)
        assert subspace_angle(U, np.eye(3)[:, :1]) < 1e-12

    def test_rank_one_spectrum(self):
        c = np.array([1.0, 2.0, -2.0])
        U, report = quadsurf.active_subspace(np.outer(c, c), n=1)
        direction = U.columns[:, 0]
        assert abs(abs(direction @ (c / np.linalg.norm(c))) - 1.0) < 1e-12
        assert report.eigenvalues[0] == pytest.approx(c @ c, rel=1e-12)
        assert np.abs(report.eigenvalues[1:]).max() < 1e-12

    def test_gap_rule_examples(self):
        # ratio enumeration: 10/9, 9/0.1 = 90, 0.1/0.09 = 1.11... -> n = 2
        _, report = quadsurf.active_subspace(np.diag([10.0, 9.0, 0.1, 0.09]))
        assert quadsurf.pick_gap_dimension(report.eigenvalues) == 2
        U, _ = quadsurf.active_subspace(np.diag([10.0, 9.0, 0.1, 0.09]))
        assert U.dim == 2

    def test_gap_rule_tie_break_smallest(self):
        # equal ratios 4/2 and 2/1: smallest n wins
        assert quadsurf.pick_gap_dimension(np.array([4.0, 2.0, 1.0])) == 1

    def test_nonsymmetric_rejected(self):
        K = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ValueError):
            quadsurf.active_subspace(K, n=1)

    def test_output_scaling_invariance(self):
        doe, _ = synth_quadratic(5, 100, seed=13)
        beta = 3.7
        scaled = DesignOfExperiments(inputs=doe.inputs, outputs=beta * doe.outputs)
        K1 = quadsurf.gradient_covariance(quadsurf.fit_quadratic(doe))
        K2 = quadsurf.gradient_covariance(
            quadsurf.fit_quadratic(scaled, allow_undersampled=True)
        )
        U1, r1 = quadsurf.active_subspace(K1, n=2)
        U2, r2 = quadsurf.active_subspace(K2, n=2)
        assert r2.eigenvalues == pytest.approx(beta**2 * r1.eigenvalues, rel=1e-8)
        assert subspace_angle(U1, U2) < 1e-8


class TestBootstrap:
    def test_single_replicate_bands_collapse(self):
        doe, _ = synth_quadratic(4, 60, seed=17)
        report = quadsurf.bootstrap_eigenvalues(doe, subsample_size=40,
                                                replicates=1, seed=0)
        assert np.all(report.bootstrap_lo == report.bootstrap_hi)

    def test_noiseless_quadratic_bands_tight(self):
        doe, truth = synth_quadratic(4, 80, seed=19)
        report = quadsurf.bootstrap_eigenvalues(doe, subsample_size=40,
                                                replicates=25, seed=3)
        # every admissible subsample recovers the same exact quadratic
        assert np.abs(report.bootstrap_hi - report.bootstrap_lo).max() < 1e-8
        assert np.abs(report.bootstrap_lo - report.eigenvalues).max() < 1e-8

    def test_deterministic_under_seed(self):
        doe, _ = synth_quadratic(4, 70, seed=23)
        a = quadsurf.bootstrap_eigenvalues(doe, 40, 10, seed=5)
        b = quadsurf.bootstrap_eigenvalues(doe, 40, 10, seed=5)
        assert np.array_equal(a.bootstrap_lo, b.bootstrap_lo)
        assert np.array_equal(a.bootstrap_hi, b.bootstrap_hi)
        assert np.all(a.bootstrap_lo <= a.bootstrap_hi)

    def test_paper_shaped_study_runs(self):
        # 548-sample 25-D design, 400-sample subsamples (replicate count cut
        # down from 1000 to keep the suite fast; the procedure is identical)
        doe, _ = synth_quadratic(25, 548, seed=29)
        report = quadsurf.bootstrap_eigenvalues(doe, subsample_size=400,
                                                replicates=20, seed=7)
        assert report.subsample_size == 400
        assert report.replicates == 20
        assert np.all(report.bootstrap_lo <= report.bootstrap_hi)

    def test_infeasible_subsample_sizes(self):
        doe, _ = synth_quadratic(4, 60, seed=31)
        with pytest.raises(PreconditionError):
            quadsurf.bootstrap_eigenvalues(doe, subsample_size=61, replicates=2, seed=0)
        with pytest.raises(PreconditionError):
            quadsurf.bootstrap_eigenvalues(doe, subsample_size=10, replicates=2, seed=0)
