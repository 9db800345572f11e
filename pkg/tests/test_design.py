import numpy as np
import pytest

from ridgekit import design, polybasis, subspace
from ridgekit.errors import InfeasibleRegionError

from oracles import enumerate_lp


def _random_bounded_lp(seed):
    """Random LP over a box with extra random cuts; feasible and bounded by
    construction (an interior point is kept feasible)."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 6))
    n_cuts = int(rng.integers(0, 7))
    z0 = rng.uniform(-0.5, 0.5, k)
    G = [np.eye(k), -np.eye(k)]
    h = [np.ones(k), np.ones(k)]
    for _ in range(n_cuts):
        g = rng.standard_normal(k)
        h.append(np.atleast_1d(g @ z0 + rng.uniform(0.1, 1.0)))
        G.append(g[None, :])
    G = np.vstack(G)
    h = np.concatenate(h)
    c = rng.standard_normal(k)
    return design.LinearProgram(c=c, G=G, h=h)


class TestSimplex:
    def test_simple_maximization(self):
        lp = design.LinearProgram(
            c=np.array([-1.0]), G=np.array([[1.0], [-1.0]]), h=np.array([1.0, 0.0])
        )
        res = design.simplex_solve(lp)
        assert res.status == "optimal"
        assert res.z == pytest.approx(np.array([1.0]), abs=1e-12)
        assert res.value == pytest.approx(-1.0, abs=1e-12)

    def test_contradictory_constraints(self):
        lp = design.LinearProgram(
            c=np.array([1.0]), G=np.array([[1.0], [-1.0]]), h=np.array([-1.0, 0.0])
        )
        assert design.simplex_solve(lp).status == "infeasible"

    def test_unbounded(self):
        lp = design.LinearProgram(
            c=np.array([1.0]), G=np.array([[1.0]]), h=np.array([1.0])
        )
        assert design.simplex_solve(lp).status == "unbounded"

    def test_matches_vertex_enumeration_on_200_random_lps(self):
        for seed in range(200):
            lp = _random_bounded_lp(seed)
            res = design.simplex_solve(lp)
            status, value = enumerate_lp(lp.c, lp.G, lp.h)
            assert res.status == "optimal" == status, f"seed {seed}"
            assert res.value == pytest.approx(value, abs=1e-9), f"seed {seed}"
            assert np.all(lp.G @ res.z <= lp.h + 1e-9), f"seed {seed}"

    def test_bounds_are_honored(self):
        lp = design.LinearProgram(
            c=np.array([1.0, 1.0]),
            G=np.array([[1.0, 1.0]]),
            h=np.array([10.0]),
            lb=np.array([-2.0, -3.0]),
            ub=np.array([5.0, 5.0]),
        )
        res = design.simplex_solve(lp)
        assert res.status == "optimal"
        assert res.z == pytest.approx(np.array([-2.0, -3.0]), abs=1e-10)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            design.LinearProgram(
                c=np.array([1.0, 2.0]), G=np.array([[1.0]]), h=np.array([1.0])
            )

    def test_deterministic(self):
        lp = _random_bounded_lp(123)
        r1 = design.simplex_solve(lp)
        r2 = design.simplex_solve(lp)
        assert np.array_equal(r1.z, r2.z)
        assert r1.value == r2.value


class TestFeasibleBox:
    def test_origin_always_feasible(self):
        U = subspace.orthonormalize(np.random.default_rng(0).standard_normal((6, 2)))
        ok, witness = design.feasible_box(U, np.zeros(2))
        assert ok
        assert np.abs(witness).max() < 1e-9

    def test_far_coordinate_infeasible(self):
        U = subspace.Subspace(np.eye(2)[:, :1])
        ok, witness = design.feasible_box(U, [3.0])
        assert not ok and witness is None

    def test_projected_box_points_stay_feasible(self):
        rng = np.random.default_rng(1)
        U = subspace.orthonormalize(rng.standard_normal((25, 2)))
        for _ in range(20):
            x0 = rng.uniform(-1, 1, 25)
            ok, witness = design.feasible_box(U, U.columns.T @ x0)
            assert ok
            assert np.abs(witness).max() <= 1.0 + 1e-9


class TestChebyshevCenter:
    def test_origin(self):
        U = subspace.orthonormalize(np.random.default_rng(2).standard_normal((5, 2)))
        x, slack = design.chebyshev_center(U, np.zeros(2))
        assert np.abs(x).max() < 1e-9
        assert slack == pytest.approx(1.0, abs=1e-9)

    def test_half_axis_geometry(self):
        U = subspace.Subspace(np.eye(2)[:, :1])
        x, slack = design.chebyshev_center(U, [0.5])
        assert x == pytest.approx(np.array([0.5, 0.0]), abs=1e-12)
        assert slack == pytest.approx(0.5, abs=1e-12)

    def test_boundary_coordinate_zero_slack(self):
        U = subspace.Subspace(np.eye(3)[:, :1])
        x, slack = design.chebyshev_center(U, [1.0])
        assert slack == pytest.approx(0.0, abs=1e-9)
        assert abs(x[0] - 1.0) < 1e-9

    def test_infeasible_raises_with_certificate(self):
        U = subspace.Subspace(np.eye(2)[:, :1])
        with pytest.raises(InfeasibleRegionError) as err:
            design.chebyshev_center(U, [2.5])
        assert err.value.certificate["max_slack"] == pytest.approx(-1.5, abs=1e-9)


class TestGenerateDesigns:
    def test_count_one_is_the_center(self):
        U = subspace.orthonormalize(np.random.default_rng(3).standard_normal((8, 2)))
        y = np.array([0.1, -0.2])
        batch = design.generate_designs(U, y, count=1, seed=5)
        center, _ = design.chebyshev_center(U, y)
        assert len(batch) == 1
        assert np.array_equal(batch.designs[0], center)
        assert batch.strategies == ["chebyshev-center"]

    def test_four_designs_share_coordinates(self):
        rng = np.random.default_rng(4)
        U = subspace.orthonormalize(rng.standard_normal((25, 2)))
        y = U.columns.T @ rng.uniform(-1, 1, 25)
        batch = design.generate_designs(U, y, count=4, seed=6)
        assert len(batch) == 4
        for x in batch.designs:
            assert np.abs(U.columns.T @ x - y).max() < 1e-8
            assert np.abs(x).max() <= 1.0 + 1e-9

    def test_empty_null_space_single_design(self):
        U = subspace.Subspace(np.eye(3))
        y = np.array([0.2, -0.4, 0.6])
        batch = design.generate_designs(U, y, count=5, seed=7)
        assert len(batch) == 1
        assert batch.short
        assert batch.designs[0] == pytest.approx(y)

    def test_center_slack_dominates(self):
        rng = np.random.default_rng(8)
        for seed in range(10):
            U = subspace.orthonormalize(rng.standard_normal((10, 2)))
            y = U.columns.T @ rng.uniform(-1, 1, 10)
            batch = design.generate_designs(U, y, count=4, seed=seed)
            assert all(
                batch.slacks[0] >= s - 1e-12 for s in batch.slacks[1:]
            )

    def test_duplicates_removed(self):
        rng = np.random.default_rng(9)
        U = subspace.orthonormalize(rng.standard_normal((6, 2)))
        y = U.columns.T @ rng.uniform(-1, 1, 6)
        batch = design.generate_designs(U, y, count=8, seed=11)
        for i, a in enumerate(batch.designs):
            for b in batch.designs[i + 1 :]:
                assert np.abs(a - b).max() > 1e-9

    def test_reproducible_under_seed(self):
        rng = np.random.default_rng(10)
        U = subspace.orthonormalize(rng.standard_normal((12, 2)))
        y = U.columns.T @ rng.uniform(-1, 1, 12)
        b1 = design.generate_designs(U, y, count=4, seed=13)
        b2 = design.generate_designs(U, y, count=4, seed=13)
        assert all(np.array_equal(a, b) for a, b in zip(b1.designs, b2.designs))

    def test_infeasible_coordinates_raise(self):
        U = subspace.Subspace(np.eye(4)[:, :2])
        with pytest.raises(InfeasibleRegionError):
            design.generate_designs(U, np.array([5.0, 0.0]), count=2, seed=0)


class TestCrossProject:
    def _batch_and_surface(self, seed=12):
        rng = np.random.default_rng(seed)
        U = subspace.orthonormalize(rng.standard_normal((10, 2)))
        y = U.columns.T @ rng.uniform(-1, 1, 10)
        batch = design.generate_designs(U, y, count=3, seed=1)
        other_U = subspace.orthonormalize(rng.standard_normal((10, 2)))
        Y = rng.uniform(-2, 2, (50, 2))
        f = Y[:, 0] ** 2 - Y[:, 1]
        surf = subspace.fit_response_surface(Y, f, p=2)
        return batch, surf, other_U, y

    def test_same_subspace_returns_same_coordinates(self):
        batch, surf, _, y = self._batch_and_surface()
        out = design.crossproject(batch, surf, batch.subspace)
        for cp in out:
            assert cp.y == pytest.approx(y, abs=1e-9)

    def test_constant_surface_constant_predictions(self):
        batch, _, other_U, _ = self._batch_and_surface()
        rng = np.random.default_rng(13)
        Y = rng.uniform(-3, 3, (40, 2))
        const = subspace.fit_response_surface(Y, np.full(40, 2.25), p=2)
        out = design.crossproject(batch, const, other_U)
        assert all(cp.value == pytest.approx(2.25, abs=1e-9) for cp in out)

    def test_matches_direct_matrix_multiply(self):
        batch, surf, other_U, _ = self._batch_and_surface()
        out = design.crossproject(batch, surf, other_U)
        for cp, x in zip(out, batch.designs):
            assert np.array_equal(cp.y, other_U.columns.T @ x)
            assert cp.value == pytest.approx(
                float(surf.evaluate(other_U.columns.T @ x)[0])
            )
