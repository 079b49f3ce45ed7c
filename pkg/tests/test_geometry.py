import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinpoint.geometry import (E1, E2, E3, check_tangent, half_turn, hat,
                                project_tangent, random_rotation,
                                reorthonormalize, rodrigues_exp, so3_exp, vee)

finite3 = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=3).map(np.array)


def polar_factor_oracle(M, iters=60):
    """Closest rotation by Newton iteration X <- (X + X^-T)/2."""
    X = M.copy()
    for _ in range(iters):
        X = 0.5 * (X + np.linalg.inv(X).T)
    return X


class TestHatVee:
    def test_cross_product_identity(self):
        assert np.allclose(hat(E1) @ E2, E3)

    def test_self_cross_is_zero(self):
        r = np.array([1.0, 2.0, 3.0])
        assert np.all(hat(r) @ r == 0.0)

    def test_matrix_layout(self):
        expected = np.array([[0.0, -3.0, 2.0], [3.0, 0.0, -1.0], [-2.0, 1.0, 0.0]])
        assert np.array_equal(hat([1.0, 2.0, 3.0]), expected)

    def test_vee_round_trip(self):
        r = np.array([1.0, 2.0, 3.0])
        assert np.array_equal(vee(hat(r)), r)

    def test_vee_zero(self):
        assert np.array_equal(vee(np.zeros((3, 3))), np.zeros(3))

    def test_vee_unit(self):
        assert np.array_equal(vee(hat(E3)), E3)

    def test_vee_rejects_non_skew(self):
        with pytest.raises(ValueError):
            vee(np.eye(3))

    @given(finite3)
    @settings(max_examples=50, deadline=None)
    def test_round_trip_bitexact(self, r):
        assert np.array_equal(vee(hat(r)), r)

    def test_batched(self):
        rs = np.arange(12.0).reshape(4, 3)
        H = hat(rs)
        assert H.shape == (4, 3, 3)
        assert np.array_equal(vee(H), rs)


class TestRodrigues:
    def test_zero_angle_is_identity(self):
        assert np.array_equal(rodrigues_exp(E2, 0.0), np.eye(3))

    def test_half_turn_about_e1(self):
        assert np.allclose(rodrigues_exp(E1, np.pi) @ E3, -E3, atol=1e-12)

    def test_quarter_turn_about_e3(self):
        assert np.allclose(rodrigues_exp(E3, np.pi / 2) @ E1, E2, atol=1e-15)

    def test_axis_is_fixed(self):
        ax = np.array([1.0, 2.0, 2.0]) / 3.0
        assert np.allclose(rodrigues_exp(ax, 1.234) @ ax, ax, atol=1e-15)

    def test_nonunit_axis_scales_angle(self):
        assert np.allclose(rodrigues_exp(2.0 * E3, 0.3), rodrigues_exp(E3, 0.6))

    def test_zero_vector_maps_to_identity(self):
        assert np.array_equal(so3_exp(np.zeros(3)), np.eye(3))

    @given(finite3.filter(lambda v: 1e-6 < np.linalg.norm(v) < 1e3),
           st.floats(-np.pi, np.pi, allow_nan=False))
    @settings(max_examples=50, deadline=None)
    def test_three_term_formula_and_orthogonality(self, v, eps):
        xi = v / np.linalg.norm(v)
        R = rodrigues_exp(xi, eps)
        S = hat(xi)
        explicit = np.eye(3) + S * np.sin(eps) + S @ S * (1.0 - np.cos(eps))
        assert np.abs(R - explicit).max() < 1e-12
        assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-12

    @given(finite3.filter(lambda v: 1e-6 < np.linalg.norm(v) < 1e3),
           st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
    @settings(max_examples=50, deadline=None)
    def test_composition_along_one_axis(self, v, a, b):
        ax = v / np.linalg.norm(v)
        lhs = rodrigues_exp(ax, a) @ rodrigues_exp(ax, b)
        assert np.abs(lhs - rodrigues_exp(ax, a + b)).max() < 1e-10

    def test_small_angle_series_branch(self):
        # below the series threshold the map must stay smooth and orthogonal
        v = 1e-10 * np.array([1.0, -2.0, 0.5])
        R = so3_exp(v)
        assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-15
        assert np.abs(R - (np.eye(3) + hat(v))).max() < 1e-19

    def test_half_turn_matches_exponential(self):
        u = np.array([2.0, -1.0, 2.0]) / 3.0
        assert np.abs(half_turn(u) - rodrigues_exp(u, np.pi)).max() < 1e-12
        # and is exact where the generic path rounds
        assert np.array_equal(half_turn(E1) @ E3, -E3)


class TestProjectTangent:
    def test_parallel_projects_to_zero(self):
        assert np.array_equal(project_tangent(E3, E3), np.zeros(3))

    def test_perpendicular_unchanged(self):
        assert np.array_equal(project_tangent(E3, E1), E1)

    def test_mixed(self):
        assert np.array_equal(project_tangent(E3, np.ones(3)), np.array([1.0, 1.0, 0.0]))

    @given(finite3.filter(lambda v: np.linalg.norm(v) > 1e-6), finite3)
    @settings(max_examples=50, deadline=None)
    def test_result_is_tangent(self, q, v):
        q = q / np.linalg.norm(q)
        out = project_tangent(q, v)
        assert abs(q @ out) <= 1e-14 * max(1.0, np.linalg.norm(v))
        check_tangent(q, out, tol=1e-10 * max(1.0, np.linalg.norm(v)))


class TestReorthonormalize:
    def test_identity_fixed(self):
        assert np.allclose(reorthonormalize(np.eye(3)), np.eye(3), atol=1e-15)

    def test_scale_removed(self):
        R = rodrigues_exp(E2, 0.7)
        assert np.abs(reorthonormalize(1.000001 * R) - R).max() < 1e-9

    def test_matches_polar_oracle_on_perturbation(self, rng):
        R = random_rotation(rng)
        M = R + 1e-8 * rng.normal(size=(3, 3))
        out = reorthonormalize(M)
        assert np.abs(out - R).max() < 1e-7
        assert np.abs(out - polar_factor_oracle(M)).max() < 1e-12

    def test_rejects_far_from_rotation(self):
        with pytest.raises(ValueError):
            reorthonormalize(2.0 * np.eye(3))

    def test_restores_invariants(self, rng):
        R = random_rotation(rng) + 1e-3 * rng.normal(size=(3, 3))
        out = reorthonormalize(R)
        assert np.linalg.norm(out.T @ out - np.eye(3)) < 1e-14
        assert abs(np.linalg.det(out) - 1.0) < 1e-14
