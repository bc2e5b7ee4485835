import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from helpers import normal_equation_solve
from iqnkit.errors import DimensionMismatch, RankDeficient, SingularGram
from iqnkit.linalg import (
    compute_pseudo_factor,
    invert_gram,
    qr_pseudo_factor,
    solve_least_squares,
)


def orthonormal(rng, m, k):
    Q, _ = np.linalg.qr(rng.standard_normal((m, k)))
    return Q


class TestSolveLeastSquares:
    def test_single_column(self):
        alpha = solve_least_squares([[1.0], [0.0]], [2.0, 3.0])
        np.testing.assert_allclose(alpha, [2.0], rtol=0, atol=1e-15)

    def test_identity(self):
        rhs = np.array([1.5, -2.0, 7.25])
        np.testing.assert_allclose(solve_least_squares(np.eye(3), rhs), rhs, rtol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_against_normal_equation_oracle(self, seed):
        rng = np.random.default_rng(seed)
        V = rng.standard_normal((6, 3))
        rhs = rng.standard_normal(6)
        expected = normal_equation_solve(V, rhs)
        np.testing.assert_allclose(solve_least_squares(V, rhs), expected, rtol=1e-10)

    def test_matrix_rhs(self):
        rng = np.random.default_rng(3)
        V = rng.standard_normal((7, 2))
        B = rng.standard_normal((7, 4))
        out = solve_least_squares(V, B)
        for j in range(4):
            np.testing.assert_allclose(out[:, j], solve_least_squares(V, B[:, j]), rtol=1e-12)

    def test_duplicate_columns_are_rank_deficient(self):
        v = np.arange(1.0, 5.0)
        with pytest.raises(RankDeficient):
            solve_least_squares(np.column_stack([v, 2 * v]), np.ones(4))

    def test_wide_matrix_is_rank_deficient(self):
        with pytest.raises(RankDeficient):
            solve_least_squares(np.ones((2, 3)), np.ones(2))

    def test_rhs_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            solve_least_squares(np.eye(3), np.ones(2))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            solve_least_squares([[np.nan], [1.0]], [1.0, 1.0])

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        V, rhs = rng.standard_normal((9, 4)), rng.standard_normal(9)
        assert solve_least_squares(V, rhs).tobytes() == solve_least_squares(V, rhs).tobytes()


class TestGramInverse:
    def test_orthonormal_columns_give_identity(self):
        V = orthonormal(np.random.default_rng(0), 6, 3)
        np.testing.assert_allclose(invert_gram(V), np.eye(3), atol=1e-12)

    def test_scalar(self):
        np.testing.assert_allclose(invert_gram([[2.0], [0.0]]), [[0.25]], rtol=1e-15)

    def test_multiply_back(self):
        V = np.random.default_rng(1).standard_normal((8, 3))
        G = invert_gram(V)
        assert np.max(np.abs(G @ (V.T @ V) - np.eye(3))) <= 1e-8

    def test_singular(self):
        v = np.arange(1.0, 6.0)
        with pytest.raises(SingularGram):
            invert_gram(np.column_stack([v, v]))

    def test_zero_matrix(self):
        with pytest.raises(SingularGram):
            invert_gram(np.zeros((3, 1)))


class TestPseudoFactor:
    def test_orthonormal_columns_give_transpose(self):
        V = orthonormal(np.random.default_rng(2), 7, 2)
        np.testing.assert_allclose(compute_pseudo_factor(V), V.T, atol=1e-12)

    def test_scalar(self):
        np.testing.assert_allclose(compute_pseudo_factor([[2.0], [0.0]]), [[0.5, 0.0]], rtol=1e-15)

    def test_left_inverse(self):
        V = np.random.default_rng(4).standard_normal((10, 4))
        Z = compute_pseudo_factor(V)
        assert Z.shape == (4, 10)
        assert np.max(np.abs(Z @ V - np.eye(4))) <= 1e-8

    def test_qr_and_lu_routes_agree(self):
        V = np.random.default_rng(5).standard_normal((12, 5))
        np.testing.assert_allclose(qr_pseudo_factor(V), compute_pseudo_factor(V), rtol=1e-8, atol=1e-12)

    def test_flop_counter(self):
        from collections import Counter

        flops = Counter()
        compute_pseudo_factor(np.random.default_rng(6).standard_normal((50, 3)), flops=flops)
        assert flops["gram"] == 2 * 50 * 9 and flops["lu"] == 27


well_conditioned = st.integers(1, 5).flatmap(
    lambda k: st.tuples(
        st.integers(k, 12).flatmap(lambda m: st.just((m, k))),
        st.integers(0, 2**32 - 1),
    )
)


@settings(max_examples=60, deadline=None)
@given(well_conditioned)
def test_least_squares_satisfies_normal_equations(case):
    (m, k), seed = case
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((m, k)) + 3 * np.eye(m, k)
    rhs = rng.standard_normal(m)
    alpha = solve_least_squares(V, rhs)
    lhs = np.linalg.norm(V.T @ (V @ alpha - rhs))
    assert lhs <= 1e-10 * max(1.0, np.linalg.norm(V.T @ rhs))
    Z = compute_pseudo_factor(V)
    assert np.max(np.abs(Z @ V - np.eye(k))) <= 1e-8
    np.testing.assert_allclose(alpha, Z @ rhs, rtol=1e-8, atol=1e-8 * np.linalg.norm(alpha))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (6, 2), elements=st.floats(-10, 10)))
def test_least_squares_never_returns_garbage(V):
    try:
        alpha = solve_least_squares(V, np.ones(6))
    except RankDeficient:
        return
    assert np.all(np.isfinite(alpha))
