"""Dense kernel tests: LU solves, determinant signs, Moore-Penrose."""

import numpy as np
import pytest

from homotcp import (
    SingularMatrixError,
    det_sign,
    euclidean_norm,
    lu_solve,
    pinv_right_apply,
)


def exact_int_det(mat):
    """Cofactor-expansion determinant in exact integer arithmetic."""
    m = [[int(v) for v in row] for row in mat]
    k = len(m)
    if k == 1:
        return m[0][0]
    total = 0
    for j in range(k):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        total += (-1) ** j * m[0][j] * exact_int_det(minor)
    return total


class TestLuSolve:
    def test_identity(self):
        b = np.array([3.0, -1.0, 2.0])
        assert np.array_equal(lu_solve(np.eye(3), b), b)

    def test_diagonal(self):
        y = lu_solve(np.diag([2.0, 4.0]), np.array([2.0, 8.0]))
        assert np.allclose(y, [1.0, 2.0], atol=1e-15)

    def test_residual_bound_random(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            k = int(rng.integers(2, 9))
            mat = rng.uniform(-1, 1, (k, k)) + k * np.eye(k)
            b = rng.uniform(-1, 1, k)
            y = lu_solve(mat, b)
            assert np.abs(mat @ y - b).max() <= 1e-10 * (1 + np.abs(b).max())

    def test_residual_bound_many_sizes(self):
        # L-1: well-conditioned systems up to size 12
        rng = np.random.default_rng(13)
        count = 0
        while count < 1000:
            k = int(rng.integers(1, 13))
            mat = rng.uniform(-1, 1, (k, k))
            if np.linalg.cond(mat) > 1e6:
                continue
            b = rng.uniform(-1, 1, k)
            y = lu_solve(mat, b)
            assert np.abs(mat @ y - b).max() <= 1e-10 * (1 + np.abs(b).max())
            count += 1

    def test_singular_raises(self):
        mat = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(SingularMatrixError):
            lu_solve(mat, np.array([1.0, 1.0]))

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            lu_solve(np.ones((2, 3)), np.ones(2))
        with pytest.raises(ValueError):
            lu_solve(np.eye(2), np.ones(3))


class TestDetSign:
    def test_identity(self):
        assert det_sign(np.eye(4)) == 1

    def test_negative_diagonal(self):
        assert det_sign(np.diag([1.0, -1.0])) == -1

    def test_singular_is_zero(self):
        assert det_sign(np.array([[1.0, 2.0], [2.0, 4.0]])) == 0
        assert det_sign(np.zeros((3, 3))) == 0

    def test_block_start_structure_is_positive(self):
        # The mu = 1 block matrix [[I,0,0,0],[Z1,0,X,0],[0,Z2,0,W],[0,I,0,0]]
        # has determinant prod(x_i w_i) > 0 for positive diagonals.
        rng = np.random.default_rng(19)
        for _ in range(25):
            n = int(rng.integers(1, 4))
            x, w, z1, z2 = (rng.uniform(0.1, 3.0, n) for _ in range(4))
            eye, zero = np.eye(n), np.zeros((n, n))
            mat = np.block(
                [
                    [eye, zero, zero, zero],
                    [np.diag(z1), zero, np.diag(x), zero],
                    [zero, np.diag(z2), zero, np.diag(w)],
                    [zero, eye, zero, zero],
                ]
            )
            assert det_sign(mat) == 1

    def test_matches_exact_cofactor_expansion(self):
        # L-3: integer matrices up to 4x4 with entries in [-3, 3]
        rng = np.random.default_rng(23)
        for _ in range(200):
            k = int(rng.integers(1, 5))
            mat = rng.integers(-3, 4, size=(k, k)).astype(float)
            expected = exact_int_det(mat)
            got = det_sign(mat)
            assert got == (0 if expected == 0 else (1 if expected > 0 else -1))


class TestPinvRightApply:
    def test_single_row(self):
        y = pinv_right_apply(np.array([[1.0, 0.0]]), np.array([3.0]))
        assert np.allclose(y, [3.0, 0.0], atol=1e-15)

    def test_identity_padded(self):
        k = 4
        mat = np.hstack([np.eye(k), np.zeros((k, 1))])
        b = np.arange(1.0, k + 1)
        y = pinv_right_apply(mat, b)
        assert np.allclose(y, np.append(b, 0.0), atol=1e-14)

    def test_random_full_rank_solution_and_orthogonality(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            mat = rng.uniform(-1, 1, (8, 9))
            b = rng.uniform(-1, 1, 8)
            y = pinv_right_apply(mat, b)
            assert euclidean_norm(mat @ y - b) <= 1e-9
            # y is orthogonal to the null space of mat
            _, _, vt = np.linalg.svd(mat)
            null = vt[-1]
            assert abs(y @ null) <= 1e-9 * max(1.0, euclidean_norm(y))

    def test_minimum_norm_property(self):
        # L-2: any other solution is at least as long
        rng = np.random.default_rng(31)
        for _ in range(50):
            mat = rng.uniform(-1, 1, (5, 7))
            b = rng.uniform(-1, 1, 5)
            y = pinv_right_apply(mat, b)
            _, _, vt = np.linalg.svd(mat)
            for null in vt[5:]:
                for t in (-2.0, -0.5, 0.5, 2.0):
                    other = y + t * null
                    assert euclidean_norm(mat @ other - b) <= 1e-8
                    assert euclidean_norm(y) <= euclidean_norm(other) + 1e-12

    def test_rank_deficient_raises(self):
        mat = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
        with pytest.raises(SingularMatrixError):
            pinv_right_apply(mat, np.array([1.0, 1.0]))

    def test_requires_wide_matrix(self):
        with pytest.raises(ValueError):
            pinv_right_apply(np.eye(3), np.ones(3))


class TestEuclideanNorm:
    def test_three_four_five(self):
        assert euclidean_norm([3.0, 4.0]) == 5.0

    def test_zero(self):
        assert euclidean_norm(np.zeros(6)) == 0.0

    def test_matches_componentwise_sum(self):
        rng = np.random.default_rng(37)
        v = rng.uniform(-2, 2, 13)
        direct = sum(float(c) ** 2 for c in v) ** 0.5
        assert euclidean_norm(v) == pytest.approx(direct, rel=1e-14)
