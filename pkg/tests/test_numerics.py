import numpy as np
import pytest

from fdia_lab.errors import DataError, DimensionError, SingularMatrixError
from fdia_lab.numerics import as_matrix, as_vector, mat_mul, norm2, solve


def test_mat_mul_identity():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(mat_mul(np.eye(2), a), a)


def test_mat_mul_zero():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(mat_mul(np.zeros((2, 2)), a), np.zeros((2, 2)))


def test_mat_mul_hand_case():
    # [[1,2],[3,4]] x [[5],[6]] = [[17],[39]] by hand
    out = mat_mul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[5.0], [6.0]]))
    np.testing.assert_array_equal(out, np.array([[17.0], [39.0]]))


def test_mat_mul_dimension_mismatch():
    with pytest.raises(DimensionError):
        mat_mul(np.ones((2, 3)), np.ones((2, 2)))


def test_mat_mul_associativity_random(rng):
    for _ in range(50):
        a = rng.normal(size=(4, 3))
        b = rng.normal(size=(3, 5))
        c = rng.normal(size=(5, 2))
        np.testing.assert_allclose(mat_mul(mat_mul(a, b), c),
                                   mat_mul(a, mat_mul(b, c)), atol=1e-10)


def test_solve_identity():
    b = np.array([3.0, -1.0, 2.0])
    np.testing.assert_array_equal(solve(np.eye(3), b), b)


def test_solve_diagonal_hand_case():
    x = solve(np.array([[2.0, 0.0], [0.0, 4.0]]), np.array([2.0, 8.0]))
    np.testing.assert_allclose(x, [1.0, 2.0], rtol=1e-14)


def test_solve_singular_names_pivot():
    with pytest.raises(SingularMatrixError) as err:
        solve(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0]))
    assert err.value.column == 1
    assert "pivot" in str(err.value)


def test_solve_requires_square():
    with pytest.raises(DimensionError):
        solve(np.ones((2, 3)), np.ones(2))


def test_solve_roundtrip_random(rng):
    for _ in range(50):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=(n, n)) + n * np.eye(n)
        x = rng.normal(size=n)
        np.testing.assert_allclose(solve(a, a @ x), x, atol=1e-8)


def test_solve_residual_tolerance(rng):
    for _ in range(20):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=(n, n)) + n * np.eye(n)
        b = rng.normal(size=n)
        x = solve(a, b)
        assert norm2(a @ x - b) <= 1e-10 * max(norm2(b), 1e-30)


def test_norm2_zero():
    assert norm2(np.zeros(2)) == 0.0


def test_norm2_hand_case():
    assert norm2(np.array([3.0, 4.0])) == pytest.approx(5.0)


def test_norm2_scalar_abs():
    assert norm2(np.array([-7.5])) == pytest.approx(7.5)


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(DataError):
        as_matrix([[1.0, np.nan]])


def test_as_vector_length_check():
    with pytest.raises(DimensionError):
        as_vector([1.0, 2.0], length=3)
