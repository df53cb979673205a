import numpy as np
import pytest

from carleman_sysid.nummat import (RankDeficiencyError, condition_number, expm, gram_inverse_norm,
                                   induced_norm, numerical_rank, pinv)


def penrose_residuals(A, P):
    scale = max(np.linalg.norm(A), 1.0)
    pscale = max(np.linalg.norm(P), 1.0)
    return (
        np.linalg.norm(A @ P @ A - A) / scale,
        np.linalg.norm(P @ A @ P - P) / pscale,
        np.linalg.norm((A @ P).T - A @ P),
        np.linalg.norm((P @ A).T - P @ A),
    )


def test_pinv_examples():
    np.testing.assert_allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    np.testing.assert_allclose(pinv([[1.0, 1.0], [0.0, 1.0]]), [[1.0, -1.0], [0.0, 1.0]], atol=1e-15)


@pytest.mark.parametrize("seed", range(50))
def test_pinv_penrose_identities(seed):
    rng = np.random.default_rng(seed)
    r, c = rng.integers(1, 12, size=2)
    A = rng.normal(size=(r, c))
    if seed % 3 == 0:
        # force a rank deficiency
        A[:, -1] = A[:, 0]
    assert max(penrose_residuals(A, pinv(A))) < 1e-10


def test_pinv_full_row_rank_right_inverse():
    A = np.random.default_rng(3).normal(size=(5, 9))
    np.testing.assert_allclose(A @ pinv(A), np.eye(5), atol=1e-8)


def test_pinv_rcond_truncates():
    A = np.diag([1.0, 1e-12])
    assert pinv(A, rcond=1e-10)[1, 1] == 0.0
    assert numerical_rank(A, 1e-10) == 1


def test_expm_examples():
    np.testing.assert_array_equal(expm(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(expm(np.diag([0.5, -2.0])), np.diag(np.exp([0.5, -2.0])), rtol=1e-14)
    np.testing.assert_allclose(expm([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)


def test_expm_inverse_identity():
    rng = np.random.default_rng(5)
    for _ in range(20):
        A = rng.normal(size=(6, 6))
        A *= 5.0 / induced_norm(A, "two")
        np.testing.assert_allclose(expm(A) @ expm(-A), np.eye(6), atol=1e-8)


def test_expm_overflow_reported():
    with pytest.raises(OverflowError):
        expm(np.array([[1000.0]]))


def test_expm_rejects_non_square():
    with pytest.raises(ValueError):
        expm(np.ones((2, 3)))


def test_induced_norm_examples():
    assert induced_norm([[1.0, -2.0], [3.0, 4.0]], "inf") == 7.0
    assert induced_norm(np.eye(4), "two") == pytest.approx(1.0)
    assert induced_norm([[0.0, 2.0], [0.0, 0.0]], "two") == pytest.approx(2.0)
    with pytest.raises(ValueError):
        induced_norm(np.eye(2), "fro")


def test_two_norm_transpose_invariant():
    A = np.random.default_rng(1).normal(size=(4, 7))
    assert induced_norm(A, "two") == pytest.approx(induced_norm(A.T, "two"), rel=1e-12)


def test_gram_inverse_norm_examples():
    assert gram_inverse_norm(2 * np.eye(3), "two") == pytest.approx(0.25)
    assert gram_inverse_norm(2 * np.eye(3), "inf") == pytest.approx(0.25)
    Q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(6, 3)))
    assert gram_inverse_norm(Q, "two") == pytest.approx(1.0)
    with pytest.raises(RankDeficiencyError):
        gram_inverse_norm([[1.0, 1.0], [1.0, 1.0]])


def test_gram_inverse_norm_inf_matches_direct():
    M = np.random.default_rng(2).normal(size=(10, 4))
    direct = np.linalg.inv(M.T @ M)
    assert gram_inverse_norm(M, "inf") == pytest.approx(np.abs(direct).sum(axis=1).max(), rel=1e-10)


def test_condition_number():
    assert condition_number(np.diag([4.0, 2.0])) == pytest.approx(2.0)
    assert condition_number(np.diag([1.0, 0.0])) == float("inf")
