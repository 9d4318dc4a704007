import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ammsketch import (
    PairedMatrices,
    exact_product,
    frobenius_norm,
    generate_matrix,
    spectral_norm,
    spectrum_for_target_sr,
    stable_rank,
)
from ammsketch.errors import DimensionMismatch, NonConvergence, OutOfRange, ZeroMatrix
from ammsketch.matcore import SpectralStats, as_matrix, spectral_norms


def frobenius_oracle(M):
    return math.sqrt(math.fsum(float(x) ** 2 for row in M for x in row))


def test_frobenius_examples(rng):
    assert frobenius_norm(np.eye(2)) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert frobenius_norm(np.diag([3.0, 4.0])) == pytest.approx(5.0, rel=1e-15)
    M = rng.standard_normal((8, 8))
    assert frobenius_norm(M) == pytest.approx(frobenius_oracle(M), rel=1e-12)


def test_spectral_norm_examples():
    assert spectral_norm(np.diag([3.0, 4.0])) == pytest.approx(4.0, rel=1e-10)
    M = np.outer([1.0, 2.0], [3.0, 0.0])
    assert spectral_norm(M) == pytest.approx(3 * math.sqrt(5), rel=1e-10)
    assert spectral_norm(np.zeros((3, 5))) == 0.0


def test_spectral_norm_matches_svd(rng):
    M = rng.standard_normal((16, 16))
    assert spectral_norm(M) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-10)


def test_spectral_norm_ones_is_not_top_eigvec():
    # all-ones is an eigenvector of M^T M with the *small* eigenvalue here
    M = np.array([[1.0, -1.0], [-1.0, 1.0]]) + np.eye(2)
    assert spectral_norm(M) == pytest.approx(3.0, rel=1e-10)


def test_spectral_norm_rectangular_both_orientations(rng):
    for shape in [(5, 17), (17, 5), (1, 9), (9, 1)]:
        M = rng.standard_normal(shape)
        assert spectral_norm(M) == pytest.approx(np.linalg.norm(M, 2), rel=1e-10)


def test_spectral_norms_batch(rng):
    stack = rng.standard_normal((7, 6, 4))
    expected = [np.linalg.norm(M, 2) for M in stack]
    np.testing.assert_allclose(spectral_norms(stack), expected, rtol=1e-10)


def test_spectral_norm_nonconvergence(rng):
    M = rng.standard_normal((20, 20))
    with pytest.raises(NonConvergence):
        spectral_norm(M, tol=1e-14, max_iter=3)


def test_spectral_norm_is_deterministic(rng):
    M = rng.standard_normal((12, 9))
    assert spectral_norm(M) == spectral_norm(M.copy())


def test_stable_rank_examples(rng):
    assert stable_rank(np.outer(rng.standard_normal(5), rng.standard_normal(7))) == pytest.approx(1.0, rel=1e-10)
    assert stable_rank(np.eye(6)) == pytest.approx(6.0, rel=1e-12)
    assert stable_rank(np.diag([2.0, 1.0, 1.0])) == pytest.approx(1.5, rel=1e-12)
    with pytest.raises(ZeroMatrix):
        stable_rank(np.zeros((2, 2)))


def test_exact_product_examples():
    assert np.array_equal(exact_product(PairedMatrices(np.eye(2), np.eye(2))), np.eye(2))
    P = PairedMatrices(np.array([[1.0], [2.0]]), np.array([[3.0], [4.0]]))
    assert np.array_equal(exact_product(P), [[3.0, 4.0], [6.0, 8.0]])


def test_exact_product_matches_outer_sum(rng):
    A, B = rng.standard_normal((6, 40)), rng.standard_normal((9, 40))
    oracle = np.zeros((6, 9))
    for i in range(40):
        oracle += np.outer(A[:, i], B[:, i])
    np.testing.assert_allclose(exact_product(PairedMatrices(A, B)), oracle, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("sigma, expected", [
    ((1.0,), 1.0),
    ((1.0, 1.0, 1.0, 1.0), 4.0),
    ((1.0, 0.5, 0.25), 1.3125),
])
def test_generate_matrix_stable_rank(sigma, expected):
    M = generate_matrix(10, 20, sigma, seed=3)
    assert stable_rank(M) == pytest.approx(expected, abs=1e-8)
    np.testing.assert_allclose(np.linalg.svd(M, compute_uv=False)[: len(sigma)], sigma, atol=1e-12)


def test_generate_matrix_reproducible():
    a = generate_matrix(7, 11, (2.0, 1.0), seed=42)
    b = generate_matrix(7, 11, (2.0, 1.0), seed=42)
    assert a.tobytes() == b.tobytes()
    assert generate_matrix(7, 11, (2.0, 1.0), seed=43).tobytes() != a.tobytes()


def test_generate_matrix_errors():
    with pytest.raises(DimensionMismatch):
        generate_matrix(2, 5, (1.0, 1.0, 1.0), seed=0)
    with pytest.raises(OutOfRange):
        generate_matrix(4, 4, (0.5, 1.0), seed=0)


def test_spectrum_for_target_sr():
    np.testing.assert_array_equal(spectrum_for_target_sr(1, 5), [1, 0, 0, 0, 0])
    np.testing.assert_array_equal(spectrum_for_target_sr(5, 5), [1, 1, 1, 1, 1])
    s = spectrum_for_target_sr(3, 5)
    np.testing.assert_allclose(s[1:], math.sqrt(0.5), rtol=1e-15)
    assert np.sum(s**2) == pytest.approx(3.0, rel=1e-14)
    for bad in [(0.5, 5), (6, 5)]:
        with pytest.raises(OutOfRange):
            spectrum_for_target_sr(*bad)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(OutOfRange):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(DimensionMismatch):
        as_matrix([1.0, 2.0])


def test_paired_matrices_validation():
    with pytest.raises(DimensionMismatch):
        PairedMatrices(np.ones((2, 3)), np.ones((2, 4)))
    with pytest.raises(ZeroMatrix):
        # a_1 != 0 only where b_1 == 0 and vice versa
        PairedMatrices(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))


matrices = arrays(
    np.float64,
    st.tuples(st.integers(1, 12), st.integers(1, 12)),
    elements=st.floats(-10, 10, allow_nan=False, width=64),
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_norm_ordering(M):
    spec = spectral_norm(M)
    assert frobenius_norm(M) >= spec * (1 - 1e-10) >= 0


@settings(max_examples=60, deadline=None)
@given(matrices, st.floats(0.01, 100) | st.floats(-100, -0.01))
def test_stable_rank_range_and_scale_invariance(M, alpha):
    if np.linalg.norm(M, 2) < 1e-6:
        return
    sr = stable_rank(M)
    assert 1 - 1e-9 <= sr <= min(M.shape) + 1e-9
    assert stable_rank(alpha * M) == pytest.approx(sr, rel=1e-10)


def test_spectral_stats_invariants(rng):
    M = generate_matrix(8, 12, (1.0, 0.5, 0.5), seed=2)
    s = SpectralStats.of(M)
    assert s.frobenius_norm >= s.spectral_norm
    assert s.stable_rank == pytest.approx((s.frobenius_norm / s.spectral_norm) ** 2)
    assert s.stable_rank <= 3 + 1e-9
    assert SpectralStats.of(np.zeros((2, 2))).stable_rank == 0.0


def test_spectral_norm_against_svd_100_matrices():
    rng = np.random.default_rng(7)
    for _ in range(100):
        r, c = rng.integers(1, 33, size=2)
        M = rng.standard_normal((r, c))
        assert spectral_norm(M) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-10)
