import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eemimo.errors import DomainError, ValidationError
from eemimo.numerics import (check_hermitian, hermitian_eig, inv_sqrt_psd,
                             logdet_psd, numerical_rank)

from conftest import random_psd


def test_eig_of_diagonal_is_sorted_descending():
    w, U = hermitian_eig(np.diag([1.0, 5.0, 3.0]))
    assert np.allclose(w, [5.0, 3.0, 1.0])
    assert np.allclose(np.abs(U), np.eye(3)[:, [1, 2, 0]])


def test_eig_two_by_two_closed_form():
    # [[2, i], [-i, 2]] has eigenvalues 3 and 1
    w, _ = hermitian_eig(np.array([[2.0, 1j], [-1j, 2.0]]))
    assert np.allclose(w, [3.0, 1.0], atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**31))
def test_eig_reconstruction_and_unitarity(n, seed):
    A = random_psd(np.random.default_rng(seed), n)
    w, U = hermitian_eig(A)
    nrm = np.linalg.norm(A)
    assert np.linalg.norm(U @ np.diag(w) @ U.conj().T - A) <= 1e-10 * nrm
    assert np.linalg.norm(U.conj().T @ U - np.eye(n)) <= 1e-10
    assert np.all(np.diff(w) <= 0)


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        check_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValidationError):
        hermitian_eig(np.ones((2, 3)))


def test_hermitian_tolerance_scales_with_magnitude():
    A = 1e8 * np.eye(2, dtype=complex)
    A[0, 1] = 1e-6  # tiny relative to the entries
    check_hermitian(A)


def test_logdet_examples():
    assert logdet_psd(np.diag([2.0, 4.0])) == pytest.approx(3.0, abs=1e-12)
    assert logdet_psd(np.eye(5)) == 0.0
    assert logdet_psd(np.diag([np.e, np.e]), base2=False) == pytest.approx(2.0)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 5), seed=st.integers(0, 2**31))
def test_logdet_matches_eigenvalue_sum(n, seed):
    A = random_psd(np.random.default_rng(seed), n) + np.eye(n)
    ref = np.sum(np.log2(np.linalg.eigvalsh(A)))
    assert logdet_psd(A) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_logdet_singular_raises_with_diagnostics():
    with pytest.raises(DomainError, match='eigenvalue|pivot'):
        logdet_psd(np.diag([1.0, 0.0]))


def test_inv_sqrt_identity():
    rng = np.random.default_rng(0)
    A = random_psd(rng, 4) + 0.1 * np.eye(4)
    R = inv_sqrt_psd(A)
    assert np.allclose(R @ A @ R, np.eye(4), atol=1e-10)
    assert np.allclose(R, R.conj().T)


def test_inv_sqrt_rank_deficient_raises():
    rng = np.random.default_rng(1)
    with pytest.raises(DomainError):
        inv_sqrt_psd(random_psd(rng, 3, rank=2))


def test_numerical_rank():
    assert numerical_rank(np.array([4.0, 1.0, 1e-15])) == 2
    assert numerical_rank(np.array([0.0, 0.0])) == 0
    assert numerical_rank(np.array([])) == 0
