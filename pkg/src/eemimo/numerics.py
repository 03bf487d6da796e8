"""Dense Hermitian matrix primitives.

Everything here works on small (at most a few dozen rows) complex matrices
stored as 2-D numpy arrays. The functions are pure; nothing is cached.
"""
import math

import numpy as np

from .errors import DomainError, ValidationError

__all__ = ['HERMITIAN_ATOL', 'RANK_RTOL', 'check_hermitian', 'hermitize',
           'hermitian_eig', 'logdet_psd', 'inv_sqrt_psd', 'numerical_rank']

#: Absolute tolerance on ``|A - A^H|`` (scaled by ``max(1, max|A|)``).
HERMITIAN_ATOL = 1e-12
#: Eigenvalues below ``RANK_RTOL * max eigenvalue`` count as exact zeros.
RANK_RTOL = 1e-12
#: PSD slack relative to the largest eigenvalue magnitude.
PSD_RTOL = 1e-10


def _as_square(A):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {A.shape}")
    return A


def check_hermitian(A, atol=HERMITIAN_ATOL):
    """Raise :class:`ValidationError` unless ``A`` is Hermitian.

    The tolerance is absolute for entries of order one and grows with the
    largest entry, so products such as ``H^H Q H`` with large gains are not
    rejected for rounding noise.
    """
    A = _as_square(A)
    if A.size == 0:
        return A
    scale = max(1.0, float(np.max(np.abs(A))))
    err = float(np.max(np.abs(A - A.conj().T)))
    if not np.isfinite(err) or err > atol * scale:
        raise ValidationError(
            f"matrix is not Hermitian: max |A - A^H| = {err:.3e} "
            f"(allowed {atol * scale:.3e})")
    return A


def hermitize(A):
    """Return ``(A + A^H) / 2``, removing rounding asymmetry."""
    A = np.asarray(A)
    return 0.5 * (A + A.conj().swapaxes(-1, -2))


def hermitian_eig(A):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Hermitian matrix.

    Returns
    -------
    w : np.ndarray, shape (n,)
        Real eigenvalues in descending order.
    U : np.ndarray, shape (n, n)
        Unitary matrix whose columns are the matching eigenvectors, so that
        ``A = U @ diag(w) @ U^H``.
    """
    A = check_hermitian(A)
    w, U = np.linalg.eigh(hermitize(A))
    return w[::-1].copy(), U[:, ::-1].copy()


def numerical_rank(w, rtol=RANK_RTOL):
    """Number of eigenvalues in ``w`` above ``rtol`` times the largest one."""
    w = np.asarray(w, dtype=float)
    if w.size == 0:
        return 0
    top = float(np.max(w))
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(w > rtol * top))


def logdet_psd(A, base2=True):
    """Log-determinant of a Hermitian positive definite matrix.

    Uses a Cholesky factorisation; the determinant itself is never formed.
    Returns bits when ``base2`` is true, nats otherwise.
    """
    A = check_hermitian(A)
    if A.shape[0] == 0:
        return 0.0
    try:
        L = np.linalg.cholesky(hermitize(A))
    except np.linalg.LinAlgError:
        w = np.linalg.eigvalsh(hermitize(A))
        k = int(np.argmin(w))
        raise DomainError(
            f"matrix is not positive definite: eigenvalue #{k} = {w[k]:.6e}"
        ) from None
    diag = np.real(np.diag(L))
    if np.any(diag <= 0.0) or not np.all(np.isfinite(diag)):
        k = int(np.argmin(diag))
        raise DomainError(
            f"matrix is not positive definite: Cholesky pivot #{k} = {diag[k]:.6e}")
    val = 2.0 * float(np.sum(np.log(diag)))
    return val / math.log(2.0) if base2 else val


def inv_sqrt_psd(A):
    """Hermitian inverse square root ``R`` of a positive definite ``A``,
    i.e. ``R @ A @ R = I``."""
    A = check_hermitian(A)
    w, U = np.linalg.eigh(hermitize(A))
    if A.shape[0] == 0:
        return np.zeros_like(A)
    top = float(np.max(np.abs(w)))
    if not np.all(np.isfinite(w)) or top == 0.0 or w[0] <= RANK_RTOL * top:
        raise DomainError(
            f"matrix is singular or indefinite: smallest eigenvalue {w[0]:.6e}, "
            f"largest magnitude {top:.6e}")
    R = (U * (1.0 / np.sqrt(w))) @ U.conj().T
    return hermitize(R)
