"""Sum-rate evaluation for the dual MAC and the DPC broadcast channel.

Covariance sets are complex arrays of shape ``(K, n, n)``: ``n = N`` for the
MAC (one ``N x N`` covariance per user) and ``n = M`` for the broadcast
channel. Rates are in bits/s.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .numerics import PSD_RTOL, check_hermitian, hermitize, logdet_psd

__all__ = ['EffectiveChannel', 'check_covariances', 'mac_aggregate',
           'mac_sum_rate', 'bc_sum_rate', 'effective_channel',
           'whiten_interference']

LOG2 = np.log(2.0)


@dataclass(frozen=True)
class EffectiveChannel:
    """User ``i``'s view of the MAC with the other users frozen.

    ``G`` is ``H_i (sigma2 I + sum_{j!=i} H_j^H Q_j H_j)^{-1/2}``, ``b`` the
    rate already delivered by the other users (bits/s) and ``a`` the power
    consumed by everything except user ``i``'s own transmit power (watts).
    """
    G: np.ndarray
    b: float
    a: float


def check_covariances(Q, K, n):
    """Validate shape ``(K, n, n)``, Hermitian symmetry and PSD-ness."""
    Q = np.asarray(Q, dtype=complex)
    if Q.shape != (K, n, n):
        raise ValidationError(
            f"covariances must have shape {(K, n, n)}, got {Q.shape}")
    for i in range(K):
        check_hermitian(Q[i])
        w = np.linalg.eigvalsh(hermitize(Q[i]))
        top = float(np.max(np.abs(w))) if w.size else 0.0
        if w.size and w[0] < -PSD_RTOL * top:
            raise DomainError(
                f"covariance {i} is not PSD: eigenvalue {w[0]:.6e}")
    return Q


def mac_aggregate(H, Q):
    """``sum_i H_i^H Q_i H_i`` as an ``M x M`` Hermitian matrix."""
    Hs = H.H
    A = np.einsum('knm,knp,kpq->mq', Hs.conj(), Q, Hs)
    return hermitize(A)


def mac_sum_rate(H, Q):
    """``W log2 |I + (1/sigma2) sum_i H_i^H Q_i H_i|``."""
    Q = check_covariances(Q, H.K, H.N)
    A = np.eye(H.M) + mac_aggregate(H, Q) / H.sigma2
    return float(H.W * logdet_psd(A, base2=True))


def bc_sum_rate(H, Sigma):
    """DPC sum rate with encoding order ``1, ..., K``.

    User ``i`` sees interference from users ``1..i-1`` only, which gives the
    telescoping form ``sum_i W log2 |I + H_i S_i H_i^H / sigma2| /
    |I + H_i S_{i-1} H_i^H / sigma2|`` with ``S_i = Sigma_1 + ... + Sigma_i``.
    """
    Sigma = check_covariances(Sigma, H.K, H.M)
    I = np.eye(H.N)
    acc = np.zeros((H.M, H.M), dtype=complex)
    total = 0.0
    for i in range(H.K):
        Hi = H.H[i]
        before = I + Hi @ acc @ Hi.conj().T / H.sigma2
        acc = acc + Sigma[i]
        after = I + Hi @ acc @ Hi.conj().T / H.sigma2
        total += logdet_psd(hermitize(after)) - logdet_psd(hermitize(before))
    return float(H.W * total)


def whiten_interference(A, sigma2):
    """Inverse square root of the interference-plus-noise matrix ``A`` and
    ``log2 |A / sigma2|``, from one eigendecomposition."""
    w, V = np.linalg.eigh(hermitize(A))
    if not w.size:
        return np.zeros_like(A), 0.0
    if not np.all(np.isfinite(w)) or w[0] <= 0.0:
        raise DomainError(
            f"interference-plus-noise matrix is not positive definite "
            f"(smallest eigenvalue {w[0]:.6e})")
    R = hermitize((V * (1.0 / np.sqrt(w))) @ V.conj().T)
    logdet = float(np.sum(np.log(w / sigma2))) / LOG2
    return R, max(logdet, 0.0)


def effective_channel(H, Q, i, model, M_a=None):
    """Decompose the MAC sum rate around user ``i``.

    ``b + W log2 |I + G^H Q_i G|`` reproduces :func:`mac_sum_rate` for any
    ``Q_i``; ``a`` adds the other users' transmit power (scaled by
    ``1/eta``) to the circuit power of ``M_a`` antennas (default ``H.M``).
    """
    Q = check_covariances(Q, H.K, H.N)
    if not 0 <= i < H.K:
        raise ValidationError(f"user index {i} out of range for K={H.K}")
    M_a = H.M if M_a is None else M_a
    others = [j for j in range(H.K) if j != i]
    Hs = H.H[others]
    A = H.sigma2 * np.eye(H.M) + hermitize(
        np.einsum('knm,knp,kpq->mq', Hs.conj(), Q[others], Hs))
    R, logdet = whiten_interference(A, H.sigma2)
    G = H.H[i] @ R
    p_others = float(np.real(np.trace(Q[others], axis1=1, axis2=2).sum()))
    a = p_others / model.eta + model.circuit_power(M_a)
    return EffectiveChannel(G=G, b=H.W * logdet, a=a)
