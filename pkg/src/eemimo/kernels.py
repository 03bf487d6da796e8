"""Scalar water-level kernels.

Two implementations of each kernel live here: an explicit-loop version that
numba compiles (``*_loop``) and a vectorised numpy version (``*_numpy``).
The public names dispatch to the loop version when numba is enabled and to
the numpy version otherwise; see :mod:`eemimo._accel` for the switch.

Both kernels take the strictly positive mode gains ``d`` only; callers drop
zero modes beforehand.
"""
import math

import numpy as np

from ._accel import NUMBA_AVAILABLE, jit
from .errors import NumericError

__all__ = ['BACKEND', 'ee_parametric_value', 'ee_water_level',
           'sum_power_water_level', 'ee_level_cap']

LN2 = math.log(2.0)
_MAXITER = 400

# status codes returned by the loop kernels
_OK, _BAD_LO, _BAD_HI, _NOT_FINITE = 0, 1, 2, 3


def ee_level_cap(d, W, eta):
    """Smallest ``lam`` at which every mode is switched off."""
    return W * eta * float(np.max(d)) / LN2 if len(d) else 0.0


# --- parametric objective F(lam) ----------------------------------------

@jit
def _ee_value_loop(d, a, b, W, eta, lam):
    level = W * eta / (LN2 * lam)
    rate = 0.0
    power = 0.0
    for k in range(d.shape[0]):
        s = level - 1.0 / d[k]
        if s > 0.0:
            rate += math.log2(1.0 + s * d[k])
            power += s
    return b + W * rate - lam * (power / eta + a)


def _ee_value_numpy(d, a, b, W, eta, lam):
    s = np.maximum(W * eta / (LN2 * lam) - 1.0 / d, 0.0)
    return b + W * float(np.sum(np.log2(1.0 + s * d))) - lam * (float(np.sum(s)) / eta + a)


# --- root of F ----------------------------------------------------------

@jit
def _ee_root_loop(d, a, b, W, eta, lo, hi, rtol, maxiter):
    f_lo = _ee_value_loop(d, a, b, W, eta, lo) if lo > 0.0 else 1.0
    f_hi = _ee_value_loop(d, a, b, W, eta, hi)
    if not (f_lo == f_lo and f_hi == f_hi):
        return 0.5 * (lo + hi), _NOT_FINITE, 0
    if f_lo < 0.0:
        return lo, _BAD_LO, 0
    if f_hi > 0.0:
        return hi, _BAD_HI, 0
    it = 0
    while hi - lo > rtol * hi and it < maxiter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _ee_value_loop(d, a, b, W, eta, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi), _OK, it


def _ee_root_numpy(d, a, b, W, eta, lo, hi, rtol, maxiter):
    f_lo = _ee_value_numpy(d, a, b, W, eta, lo) if lo > 0.0 else 1.0
    f_hi = _ee_value_numpy(d, a, b, W, eta, hi)
    if not (np.isfinite(f_lo) and np.isfinite(f_hi)):
        return 0.5 * (lo + hi), _NOT_FINITE, 0
    if f_lo < 0.0:
        return lo, _BAD_LO, 0
    if f_hi > 0.0:
        return hi, _BAD_HI, 0
    it = 0
    while hi - lo > rtol * hi and it < maxiter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _ee_value_numpy(d, a, b, W, eta, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi), _OK, it


# --- sum-power water level ----------------------------------------------

@jit
def _sum_level_loop(d, P):
    n = d.shape[0]
    inv = np.sort(1.0 / d)
    acc = 0.0
    mu = 0.0
    for k in range(n):
        acc += inv[k]
        mu = (P + acc) / (k + 1)
        if k + 1 == n or mu <= inv[k + 1]:
            return mu
    return mu


def _sum_level_numpy(d, P):
    inv = np.sort(1.0 / d)
    mu = (P + np.cumsum(inv)) / np.arange(1, inv.size + 1)
    nxt = np.append(inv[1:], np.inf)
    return float(mu[np.argmax(mu <= nxt)])


if NUMBA_AVAILABLE:
    BACKEND = 'numba'
    _ee_value, _ee_root, _sum_level = _ee_value_loop, _ee_root_loop, _sum_level_loop
else:
    BACKEND = 'numpy'
    _ee_value, _ee_root, _sum_level = _ee_value_numpy, _ee_root_numpy, _sum_level_numpy


def _modes(d):
    return np.ascontiguousarray(np.asarray(d, dtype=np.float64).ravel())


def ee_parametric_value(d, a, b, W, eta, lam):
    """Value of the parametric problem at ``lam``.

    ``F(lam) = b + W sum_k log2(1 + s_k d_k) - lam (sum_k s_k / eta + a)``
    with ``s_k = [W eta / (ln2 lam) - 1/d_k]^+``. Strictly decreasing in
    ``lam``; its root is the best achievable ratio.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    return float(_ee_value(_modes(d), float(a), float(b), float(W), float(eta), float(lam)))


def ee_water_level(d, a, b, W, eta, bracket=None, rtol=1e-10, maxiter=_MAXITER):
    """Root ``lam*`` of :func:`ee_parametric_value` by bisection.

    With no ``bracket`` the search runs on ``[b/a, W eta max(d) / ln2]``:
    ``F(b/a) >= 0`` because switching every mode off attains zero there,
    and above the right end all modes are off so ``F`` is affine. If
    ``F`` is still nonnegative at the right end the root is ``b/a`` in
    closed form.

    Returns
    -------
    lam : float
    iterations : int
    """
    d = _modes(d)
    a, b, W, eta = float(a), float(b), float(W), float(eta)
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    cap = ee_level_cap(d, W, eta)
    if bracket is None:
        if d.size == 0 or b - cap * a >= 0.0:
            return b / a, 0
        lo, hi = b / a, cap
    else:
        lo, hi = (float(x) for x in bracket)
        if not 0.0 <= lo < hi:
            raise NumericError(f"invalid bracket [{lo}, {hi}]")
        if d.size == 0:
            d = np.zeros(0)
    lam, status, it = _ee_root(d, a, b, W, eta, lo, hi, float(rtol), int(maxiter))
    if status != _OK:
        what = {_BAD_LO: 'F(lo) < 0', _BAD_HI: 'F(hi) > 0',
                _NOT_FINITE: 'F not finite'}[status]
        raise NumericError(
            f"water-level bracket does not enclose a root ({what}): "
            f"lo={lo:.6e}, hi={hi:.6e}, a={a:.6e}, b={b:.6e}, "
            f"modes={d.size}, max gain={float(np.max(d)) if d.size else 0.0:.6e}")
    return float(lam), int(it)


def sum_power_water_level(d, P):
    """Level ``mu`` with ``sum_k [mu - 1/d_k]^+ = P`` (exact, by sorting)."""
    d = _modes(d)
    if d.size == 0:
        raise NumericError("no active modes to fill")
    if not P >= 0:
        raise ValueError(f"P must be nonnegative, got {P}")
    return float(_sum_level(d, float(P)))
