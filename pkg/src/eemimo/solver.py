"""Transmit-covariance optimisation for a fixed active antenna set.

All optimisation happens in the dual MAC: user ``i`` transmits with an
``N x N`` covariance ``Q_i`` over ``H_i^H``. Sum power and sum rate equal
those of the broadcast channel, so an energy-efficiency optimum found here
is an optimum of the downlink problem as well.

Routines
--------
waterfill_ee_user
    Best single-user covariance for the ratio
    ``(b + W log2|I + G^H Q G|) / (Tr(Q)/eta + a)``.
ee_iterative_waterfilling
    Unconstrained EE maximisation by cycling the above over users.
se_iterative_waterfilling
    Sum-rate maximisation under a sum-power budget.
min_power_for_rate
    Smallest sum power that reaches a target sum rate.
solve_constrained
    Combines the three under ``p_max`` and ``c_min``.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from .capacity import mac_aggregate, whiten_interference
from .errors import ConvergenceWarning, ValidationError
from .kernels import ee_water_level, sum_power_water_level
from .numerics import hermitian_eig, hermitize, logdet_psd, numerical_rank
from .power import energy_efficiency

__all__ = ['BRANCHES', 'WaterfillResult', 'EESolution', 'RateMaxResult',
           'MinPowerResult', 'waterfill_ee_user', 'ee_iterative_waterfilling',
           'se_iterative_waterfilling', 'min_power_for_rate',
           'solve_constrained', 'rate_max_solution', 'kkt_residuals']

LN2 = math.log(2.0)

P1_INTERIOR = 'P1-interior'
P2_POWER_CAPPED = 'P2-power-capped'
P3_RATE_PINNED = 'P3-rate-pinned'
INFEASIBLE = 'infeasible-fallback'
BRANCHES = (P1_INTERIOR, P2_POWER_CAPPED, P3_RATE_PINNED, INFEASIBLE)


@dataclass
class WaterfillResult:
    """Energy-efficient water-filling for one user.

    ``U`` diagonalises ``G G^H = U diag(D) U^H`` with ``D`` descending;
    ``S_diag`` holds the power on each eigenmode and ``Q = U diag(S) U^H``.
    ``lambda_star`` is the optimal ratio, i.e. the water-level parameter.
    """
    S_diag: np.ndarray
    D: np.ndarray
    U: np.ndarray
    lambda_star: float
    Q: np.ndarray
    bisection_steps: int = 0


@dataclass
class EESolution:
    Q: np.ndarray
    sum_rate: float
    sum_power: float
    ee: float
    trace: list
    branch: str
    feasible: bool
    M_a: int
    iterations: int = 0
    converged: bool = True
    p_star: float = float('nan')
    p_bar: float = float('nan')

    def to_dict(self):
        return {
            'Q': [[[[float(z.real), float(z.imag)] for z in row] for row in Qi]
                  for Qi in self.Q],
            'sum_rate': self.sum_rate,
            'sum_power': self.sum_power,
            'ee': self.ee,
            'trace': [float(x) for x in self.trace],
            'branch': self.branch,
            'feasible': self.feasible,
            'active_antennas': self.M_a,
            'iterations': self.iterations,
            'converged': self.converged,
            'p_star': None if math.isnan(self.p_star) else self.p_star,
            'p_bar': None if math.isnan(self.p_bar) else self.p_bar,
        }


@dataclass
class RateMaxResult:
    Q: np.ndarray
    sum_rate: float
    sum_power: float
    iterations: int
    converged: bool
    gap: float
    rates: list = field(default_factory=list)


@dataclass
class MinPowerResult:
    """``unbounded`` is set when the target rate could not be reached below
    the search cap; ``sum_power`` is then ``inf``."""
    Q: np.ndarray
    sum_power: float
    sum_rate: float
    unbounded: bool
    iterations: int


# --- helpers ---------------------------------------------------------------

def _contributions(H, Q):
    # C[i] = H_i^H Q_i H_i
    return hermitize(np.einsum('knm,knp,kpq->kmq', H.H.conj(), Q, H.H))


def _interference(H, C, i):
    mask = np.ones(H.K, dtype=bool)
    mask[i] = False
    return H.sigma2 * np.eye(H.M) + C[mask].sum(axis=0)


def _sum_rate_from_aggregate(H, A):
    return float(H.W * logdet_psd(np.eye(H.M) + A / H.sigma2))


def _powers(Q):
    return np.real(np.trace(Q, axis1=1, axis2=2))


def _modes_of(G):
    D, U = hermitian_eig(hermitize(G @ G.conj().T))
    L = numerical_rank(D)
    D = D.copy()
    D[L:] = 0.0
    return D, U, L


# --- single-user energy-efficient water-filling ------------------------------

def waterfill_ee_user(G, a, b, model, W, rtol=1e-10, bracket=None):
    """Maximise ``(b + W log2|I + G^H Q G|) / (Tr(Q)/eta + a)`` over PSD ``Q``.

    ``G`` is ``N x M``; the returned ``Q`` is ``N x N``. The optimum puts
    ``[W eta / (ln2 lam*) - 1/D_k]^+`` on eigenmode ``k`` of ``G G^H``, where
    ``lam*`` is the root of the parametric objective. With no usable mode
    the answer is ``Q = 0`` and ``lam* = b / a``.
    """
    if not a > 0:
        raise ValidationError(f"a must be positive, got {a}")
    if not b >= 0:
        raise ValidationError(f"b must be nonnegative, got {b}")
    G = np.asarray(G, dtype=complex)
    D, U, L = _modes_of(G)
    lam, steps = ee_water_level(D[:L], a, b, W, model.eta, bracket=bracket, rtol=rtol)
    S = np.zeros_like(D)
    if L and lam > 0:
        S[:L] = np.maximum(W * model.eta / (LN2 * lam) - 1.0 / D[:L], 0.0)
    Q = hermitize((U * S) @ U.conj().T)
    return WaterfillResult(S_diag=S, D=D, U=U, lambda_star=float(lam), Q=Q,
                           bisection_steps=steps)


# --- P1: unconstrained EE --------------------------------------------------

def ee_iterative_waterfilling(H, model, delta=1e-6, max_iter=1000, Q0=None,
                              q_tol=None, M_a=None):
    """Energy-efficient iterative water-filling.

    Each outer pass updates users ``1..K`` in turn with
    :func:`waterfill_ee_user`, holding the others fixed, and records the EE
    after the pass. Iteration stops once the EE gain of a pass is at most
    ``delta`` times the current EE. If ``q_tol`` is given, the largest
    per-user covariance change (relative to the largest covariance norm)
    must also fall below it.

    Parameters
    ----------
    H : UserChannels
    model : PowerModel
    delta : float
        Relative EE tolerance.
    max_iter : int
        Outer-pass cap; reaching it emits :class:`ConvergenceWarning`.
    Q0 : array_like, optional
        Starting covariances, shape ``(K, N, N)``; zero by default.
    M_a : int, optional
        Active antenna count for the power model, default ``H.M``.

    Returns
    -------
    EESolution
        ``branch`` is ``'P1-interior'``; ``feasible`` reports whether the
        unconstrained optimum happens to respect ``p_max`` and ``c_min``.
    """
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    M_a = H.M if M_a is None else int(M_a)
    circuit = model.circuit_power(M_a)
    if Q0 is None:
        Q = np.zeros((H.K, H.N, H.N), dtype=complex)
    else:
        Q = hermitize(np.array(Q0, dtype=complex))
        if Q.shape != (H.K, H.N, H.N):
            raise ValidationError(f"Q0 must have shape {(H.K, H.N, H.N)}")
    C = _contributions(H, Q)
    p = _powers(Q)
    xi_prev = energy_efficiency(_sum_rate_from_aggregate(H, C.sum(0)),
                                max(float(p.sum()), 0.0), M_a, model)
    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        dq = 0.0
        for i in range(H.K):
            R, logdet = whiten_interference(_interference(H, C, i), H.sigma2)
            a = (float(p.sum()) - p[i]) / model.eta + circuit
            wf = waterfill_ee_user(H.H[i] @ R, max(a, circuit), H.W * logdet,
                                   model, H.W)
            dq = max(dq, float(np.linalg.norm(wf.Q - Q[i])))
            Q[i] = wf.Q
            p[i] = float(np.sum(wf.S_diag))
            C[i] = hermitize(H.H[i].conj().T @ wf.Q @ H.H[i])
        rate = _sum_rate_from_aggregate(H, C.sum(0))
        xi = energy_efficiency(rate, float(p.sum()), M_a, model)
        trace.append(xi)
        ok = xi - xi_prev <= delta * xi
        if q_tol is not None:
            scale = max(float(np.max(np.linalg.norm(Q, axis=(1, 2)))), 1e-300)
            ok = ok and dq <= q_tol * scale
        xi_prev = xi
        if ok:
            converged = True
            break
    if not converged:
        warnings.warn(f"energy-efficient water-filling stopped at the "
                      f"{max_iter}-pass cap before reaching delta={delta}",
                      ConvergenceWarning, stacklevel=2)
    P = float(p.sum())
    feasible = P <= model.p_max * (1 + 1e-9) and rate >= model.c_min
    return EESolution(Q=Q, sum_rate=rate, sum_power=P, ee=trace[-1], trace=trace,
                      branch=P1_INTERIOR, feasible=feasible, M_a=M_a,
                      iterations=it, converged=converged, p_star=P)


def kkt_residuals(H, Q, model, M_a=None):
    """Per-user optimality residuals of an unconstrained EE solution.

    For every user the other covariances are frozen and ``Q_i`` is checked
    against the water-filling conditions at ``lam = EE(Q)``: on active modes
    the marginal ratio ``W eta D_k / (ln2 (1 + S_k D_k))`` must equal
    ``lam``; on idle modes ``W eta D_k / ln2`` must not exceed it.

    Returns
    -------
    dict
        ``stationarity``: largest relative mismatch on active modes,
        ``slackness``: largest relative excess on idle modes (<= 0 is fine),
        ``offdiag``: largest relative off-diagonal mass of ``U^H Q_i U``,
        ``ee``: the ``lam`` used.
    """
    M_a = H.M if M_a is None else M_a
    Q = np.asarray(Q, dtype=complex)
    C = _contributions(H, Q)
    rate = _sum_rate_from_aggregate(H, C.sum(0))
    lam = energy_efficiency(rate, float(_powers(Q).sum()), M_a, model)
    stat, slack, offd = 0.0, -np.inf, 0.0
    for i in range(H.K):
        R, _ = whiten_interference(_interference(H, C, i), H.sigma2)
        D, U, L = _modes_of(H.H[i] @ R)
        S_full = U.conj().T @ Q[i] @ U
        S = np.real(np.diag(S_full))
        scale = max(float(np.max(np.abs(S))), 1e-300)
        offd = max(offd, float(np.max(np.abs(S_full - np.diag(np.diag(S_full))))) / scale)
        # modes carrying a non-negligible share of the user's power
        active = (np.arange(D.size) < L) & (S > 1e-9 * scale)
        marginal = H.W * model.eta * D / (LN2 * (1.0 + S * D))
        if np.any(active):
            stat = max(stat, float(np.max(np.abs(marginal[active] - lam))) / lam)
        idle = ~active
        if np.any(idle) and lam > 0:
            slack = max(slack, float(np.max(marginal[idle] - lam)) / lam)
    return {'stationarity': stat, 'slackness': float(slack), 'offdiag': offd,
            'ee': lam}


# --- P2: sum-rate maximisation under a sum-power budget --------------------

def _rate_gap(H, Q, C, P_budget):
    """Rate, and an upper bound on the rate shortfall from optimum.

    By concavity ``f* <= f(Q) + <grad, Q' - Q>`` for the best feasible
    ``Q'``, and that linear maximum puts all of ``P_budget`` on the largest
    eigenvalue among the per-user gradients.
    """
    A = H.sigma2 * np.eye(H.M) + C.sum(0)
    rate = float(H.W * logdet_psd(A / H.sigma2))
    Ainv = np.linalg.inv(A)
    grads = hermitize(np.einsum('knm,mp,kqp->knq', H.H, Ainv, H.H.conj()))
    top = max(float(np.linalg.eigvalsh(g)[-1]) for g in grads)
    used = float(np.real(np.einsum('kij,kji->', grads, Q)))
    gap = H.W / LN2 * max(P_budget * top - used, 0.0)
    return rate, gap


def _segment_step(H, C, C_new, lo):
    """Weight in ``[lo, 1]`` maximising the rate on the segment between two
    covariance sets (the rate is concave along it)."""
    A0, A1 = C.sum(0) / H.sigma2, C_new.sum(0) / H.sigma2
    I = np.eye(H.M)

    def neg_rate(t):
        return -np.linalg.slogdet(I + A0 + t * (A1 - A0))[1]

    res = minimize_scalar(neg_rate, bounds=(lo, 1.0), method='bounded',
                          options={'xatol': 1e-7})
    t = float(res.x)
    # never do worse than the plain averaging step
    return t if neg_rate(t) <= neg_rate(lo) else lo


def se_iterative_waterfilling(H, P_budget, tol=1e-9, max_iter=5000, Q0=None,
                              step='line-search'):
    """Maximise the MAC sum rate subject to ``sum_i Tr(Q_i) = P_budget``.

    Every round computes each user's effective channel against the current
    covariances and water-fills all users' eigenmodes with one common level
    so the new set ``Q_new`` spends exactly ``P_budget``. With
    ``step='average'`` the iterate moves to ``Q_new / K + (1 - 1/K) Q``;
    the default ``'line-search'`` instead takes the best point of the
    segment from weight ``1/K`` to ``1``, which is never worse and far
    faster for many users. The first round (without ``Q0``) takes ``Q_new``
    in full. Iteration stops when the concavity bound on the remaining rate
    gain drops below ``tol`` times the rate.
    """
    if not P_budget > 0:
        raise ValidationError(f"power budget must be positive, got {P_budget}")
    if step not in ('line-search', 'average'):
        raise ValidationError(f"unknown step rule {step!r}")
    K = H.K
    if Q0 is None:
        Q = np.zeros((K, H.N, H.N), dtype=complex)
        fresh = True
    else:
        Q = hermitize(np.array(Q0, dtype=complex))
        tr = float(_powers(Q).sum())
        if tr > 0:
            Q *= P_budget / tr
            fresh = False
        else:
            fresh = True
    C = _contributions(H, Q)
    rates = []
    gap = np.inf
    converged = False
    it = 0
    for it in range(max_iter + 1):
        if not fresh:
            rate, gap = _rate_gap(H, Q, C, P_budget)
            rates.append(rate)
            if gap <= tol * rate:
                converged = True
                break
            if it == max_iter:
                break
        modes = []
        for i in range(K):
            R, _ = whiten_interference(_interference(H, C, i), H.sigma2)
            modes.append(_modes_of(H.H[i] @ R))
        gains = np.concatenate([D[:L] for D, _, L in modes])
        if gains.size == 0:
            # no usable direction: every allocation gives zero rate
            Q = np.zeros_like(Q)
            Q[0] = np.eye(H.N) * (P_budget / H.N)
            C = _contributions(H, Q)
            converged = True
            rates.append(0.0)
            gap = 0.0
            break
        mu = sum_power_water_level(gains, P_budget)
        Q_new = np.empty_like(Q)
        for i, (D, U, L) in enumerate(modes):
            S = np.zeros_like(D)
            S[:L] = np.maximum(mu - 1.0 / D[:L], 0.0)
            Q_new[i] = hermitize((U * S) @ U.conj().T)
        # rescale away rounding so the budget is met exactly
        Q_new *= P_budget / float(_powers(Q_new).sum())
        if fresh:
            Q = Q_new
            fresh = False
        elif step == 'average':
            Q = Q_new / K + (1.0 - 1.0 / K) * Q
        else:
            t = _segment_step(H, C, _contributions(H, Q_new), 1.0 / K)
            Q = t * Q_new + (1.0 - t) * Q
        C = _contributions(H, Q)
    if not converged:
        warnings.warn(f"sum-rate water-filling hit the {max_iter}-round cap "
                      f"(relative gap {gap / max(rates[-1], 1e-300):.2e})",
                      ConvergenceWarning, stacklevel=2)
    rate = rates[-1]
    return RateMaxResult(Q=Q, sum_rate=rate, sum_power=float(_powers(Q).sum()),
                         iterations=it, converged=converged, gap=gap, rates=rates)


# --- P3: minimum power for a sum-rate target -------------------------------

def min_power_for_rate(H, C_min, tol=1e-8, p_start=1.0, bracket=None,
                       se_tol=1e-11, max_doublings=20):
    """Smallest sum power whose rate-maximising covariances reach ``C_min``.

    ``f(P)``, the best sum rate at power ``P``, is nondecreasing and concave,
    so ``f(P) = C_min`` is solved by bisection on ``P`` with
    :func:`se_iterative_waterfilling` evaluating ``f``. Without a
    ``bracket`` the upper end starts at ``p_start`` and doubles until the
    target is met or ``2**max_doublings * p_start`` is exceeded, in which
    case the result is flagged ``unbounded``.

    The returned covariances come from the upper end of the final bracket,
    so their rate is never below ``C_min`` (up to ``se_tol``) and at most
    ``C_min (1 + tol)``.
    """
    if not C_min >= 0:
        raise ValidationError(f"C_min must be nonnegative, got {C_min}")
    zeros = np.zeros((H.K, H.N, H.N), dtype=complex)
    if C_min == 0:
        return MinPowerResult(Q=zeros, sum_power=0.0, sum_rate=0.0,
                              unbounded=False, iterations=0)
    evals = 0
    if bracket is None:
        lo, hi = 0.0, float(p_start)
        best = se_iterative_waterfilling(H, hi, tol=se_tol)
        evals += 1
        doublings = 0
        while best.sum_rate < C_min:
            if doublings >= max_doublings:
                return MinPowerResult(Q=best.Q, sum_power=math.inf,
                                      sum_rate=best.sum_rate, unbounded=True,
                                      iterations=evals)
            lo, hi = hi, 2.0 * hi
            best = se_iterative_waterfilling(H, hi, tol=se_tol, Q0=best.Q)
            evals += 1
            doublings += 1
    else:
        lo, hi = (float(x) for x in bracket)
        best = se_iterative_waterfilling(H, hi, tol=se_tol)
        evals += 1
        if best.sum_rate < C_min:
            return MinPowerResult(Q=best.Q, sum_power=math.inf,
                                  sum_rate=best.sum_rate, unbounded=True,
                                  iterations=evals)
    warm = best.Q
    while best.sum_rate > C_min * (1.0 + tol) and hi - lo > 1e-15 * hi:
        mid = 0.5 * (lo + hi)
        trial = se_iterative_waterfilling(H, mid, tol=se_tol, Q0=warm)
        evals += 1
        warm = trial.Q
        if trial.sum_rate >= C_min:
            hi, best = mid, trial
        else:
            lo = mid
    return MinPowerResult(Q=best.Q, sum_power=best.sum_power,
                          sum_rate=best.sum_rate, unbounded=False,
                          iterations=evals)


# --- constrained problem ---------------------------------------------------

def rate_max_solution(H, model, M_a=None, tol=1e-9):
    """Spend the whole budget ``p_max`` to maximise sum rate (the SE
    baseline), packaged as an :class:`EESolution`."""
    M_a = H.M if M_a is None else M_a
    p2 = se_iterative_waterfilling(H, model.p_max, tol=tol)
    ee = energy_efficiency(p2.sum_rate, p2.sum_power, M_a, model)
    feasible = p2.sum_rate >= model.c_min
    return EESolution(Q=p2.Q, sum_rate=p2.sum_rate, sum_power=p2.sum_power,
                      ee=ee, trace=[], branch=P2_POWER_CAPPED if feasible else INFEASIBLE,
                      feasible=feasible, M_a=M_a, iterations=p2.iterations,
                      converged=p2.converged)


def solve_constrained(H, model, delta=1e-6, M_a=None, se_tol=1e-9, p3_tol=1e-8):
    """EE-optimal covariances under ``sum Tr(Q_i) <= p_max`` and
    ``rate >= c_min``.

    With ``P*`` the unconstrained optimum power and ``P_bar`` the least power
    meeting ``c_min``, the answer is the unconstrained optimum when
    ``P_bar <= P* <= p_max``, the full-budget rate maximiser when
    ``P* >= p_max >= P_bar``, the minimum-power solution when
    ``P* <= P_bar <= p_max``, and otherwise (``P_bar > p_max``) the
    full-budget rate maximiser flagged infeasible.

    ``P_bar`` is only computed when the choice depends on it: if the
    unconstrained optimum already meets ``c_min`` then ``P_bar <= P*``, and
    ``P_bar <= p_max`` is the same statement as ``f(p_max) >= c_min``.
    """
    M_a = H.M if M_a is None else M_a
    C_min = model.c_min
    p1 = ee_iterative_waterfilling(H, model, delta=delta, M_a=M_a)
    p_star = p1.sum_power
    if p_star <= model.p_max and p1.sum_rate >= C_min:
        p1.feasible = True
        if C_min == 0:
            p1.p_bar = 0.0
        return p1

    def _pack(Q, rate, power, branch, feasible, p_bar, iterations):
        return EESolution(Q=Q, sum_rate=rate, sum_power=power,
                          ee=energy_efficiency(rate, power, M_a, model),
                          trace=p1.trace, branch=branch, feasible=feasible,
                          M_a=M_a, iterations=iterations, converged=p1.converged,
                          p_star=p_star, p_bar=p_bar)

    p2 = se_iterative_waterfilling(H, model.p_max, tol=se_tol)
    if p2.sum_rate < C_min:
        return _pack(p2.Q, p2.sum_rate, p2.sum_power, INFEASIBLE, False,
                     math.inf, p1.iterations)
    if p_star >= model.p_max:
        p_bar = 0.0 if C_min == 0 else float('nan')
        return _pack(p2.Q, p2.sum_rate, p2.sum_power, P2_POWER_CAPPED, True,
                     p_bar, p1.iterations)
    p3 = min_power_for_rate(H, C_min, tol=p3_tol, bracket=(p_star, model.p_max),
                            se_tol=min(se_tol, 1e-11))
    return _pack(p3.Q, p3.sum_rate, p3.sum_power, P3_RATE_PINNED, True,
                 p3.sum_power, p1.iterations)
