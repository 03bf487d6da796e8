"""Active transmit antenna selection.

Each candidate antenna set is scored by the EE of :func:`solve_constrained`
on the restricted channel; infeasible candidates score zero. When nothing is
feasible every antenna is switched on, since that maximises the sum rate.
"""
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .channel import AntennaSet, column_norm_order, restrict
from .errors import ValidationError
from .solver import solve_constrained

__all__ = ['SelectionResult', 'exhaustive_atas', 'norm_based_atas',
           'candidate_count', 'DEFAULT_EXHAUSTIVE_CAP']

DEFAULT_EXHAUSTIVE_CAP = 12


@dataclass
class SelectionResult:
    chosen: AntennaSet
    solution: object
    candidates_evaluated: int
    per_candidate: list = field(default_factory=list)

    @property
    def ee(self):
        return self.solution.ee

    @property
    def M_a(self):
        return len(self.chosen)


def candidate_count(M):
    """Number of non-empty subsets of ``M`` antennas."""
    return sum(comb(M, j) for j in range(1, M + 1))


def _score(H, T, model, delta):
    sol = solve_constrained(restrict(H, T), model, delta=delta)
    return sol, (sol.ee if sol.feasible else 0.0)


def _select(H, model, candidates, delta, keep_all):
    best_T, best_sol, best_score = None, None, 0.0
    seen = []
    n = 0
    for T in candidates:
        sol, score = _score(H, T, model, delta)
        n += 1
        if keep_all:
            seen.append((T, score))
        # strict improvement keeps the earliest (smallest, then
        # lexicographically first) set among ties
        if sol.feasible and (best_T is None or score > best_score):
            best_T, best_sol, best_score = T, sol, score
    if best_T is None:
        best_T = AntennaSet.full(H.M)
        best_sol = solve_constrained(H, model, delta=delta)
    return SelectionResult(chosen=best_T, solution=best_sol,
                           candidates_evaluated=n, per_candidate=seen)


def exhaustive_atas(H, model, delta=1e-6, max_antennas=DEFAULT_EXHAUSTIVE_CAP,
                    keep_candidates=False):
    """Best antenna set over all ``2**M - 1`` non-empty subsets.

    Subsets are visited by size and then lexicographically, so ties go to
    fewer antennas and then to the lexicographically first set.
    """
    if H.M > max_antennas:
        raise ValidationError(
            f"exhaustive selection over M={H.M} antennas needs "
            f"{candidate_count(H.M)} solves (cap M={max_antennas}); "
            f"use norm_based_atas instead")
    cands = (AntennaSet(c) for j in range(1, H.M + 1)
             for c in combinations(range(1, H.M + 1), j))
    return _select(H, model, cands, delta, keep_candidates)


def norm_based_atas(H, model, delta=1e-6, keep_candidates=False):
    """Nested candidates from the strongest columns: for ``M_a = 1..M`` try
    the ``M_a`` antennas with the largest stacked-channel column norms."""
    order = column_norm_order(H)
    cands = (AntennaSet(sorted(order[:m])) for m in range(1, H.M + 1))
    return _select(H, model, cands, delta, keep_candidates)
