"""Density-evolution recursion and minimum-redundancy thresholds.

The recursion p_i = (1 - exp(-p_{i-1} / eta))^(C-1) tracks the expected
fraction of unresolved edges per peeling round at redundancy eta = B/K
with C groups; the minimum workable eta for each C is found by bisecting
on convergence of the recursion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .kernels import njit


@dataclass(frozen=True)
class DeTrace:
    c_groups: int
    eta: float
    probs: tuple
    converged: bool


def density_evolution(c_groups: int, eta: float, max_iters: int = 10_000, tol: float = 1e-12) -> DeTrace:
    """Iterate the recursion from p_0 = 1, recording the trajectory."""
    if c_groups < 2:
        raise ValueError("need at least two groups")
    if eta <= 0:
        raise ValueError("eta must be positive")
    probs = [1.0]
    p = 1.0
    for _ in range(max_iters):
        p = (1.0 - math.exp(-p / eta)) ** (c_groups - 1)
        probs.append(p)
        if p < tol:
            break
    return DeTrace(c_groups, eta, tuple(probs), p < tol)


@njit(cache=True)
def _converges(c_minus_1: int, eta: float, max_iters: int, tol: float) -> bool:  # pragma: no cover
    p = 1.0
    for _ in range(max_iters):
        p = (1.0 - math.exp(-p / eta)) ** c_minus_1
        if p < tol:
            return True
    return False


def min_eta(c_groups: int, bisection_tol: float = 1e-4, max_iters: int = 1_000_000, tol: float = 1e-12) -> float:
    """Threshold redundancy below which the recursion stalls.

    Convergence slows critically near the threshold (for C = 2 the tail
    contracts only geometrically at rate eta^-1), so the iteration budget
    here is much larger than a casual deep run of
    :func:`density_evolution` needs.
    """
    if c_groups < 2:
        raise ValueError("need at least two groups")
    lo, hi = 0.05, 2.5
    if not _converges(c_groups - 1, hi, max_iters, tol):
        raise RuntimeError("upper bracket does not converge")
    while hi - lo > bisection_tol:
        mid = 0.5 * (lo + hi)
        if _converges(c_groups - 1, mid, max_iters, tol):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def de_table(c_values=(2, 3, 4, 5, 6), bisection_tol: float = 1e-4):
    """Rows (C, eta_min, C * eta_min) for the redundancy table."""
    rows = []
    for c in c_values:
        eta = min_eta(c, bisection_tol=bisection_tol)
        rows.append((c, eta, c * eta))
    return rows
