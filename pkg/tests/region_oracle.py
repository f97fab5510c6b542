"""Brute-force evaluator of the admissible (alpha, q) region.

Written from the defining inequalities with plain Fractions and no shared
helpers, so it can serve as an independent check of ``region_membership``.
"""

from __future__ import annotations

from fractions import Fraction


def brute_force_member(alpha: Fraction, q: Fraction, beta: Fraction, gamma: Fraction,
                       p: Fraction, N: int) -> bool:
    base = max(Fraction(1), p * beta)
    # each threshold is computed only where its denominator is nonzero
    qs = None if gamma == N else p * (alpha - gamma * beta + N) / (N - gamma)
    den2 = p * (N - 1) - gamma * (p - 1)
    qss = None if den2 == 0 else p * (p * alpha + (1 - p * beta) * gamma + p * (N - 1)) / den2
    critical = p * (N - 1) / (p - 1)
    if gamma < N:
        return base < q and q < qs and q < qss
    if gamma == N:
        return base < q and q < qss and alpha > -(1 - beta) * N
    if gamma < critical:
        return base < q and qs < q and q < qss
    if gamma == critical:
        return base < q and qs < q and alpha > -(1 - beta) * gamma
    return base < q and qs < q and qss < q
