"""Weighted projective spaces as calibration fixtures.

P(a0, a1, a2, a3) with pairwise coprime weights is a Q-Fano threefold with
q = sum of weights, A = O(1), A^3 = 1 / prod(weights).  Each weight r > 1
gives a vertex of type 1/r(other weights), which is terminal exactly when
two of the other weights cancel mod r.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, prod
from typing import Sequence

from .basket import Basket, make_point
from .riemann_roch import FanoCandidate

CALIBRATION_WEIGHTS: tuple[tuple[int, ...], ...] = (
    (1, 1, 1, 1),
    (1, 1, 1, 2),
    (1, 1, 2, 3),
    (1, 2, 3, 5),
    (1, 3, 4, 5),
)

# Two further spaces that separate the weight-inversion bit, which the five
# above cannot distinguish.
EXTRA_CALIBRATION_WEIGHTS: tuple[tuple[int, ...], ...] = (
    (2, 3, 5, 7),
    (3, 4, 5, 7),
)


def monomial_count(weights: Sequence[int], n: int) -> int:
    """Number of monomials of weighted degree n."""
    if n < 0:
        return 0
    counts = [1] + [0] * n
    for w in weights:
        for k in range(w, n + 1):
            counts[k] += counts[k - w]
    return counts[n]


def vertex_point(weights: Sequence[int], idx: int):
    """Basket point of the coordinate vertex ``idx``; None if it is smooth."""
    r = weights[idx]
    if r == 1:
        return None
    others = [w % r for k, w in enumerate(weights) if k != idx]
    for x, y in combinations(range(3), 2):
        if (others[x] + others[y]) % r == 0 and others[x] != 0:
            z = next(k for k in range(3) if k not in (x, y))
            b = others[z] * pow(others[x], -1, r) % r
            return make_point(r, b)
    raise ValueError(f"vertex {idx} of P{tuple(weights)} is not a terminal quotient point")


def wps_candidate(weights: Sequence[int]) -> FanoCandidate:
    w = tuple(weights)
    if len(w) != 4:
        raise ValueError("expected four weights")
    for x, y in combinations(w, 2):
        if gcd(x, y) != 1:
            raise ValueError(f"weights {w} are not pairwise coprime")
    pts = [p for p in (vertex_point(w, k) for k in range(4)) if p is not None]
    return FanoCandidate(sum(w), Basket(tuple(pts)), Fraction(1, prod(w)), provenance=f"P{w}")
