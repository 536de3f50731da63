"""Orbifold Riemann-Roch for torsion-free polarized Fano candidates.

For a candidate (q, basket, A^3) with -K = qA,

    chi(nA) = 1 + n(n+q)(2n+q) A^3 / 12 + n (24 - sigma) / (12 q) + sum_P c_P(nA)

where c_P depends only on the local class of nA at P.  The local class is
measured by ``i = SIGN * n * q^-1 (mod r)`` and the periodic sum runs over
multiples of ``b`` (``WEIGHT_INVERTED`` False) rather than ``b^-1``.  Both
bits were fixed against weighted projective spaces; see ``wps.py`` and
``tests/test_calibration.py``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Optional

from .basket import Basket, BasketError, QuotientPoint, anticanonical_c2, sigma

# Calibrated convention bits.
LOCAL_CLASS_SIGN = -1
WEIGHT_INVERTED = False

DEFAULT_HORIZON = 24


class CandidateInvalid(ValueError):
    """chi(nA) is non-integral or negative where it must be an h0."""


@dataclass(frozen=True, order=True)
class FanoCandidate:
    q: int
    basket: Basket
    a3: Fraction
    provenance: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a3", Fraction(self.a3))
        if not isinstance(self.basket, Basket):
            object.__setattr__(self, "basket", Basket(tuple(self.basket)))
        if self.q < 1:
            raise ValueError("Fano index must be positive")
        if self.a3 <= 0:
            raise ValueError("A^3 must be positive")
        for p in self.basket:
            if gcd(p.r, self.q) != 1:
                raise ValueError(f"index {p.r} shares a factor with q={self.q}")

    @property
    def sigma(self) -> Fraction:
        return sigma(self.basket)

    @property
    def kc2(self) -> Fraction:
        return anticanonical_c2(self.basket)

    @property
    def period(self) -> int:
        return lcm(1, *self.basket.indices)

    @property
    def key(self) -> tuple:
        return (self.q, self.basket, self.a3)


@dataclass(frozen=True)
class HilbertProfile:
    candidate: FanoCandidate
    h0: tuple[int, ...]
    df: int

    def __post_init__(self) -> None:
        if not self.h0 or self.h0[0] != 1:
            raise ValueError("h0 table must start with 1")


def local_class_of_A(q: int, point: QuotientPoint) -> int:
    """Residue t with A ~ t(-K) in the local class group at ``point``."""
    if gcd(q, point.r) != 1:
        raise ValueError(f"q={q} is not coprime to index {point.r}")
    return pow(q, -1, point.r)


def local_index(q: int, point: QuotientPoint, n: int) -> int:
    """Multiple i in [0, r) with nA ~ i K near ``point`` under the calibrated sign."""
    return (LOCAL_CLASS_SIGN * n * local_class_of_A(q, point)) % point.r


@lru_cache(maxsize=None)
def _contribution_table(r: int, b: int) -> tuple[Fraction, ...]:
    w = pow(b, -1, r) if WEIGHT_INVERTED else b
    out = []
    for i in range(r):
        s = Fraction(-i * (r * r - 1), 12 * r)
        for j in range(1, i):
            x = (j * w) % r
            s += Fraction(x * (r - x), 2 * r)
        out.append(s)
    return tuple(out)


def contribution_table(r: int, b: int) -> tuple[Fraction, ...]:
    """c(i) for i = 0..r-1 at a point 1/r(1,-1,b); ``b`` need not be canonical."""
    if r < 2 or gcd(r, b) != 1:
        raise ValueError(f"{b} is not a unit mod {r}")
    return _contribution_table(r, b % r)


def contribution_at_index(point: QuotientPoint, i: int) -> Fraction:
    return _contribution_table(point.r, point.b)[i % point.r]


def point_contribution(point: QuotientPoint, q: int, n: int) -> Fraction:
    """Periodic correction c_P(nA); period r in n, zero when r | n."""
    return contribution_at_index(point, local_index(q, point, n))


def _raw_chi(q: int, basket: Basket, kc2: Fraction, a3: Fraction, n: int) -> Fraction:
    val = 1 + Fraction(n * (n + q) * (2 * n + q), 12) * a3 + Fraction(n, 12 * q) * kc2
    for p in basket:
        val += point_contribution(p, q, n)
    return val


def euler_char(candidate: FanoCandidate, n: int) -> Fraction:
    return _raw_chi(candidate.q, candidate.basket, candidate.kc2, candidate.a3, n)


def integrality_valid(candidate: FanoCandidate, horizon: int = DEFAULT_HORIZON) -> bool:
    """chi(nA) integral for every n and nonnegative for 0 <= n <= horizon.

    chi(n + R) - chi(n) with R the lcm of the indices is a quadratic polynomial
    in n (the periodic parts cancel), so integrality on [0, R) together with
    integrality of that difference at three points covers all n.
    """
    q, B, a3 = candidate.q, candidate.basket, candidate.a3
    try:
        kc2 = anticanonical_c2(B)
    except BasketError:
        return False
    R = lcm(1, *B.indices)
    for n in range(max(R, horizon + 1)):
        v = _raw_chi(q, B, kc2, a3, n)
        if v.denominator != 1 or v < 0:
            return False
    for n in range(3):
        d = _raw_chi(q, B, kc2, a3, n + R) - _raw_chi(q, B, kc2, a3, n)
        if d.denominator != 1:
            return False
    return True


def vanishing_valid(candidate: FanoCandidate) -> bool:
    """chi(-tA) = 0 for 0 < t < q, as Kawamata-Viehweg vanishing demands."""
    return all(euler_char(candidate, -t) == 0 for t in range(1, candidate.q))


def bogomolov_valid(candidate: FanoCandidate) -> bool:
    """Bogomolov-type bound (4q^2 - 3q) A^3 <= 4 (-K).c2."""
    q = candidate.q
    return (4 * q * q - 3 * q) * candidate.a3 <= 4 * candidate.kc2


def h0(candidate: FanoCandidate, n: int) -> int:
    if n < 0:
        return 0
    v = euler_char(candidate, n)
    if v.denominator != 1 or v < 0:
        raise CandidateInvalid(f"chi({n}A) = {v} for {describe(candidate)}")
    return int(v)


def df_from_table(q: int, table: tuple[int, ...]) -> int:
    return max(table[k] - 1 for k in range(q))


def hilbert_profile(candidate: FanoCandidate, horizon: int = DEFAULT_HORIZON) -> HilbertProfile:
    """h0(nA) for n = 0..max(horizon, q-1) and the df invariant."""
    top = max(horizon, candidate.q - 1)
    table = tuple(h0(candidate, n) for n in range(top + 1))
    return HilbertProfile(candidate, table, df_from_table(candidate.q, table))


def lambda_of(candidate: FanoCandidate | int, k: int) -> Fraction:
    if k < 1:
        raise ValueError("k must be positive")
    q = candidate if isinstance(candidate, int) else candidate.q
    return Fraction(q, k)


def series_agree(a: FanoCandidate, b: FanoCandidate) -> bool:
    """True iff the two Hilbert series coincide.

    h0(nA) is a cubic polynomial plus an R-periodic term; if two such
    functions agree on 4 consecutive periods of the joint lcm they agree
    everywhere.
    """
    if a.q != b.q or a.a3 != b.a3:
        return False
    R = lcm(a.period, b.period)
    return all(euler_char(a, n) == euler_char(b, n) for n in range(4 * R))


def describe(candidate: FanoCandidate) -> str:
    pts = ",".join(f"({p.r},{p.b})" for p in candidate.basket)
    return f"q={candidate.q} B=[{pts}] A^3={candidate.a3}"


def candidate(q: int, pairs, a3, provenance: str = "") -> FanoCandidate:
    """Shorthand: ``candidate(7, [(2,1),(3,1),(13,6)], Fraction(1,78))``."""
    return FanoCandidate(q, Basket.of(*pairs), Fraction(a3), provenance)


def optional_int(x: Optional[int]) -> Optional[int]:
    return None if x is None else int(x)
