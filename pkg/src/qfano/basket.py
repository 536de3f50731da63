"""Baskets of terminal cyclic quotient singularities.

A point of type 1/r(1, -1, b) is stored as ``QuotientPoint(r, b)`` with the
canonical weight ``b = min(b, r - b)``.  A basket is a sorted tuple of points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Optional, Sequence

MAX_INDEX = 24
SIGMA_BOUND = Fraction(24)


class BasketError(ValueError):
    """Raised for malformed points or baskets violating the global bound."""


@dataclass(frozen=True, order=True)
class QuotientPoint:
    r: int
    b: int

    def __post_init__(self) -> None:
        if self.r < 2:
            raise BasketError(f"index must be at least 2, got {self.r}")
        if not 1 <= self.b <= self.r - 1:
            raise BasketError(f"weight {self.b} out of range for index {self.r}")
        if gcd(self.r, self.b) != 1:
            raise BasketError(f"weight {self.b} is not a unit mod {self.r}")
        if self.b > self.r - self.b:
            raise BasketError(f"point ({self.r},{self.b}) is not canonical; use make_point")

    @property
    def sigma(self) -> Fraction:
        return Fraction(self.r * self.r - 1, self.r)

    def __str__(self) -> str:
        return f"1/{self.r}(1,{self.r - 1},{self.b})"


def make_point(r: int, b: int) -> QuotientPoint:
    """Build a point, replacing ``b`` by the smaller of ``b`` and ``r - b``."""
    if r < 2:
        raise BasketError(f"index must be at least 2, got {r}")
    if not 1 <= b <= r - 1:
        raise BasketError(f"weight {b} out of range for index {r}")
    if gcd(r, b) != 1:
        raise BasketError(f"gcd({r}, {b}) = {gcd(r, b)}; weight must be a unit")
    return QuotientPoint(r, min(b, r - b))


@dataclass(frozen=True, order=True)
class Basket:
    points: tuple[QuotientPoint, ...] = ()

    def __post_init__(self) -> None:
        pts = tuple(sorted(self.points))
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, *pairs: tuple[int, int]) -> "Basket":
        return cls(tuple(make_point(r, b) for r, b in pairs))

    @property
    def sigma(self) -> Fraction:
        return sigma(self)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(p.r for p in self.points)

    def multiplicity(self, r: int) -> int:
        return sum(1 for p in self.points if p.r == r)

    def __add__(self, other: "Basket") -> "Basket":
        return Basket(self.points + other.points)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[QuotientPoint]:
        return iter(self.points)

    def __str__(self) -> str:
        return "(" + ",".join(str(p.r) for p in self.points) + ")"


def sigma(basket: Basket | Iterable[QuotientPoint]) -> Fraction:
    pts = basket.points if isinstance(basket, Basket) else tuple(basket)
    return sum((p.sigma for p in pts), Fraction(0))


def anticanonical_c2(basket: Basket, strict: bool = True) -> Fraction:
    """Return ``24 - sigma``, the value of (-K).c2 forced by chi(O) = 1.

    With ``strict`` the basket must have sigma < 24; otherwise sigma <= 24
    is tolerated (useful only for diff experiments).
    """
    s = sigma(basket)
    if s > SIGMA_BOUND or (strict and s == SIGMA_BOUND):
        raise BasketError(f"sigma = {s} violates the bound sigma {'<' if strict else '<='} 24")
    return SIGMA_BOUND - s


def canonical_points(coprime_to: Optional[int] = None, max_index: int = MAX_INDEX) -> list[QuotientPoint]:
    """All canonical point types with r <= max_index, sorted by (r, b)."""
    out = []
    for r in range(2, max_index + 1):
        if coprime_to is not None and gcd(r, coprime_to) != 1:
            continue
        for b in range(1, r // 2 + 1):
            if gcd(r, b) == 1:
                out.append(QuotientPoint(r, b))
    return out


def iter_baskets(
    max_sigma: Fraction | int = SIGMA_BOUND,
    coprime_to: Optional[int] = None,
    points: Optional[Sequence[QuotientPoint]] = None,
    strict: bool = True,
) -> Iterator[Basket]:
    """Yield every basket with sigma < max_sigma (or <= if not strict).

    Output is in depth-first order of non-decreasing point lists, which
    coincides with lexicographic order on the sorted point tuples.
    """
    max_sigma = Fraction(max_sigma)
    if max_sigma > SIGMA_BOUND:
        raise BasketError("max_sigma must not exceed 24")
    pts = sorted(set(points)) if points is not None else canonical_points(coprime_to)
    if points is not None and coprime_to is not None:
        pts = [p for p in pts if gcd(p.r, coprime_to) == 1]
    weights = [p.sigma for p in pts]

    def fits(total: Fraction) -> bool:
        return total < max_sigma if strict else total <= max_sigma

    if not fits(Fraction(0)):
        return

    def rec(start: int, total: Fraction, cur: list[QuotientPoint]) -> Iterator[Basket]:
        yield Basket(tuple(cur))
        for k in range(start, len(pts)):
            t = total + weights[k]
            if fits(t):
                cur.append(pts[k])
                yield from rec(k, t, cur)
                cur.pop()

    yield from rec(0, Fraction(0), [])


def enumerate_baskets(
    max_sigma: Fraction | int = SIGMA_BOUND,
    coprime_to: Optional[int] = None,
    points: Optional[Sequence[QuotientPoint]] = None,
    strict: bool = True,
) -> list[Basket]:
    """Complete, duplicate-free, canonically sorted list of baskets."""
    return sorted(iter_baskets(max_sigma, coprime_to, points, strict))
