"""Scenario data for the link solver: h0 tables over Cl(X) = Z.A + Z/n.T."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

from ..basket import Basket
from ..riemann_roch import HilbertProfile

Cls = tuple[int, int]  # (k, j): the class kA + jT, j taken mod n


@dataclass(frozen=True, eq=False)
class H0Table:
    """Known bounds lo <= h0(kA + jT) <= hi; ``hi`` None means unbounded.

    Entries not listed default to [0, upper] for 1 <= k < q (the df bound)
    and [0, inf) beyond.  Lower bounds are closed under addition: if two
    classes have sections, so does their sum.
    """

    q: int
    n: int
    entries: Mapping[Cls, tuple[int, Optional[int]]]
    upper: Optional[int] = None
    source: str = ""

    def __post_init__(self) -> None:
        norm = {(k, j % self.n): v for (k, j), v in self.entries.items()}
        object.__setattr__(self, "entries", norm)
        object.__setattr__(self, "_memo", {})

    @classmethod
    def from_profile(cls, profile: HilbertProfile, source: str = "") -> "H0Table":
        entries = {(k, 0): (v, v) for k, v in enumerate(profile.h0)}
        return cls(profile.candidate.q, 1, entries, None, source or "orbifold Riemann-Roch")

    def norm(self, c: Cls) -> Cls:
        return (c[0], c[1] % self.n)

    def bounds(self, k: int, j: int = 0) -> tuple[int, Optional[int]]:
        j %= self.n
        if k < 0:
            return (0, 0)
        if k == 0:
            return (1, 1) if j == 0 else (0, 0)
        memo = self._memo  # type: ignore[attr-defined]
        if (k, j) in memo:
            return memo[(k, j)]
        if (k, j) in self.entries:
            lo, hi = self.entries[(k, j)]
        else:
            lo, hi = 0, (self.upper if k < self.q else None)
        if lo == 0:
            for k1 in range(1, k // 2 + 1):
                for j1 in range(self.n):
                    if self.bounds(k1, j1)[0] >= 1 and self.bounds(k - k1, j - j1)[0] >= 1:
                        lo = 1
                        break
                if lo:
                    break
        memo[(k, j)] = (lo, hi)
        return lo, hi

    def nonempty(self, c: Cls) -> bool:
        return self.bounds(*c)[0] >= 1

    def empty(self, c: Cls) -> bool:
        return self.bounds(*c)[1] == 0

    def exact(self, c: Cls) -> Optional[int]:
        lo, hi = self.bounds(*c)
        return lo if lo == hi else None

    def may_equal(self, c: Cls, value: int) -> bool:
        lo, hi = self.bounds(*c)
        return lo <= value and (hi is None or value <= hi)

    def may_reach(self, c: Cls, value: int) -> bool:
        hi = self.bounds(*c)[1]
        return hi is None or hi >= value

    def irreducible(self, c: Cls) -> bool:
        """Every member of the class is a prime divisor: no effective split."""
        k, j = c
        if k < 1:
            return False
        for k1 in range(1, k // 2 + 1):
            for j1 in range(self.n):
                if not self.empty((k1, j1)) and not self.empty((k - k1, j - j1)):
                    return False
        return True


@dataclass(frozen=True)
class World:
    """One consistent assignment of fixture data (a scenario may have several)."""

    label: str
    n: int
    table: H0Table
    indices: Optional[tuple[int, ...]] = None
    a3: Optional[Fraction] = None
    basket: Optional[Basket] = None
    source: str = ""

    def multiplicity(self, r: int) -> Optional[int]:
        if self.indices is None:
            return None
        return sum(1 for x in self.indices if x == r)


@dataclass(frozen=True)
class Grid:
    """Rationals p/d with 0 <= p <= max_num and 1 <= d <= max_den."""

    max_den: int = 30
    max_num: int = 30

    def contains(self, x: Fraction) -> bool:
        return x >= 0 and x.denominator <= self.max_den and x.numerator <= self.max_num

    @property
    def top(self) -> Fraction:
        return Fraction(self.max_num)


@dataclass(frozen=True)
class LinkScenario:
    """Input to ``apply_rules``.

    ``target`` is ``"qds"`` when the link ends at a smooth quartic double
    solid (q_hat = 2, the mobile system maps to a generator), or ``"free"``
    when q_hat is only bounded by rationality.  In the free case ``mobile``
    gives the class of the mobile system.
    """

    name: str
    q: int
    df: int
    worlds: tuple[World, ...]
    target: str = "qds"
    mobile: Optional[Cls] = None
    k_set: Optional[tuple[int, ...]] = None
    grid: Optional[Grid] = None
    disabled: frozenset = frozenset()
    max_center_index: int = 24
    q_hat_max: int = 7
    chain: Optional[Callable[[int], list]] = field(default=None, compare=False, hash=False)
    provenance: str = ""

    def enabled(self, rule: str) -> bool:
        return rule not in self.disabled
