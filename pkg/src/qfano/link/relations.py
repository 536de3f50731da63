"""Closed-form relations between the numerical invariants of a link."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional


class InfeasibleAssignment(ValueError):
    """A value combination that violates an integrality or divisibility rule."""


def degree_relation_solutions(q: int) -> set[tuple[int, int, int]]:
    """All (b, a, d) with 2b = q + a*d and b <= q - 1."""
    if q < 2:
        raise ValueError("q must be at least 2")
    out = set()
    for b in range(1, q):
        ad = 2 * b - q
        if ad <= 0:
            continue
        for d in range(1, ad + 1):
            if ad % d == 0:
                out.add((b, ad // d, d))
    return out


def local_multiple_t(q: int, r: int, k: int) -> int:
    """t in [0, r) with kA ~ t(-K) near a point of index r."""
    if gcd(q, r) != 1:
        raise ValueError(f"q={q} and r={r} are not coprime")
    return (k * pow(q, -1, r)) % r


@dataclass(frozen=True)
class Bound:
    """``lhs >= factor * rhs`` between two named unknowns."""

    lhs: str
    factor: Fraction
    rhs: str

    def holds(self, values: dict) -> bool:
        return values[self.lhs] >= self.factor * values[self.rhs]

    def __str__(self) -> str:
        return f"{self.lhs} >= {self.factor}*{self.rhs}"


def threshold_bounds(t: int, k: Optional[int] = None) -> list:
    """Constraints from a point where the mobile class is t(-K) locally.

    Returns ``[c <= 1/t, beta_k >= t*alpha]``; empty when t = 0.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return []
    beta = "beta" if k is None else f"beta_{k}"
    return [("c", "<=", Fraction(1, t)), Bound(beta, Fraction(t), "alpha")]


def eqmain_check(q: int, q_hat: int, k: int, s_k: int, beta_k: Fraction, alpha: Fraction, e: int,
                 exact: bool = True) -> Fraction:
    """Residual of  k*q_hat = q*s_k + (q*beta_k - k*alpha)*e.

    With ``exact`` (the class of N_k is exactly k/q times -K) the bracket must
    be an integer; otherwise only the rational relation is checked.
    """
    bracket = q * Fraction(beta_k) - k * Fraction(alpha)
    if exact and bracket.denominator != 1:
        raise InfeasibleAssignment(f"q*beta_{k} - {k}*alpha = {bracket} is not an integer")
    return k * q_hat - q * s_k - bracket * e


def solve_beta(q: int, q_hat: int, k: int, s_k: int, alpha: Fraction, e: int) -> Fraction:
    """beta_k from the main relation given the other unknowns."""
    return (Fraction(k * q_hat - q * s_k, e) + k * alpha) / q


def kawamata_alpha(r: int) -> Fraction:
    if r < 2:
        raise ValueError("index must be at least 2")
    return Fraction(1, r)


def torsion_order(e: int, d: int) -> int:
    if e < 1 or d < 1:
        raise ValueError("e and d must be positive")
    if e % d:
        raise InfeasibleAssignment(f"d={d} does not divide e={e}")
    return e // d
