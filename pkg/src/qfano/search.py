"""Exhaustive search for numerical Q-Fano candidates with trivial torsion.

A search cell is a pair (q, basket).  For each cell a finite set of A^3
values is produced by a grid policy, and every value is run through the
validity filters.  Policies:

``lattice``
    The exact lattice forced by the filters themselves.  For q >= 3 with the
    vanishing filter, chi(-A) = 0 is linear in A^3 with nonzero coefficient,
    so A^3 is determined.  Otherwise chi(A) must be an integer, which places
    A^3 in an arithmetic progression.  No valid candidate is lost.
``product``
    m / (12 * prod r) for all m up to the degree bound; a coarse superset
    grid that is only practical for small baskets.
``denominator``
    m / D for a fixed D given by ``grid_denominator``.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import floor, gcd, prod
from typing import Iterable, Optional, Sequence

from .basket import Basket, QuotientPoint, iter_baskets, make_point, sigma
from .riemann_roch import (
    DEFAULT_HORIZON,
    FanoCandidate,
    HilbertProfile,
    bogomolov_valid,
    describe,
    euler_char,
    hilbert_profile,
    integrality_valid,
    point_contribution,
    series_agree,
    vanishing_valid,
)

log = logging.getLogger(__name__)

GRID_POLICIES = ("lattice", "product", "denominator")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    q_min: int = 2
    q_max: int = 19
    degree_cap: Optional[Fraction] = None
    bogomolov: bool = True
    vanishing: bool = True
    grid_policy: str = "lattice"
    grid_denominator: Optional[int] = None
    horizon: int = DEFAULT_HORIZON
    df_filter: Optional[int] = None
    strict_kc2: bool = True
    allowed_points: Optional[tuple[QuotientPoint, ...]] = None
    workers: int = field(default=1, compare=False)

    def __post_init__(self) -> None:
        if self.degree_cap is not None:
            object.__setattr__(self, "degree_cap", Fraction(self.degree_cap))
        self.validate()

    def validate(self) -> None:
        if self.q_min < 2:
            raise ConfigError("q_min must be at least 2")
        if self.q_max < self.q_min:
            raise ConfigError("q_max must be at least q_min")
        if self.degree_cap is not None and self.degree_cap <= 0:
            raise ConfigError("degree_cap must be positive")
        if self.degree_cap is None and not self.bogomolov:
            raise ConfigError("need a degree bound: set degree_cap or enable bogomolov")
        if self.grid_policy not in GRID_POLICIES:
            raise ConfigError(f"unknown grid policy {self.grid_policy!r}")
        if self.grid_policy == "denominator" and not self.grid_denominator:
            raise ConfigError("denominator policy needs grid_denominator")
        if self.horizon < 0:
            raise ConfigError("horizon must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be positive")

    @property
    def tag(self) -> str:
        """Short provenance label naming the active filters."""
        parts = [self.grid_policy]
        if self.degree_cap is not None:
            parts.append(f"cap={_frac_str(self.degree_cap)}")
        if self.bogomolov:
            parts.append("bogomolov")
        if self.vanishing:
            parts.append("vanishing")
        return "search[" + ",".join(parts) + "]"

    def as_dict(self) -> dict:
        return {
            "q_min": self.q_min,
            "q_max": self.q_max,
            "degree_cap": None if self.degree_cap is None else _frac_str(self.degree_cap),
            "bogomolov": self.bogomolov,
            "vanishing": self.vanishing,
            "grid_policy": self.grid_policy,
            "grid_denominator": self.grid_denominator,
            "horizon": self.horizon,
            "df_filter": self.df_filter,
            "strict_kc2": self.strict_kc2,
            "allowed_points": None
            if self.allowed_points is None
            else [[p.r, p.b] for p in self.allowed_points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        d = dict(d)
        if d.get("degree_cap") is not None:
            d["degree_cap"] = Fraction(d["degree_cap"])
        if d.get("allowed_points") is not None:
            d["allowed_points"] = tuple(QuotientPoint(r, b) for r, b in d["allowed_points"])
        d.pop("workers", None)
        return cls(**d)


@dataclass(frozen=True)
class AssertionRecord:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SearchReport:
    config: SearchConfig
    candidates: tuple[HilbertProfile, ...]
    assertions: list[AssertionRecord] = field(default_factory=list)

    @property
    def distinct_hilbert_series_count(self) -> int:
        return distinct_series_count(self.candidates)

    def by_q(self) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        for p in self.candidates:
            out[p.candidate.q] += 1
        return dict(sorted(out.items()))

    def find(self, q: int, basket: Basket, a3: Fraction) -> Optional[HilbertProfile]:
        for p in self.candidates:
            if p.candidate.key == (q, basket, Fraction(a3)):
                return p
        return None

    def __len__(self) -> int:
        return len(self.candidates)


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def degree_bound(q: int, kc2: Fraction, config: SearchConfig) -> Fraction:
    """Largest admissible A^3 for the cell."""
    bounds = []
    if config.degree_cap is not None:
        bounds.append(config.degree_cap / q**3)
    if config.bogomolov:
        bounds.append(4 * kc2 / (4 * q * q - 3 * q))
    return min(bounds)


def _periodic_sum(q: int, basket: Basket, n: int) -> Fraction:
    return sum((point_contribution(p, q, n) for p in basket), Fraction(0))


def grid_values(q: int, basket: Basket, config: SearchConfig) -> list[Fraction]:
    kc2 = 24 - sigma(basket)
    top = degree_bound(q, kc2, config)
    if top <= 0:
        return []
    if config.grid_policy == "lattice":
        if config.vanishing and q >= 3:
            coeff = Fraction(-(q - 1) * (q - 2), 12)
            rest = 1 - kc2 / (12 * q) + _periodic_sum(q, basket, -1)
            a3 = -rest / coeff
            return [a3] if 0 < a3 <= top else []
        step = Fraction(12, (q + 1) * (q + 2))
        u = 1 + kc2 / (12 * q) + _periodic_sum(q, basket, 1)
        # a3 = step * (m - u) for integers m
        m_lo = floor(u) + 1
        out = []
        m = m_lo
        while True:
            a3 = step * (m - u)
            if a3 > top:
                break
            if a3 > 0:
                out.append(a3)
            m += 1
        return out
    D = 12 * prod(basket.indices) if config.grid_policy == "product" else config.grid_denominator
    return [Fraction(m, D) for m in range(1, floor(top * D) + 1)]


def cell_candidates(q: int, basket: Basket, config: SearchConfig) -> list[FanoCandidate]:
    if any(gcd(p.r, q) != 1 for p in basket):
        return []
    s = sigma(basket)
    if s > 24 or (config.strict_kc2 and s == 24):
        return []
    out = []
    for a3 in grid_values(q, basket, config):
        c = FanoCandidate(q, basket, a3, provenance=config.tag)
        if config.bogomolov and not bogomolov_valid(c):
            continue
        if config.degree_cap is not None and q**3 * a3 > config.degree_cap:
            continue
        if config.vanishing and not vanishing_valid(c):
            continue
        if not integrality_valid(c, config.horizon):
            continue
        out.append(c)
    return out


def _search_q(args: tuple[int, SearchConfig]) -> list[FanoCandidate]:
    q, config = args
    out = []
    for B in iter_baskets(24, coprime_to=q, points=config.allowed_points, strict=config.strict_kc2):
        out.extend(cell_candidates(q, B, config))
    return out


def enumerate_candidates(config: SearchConfig) -> SearchReport:
    config.validate()
    qs = list(range(config.q_min, config.q_max + 1))
    jobs = [(q, config) for q in qs]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            parts = list(ex.map(_search_q, jobs))
    else:
        parts = [_search_q(j) for j in jobs]
    found = sorted({c for part in parts for c in part})
    profiles = []
    for c in found:
        prof = hilbert_profile(c, config.horizon)
        if config.df_filter is not None and prof.df != config.df_filter:
            continue
        profiles.append(prof)
    log.info("search %s..%s: %d candidates", config.q_min, config.q_max, len(profiles))
    return SearchReport(config, tuple(profiles))


def distinct_series_count(profiles: Iterable[HilbertProfile]) -> int:
    groups: dict[tuple, list[FanoCandidate]] = defaultdict(list)
    for p in profiles:
        groups[(p.candidate.q, p.candidate.a3)].append(p.candidate)
    total = 0
    for members in groups.values():
        reps: list[FanoCandidate] = []
        for c in members:
            if not any(series_agree(c, r) for r in reps):
                reps.append(c)
        total += len(reps)
    return total


def applicability_count(report: SearchReport, lo: int = 2, hi: Optional[int] = None) -> int:
    """Candidates with lo <= df (<= hi when given)."""
    return sum(1 for p in report.candidates if p.df >= lo and (hi is None or p.df <= hi))


def check_pencil_pattern(report: SearchReport) -> list[tuple[HilbertProfile, int]]:
    """Candidates with some k, 2k < q, h0(kA) = 2 and h0(2kA) = 3."""
    hits = []
    for p in report.candidates:
        q = p.candidate.q
        for k in range(1, (q + 1) // 2):
            if 2 * k < q and _h(p, k) == 2 and _h(p, 2 * k) == 3:
                hits.append((p, k))
    return hits


def _h(p: HilbertProfile, n: int) -> int:
    if n < len(p.h0):
        return p.h0[n]
    return int(euler_char(p.candidate, n))


def check_prop_search1(report: SearchReport) -> list[AssertionRecord]:
    """Structural claims about the df = 3, q >= 3 list; one record per clause."""
    cands = report.candidates

    def first_fail(pred, subset=None) -> Optional[HilbertProfile]:
        for p in cands if subset is None else subset:
            if not pred(p):
                return p
        return None

    def big_points(p: HilbertProfile) -> int:
        return sum(1 for pt in p.candidate.basket if pt.r >= 8)

    clauses = [
        ("(i) q<=7, q!=6, at most one point of index >= 8",
         lambda p: p.candidate.q <= 7 and p.candidate.q != 6 and big_points(p) <= 1, None),
        ("(ii) q=7: h0(A)=0, h0(2A)=h0(3A)=1",
         lambda p: (p.h0[1], p.h0[2], p.h0[3]) == (0, 1, 1), 7),
        ("(iii) q=5: h0(2A)=1, h0(3A)=2",
         lambda p: (p.h0[2], p.h0[3]) == (1, 2), 5),
        ("(iv) q=4: h0(A)<=1, 2<=h0(2A)<=3",
         lambda p: p.h0[1] <= 1 and 2 <= p.h0[2] <= 3, 4),
        ("(iv') q=4, h0(2A)=3 => h0(A)=1, A^3=2/11, B=(11)",
         lambda p: p.h0[2] != 3 or (p.h0[1] == 1 and p.candidate.a3 == Fraction(2, 11)
                                    and p.candidate.basket.indices == (11,)), 4),
    ]
    out = []
    for name, pred, q in clauses:
        subset = None if q is None else [p for p in cands if p.candidate.q == q]
        bad = first_fail(pred, subset)
        out.append(AssertionRecord(name, bad is None, "" if bad is None else describe(bad.candidate)))
    q4_three = [p for p in cands if p.candidate.q == 4 and p.h0[2] == 3]
    out.append(AssertionRecord(
        "q=4 branch with h0(2A)=3 is a single candidate",
        len(q4_three) == 1,
        ", ".join(describe(p.candidate) for p in q4_three),
    ))
    return out


def constraint_diff(base: SearchConfig, **toggles) -> dict[str, dict[str, list[str]]]:
    """For each toggled field, candidates gained and lost relative to ``base``.

    Used when a count does not match its target: the diff shows exactly which
    candidates each filter is responsible for.
    """
    ref = {p.candidate.key: p for p in enumerate_candidates(base).candidates}
    out = {}
    for name, value in toggles.items():
        variant = enumerate_candidates(replace(base, **{name: value}))
        got = {p.candidate.key: p for p in variant.candidates}
        out[f"{name}={value}"] = {
            "only_base": [describe(ref[k].candidate) for k in sorted(ref.keys() - got.keys())],
            "only_variant": [describe(got[k].candidate) for k in sorted(got.keys() - ref.keys())],
        }
    return out


# Published counts for the default configuration.
COUNT_TARGETS = {
    "q>=3 candidates": 472,
    "q=2 candidates": 1492,
    "q>=3 df>=2": 313,
    "q=2 df>=2": 382,
    "q>=3 df=3 series": 30,
}


def reproduce_counts(config: Optional[SearchConfig] = None) -> tuple[dict[str, int], list[AssertionRecord]]:
    """Run both searches and compare against ``COUNT_TARGETS``."""
    config = config or SearchConfig()
    high = enumerate_candidates(replace(config, q_min=max(3, config.q_min), q_max=max(3, config.q_max)))
    low = enumerate_candidates(replace(config, q_min=2, q_max=2))
    df3 = [p for p in high.candidates if p.df == 3]
    got = {
        "q>=3 candidates": len(high),
        "q=2 candidates": len(low),
        "q>=3 df>=2": applicability_count(high),
        "q=2 df>=2": applicability_count(low),
        "q>=3 df=3 series": distinct_series_count(df3),
    }
    records = [
        AssertionRecord(k, got[k] == COUNT_TARGETS[k], f"got {got[k]}, target {COUNT_TARGETS[k]}")
        for k in COUNT_TARGETS
    ]
    return got, records


def default_reports(workers: int = 1) -> tuple[SearchReport, SearchReport]:
    """(q >= 3 report, q = 2 report) under the default configuration."""
    high = enumerate_candidates(SearchConfig(q_min=3, q_max=19, workers=workers))
    low = enumerate_candidates(SearchConfig(q_min=2, q_max=2, workers=workers))
    return high, low


def df3_report(high: SearchReport) -> SearchReport:
    return SearchReport(replace(high.config, df_filter=3),
                        tuple(p for p in high.candidates if p.df == 3))


def restrict_points(pairs: Sequence[tuple[int, int]]) -> tuple[QuotientPoint, ...]:
    return tuple(make_point(r, b) for r, b in pairs)
