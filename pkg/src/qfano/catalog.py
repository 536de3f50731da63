"""Catalog ingestion, diffing, and JSON persistence of search reports."""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .basket import Basket, BasketError, QuotientPoint, make_point
from .riemann_roch import CandidateInvalid, FanoCandidate, HilbertProfile, h0, integrality_valid
from .search import AssertionRecord, SearchConfig, SearchReport


class CatalogError(ValueError):
    """Malformed catalog input.  ``errors`` holds (line, message) pairs."""

    def __init__(self, errors: Sequence[tuple[int, str]]):
        self.errors = list(errors)
        super().__init__("; ".join(f"line {ln}: {msg}" for ln, msg in self.errors))


# ------------------------------------------------------------ basket text

_TRIPLE = re.compile(r"1\s*/\s*(\d+)\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")
_SEPARATORS = re.compile(r"[\s,;]*")


def normalize_triple(r: int, weights: Sequence[int]) -> QuotientPoint:
    """Bring 1/r(w1,w2,w3) to the form 1/r(1,-1,b).

    Needs two weights summing to 0 mod r; scaling by the inverse of one of
    them gives (1, -1, b).  Different pairs must agree up to b -> r - b.
    """
    if r < 2:
        raise BasketError(f"index must be at least 2, got {r}")
    w = [x % r for x in weights]
    if any(gcd(x, r) != 1 for x in w):
        raise BasketError(f"1/{r}{tuple(weights)}: every weight must be a unit mod {r}")
    found = set()
    for i in range(3):
        for j in range(i + 1, 3):
            if (w[i] + w[j]) % r:
                continue
            k = 3 - i - j
            b = (pow(w[i], -1, r) * w[k]) % r
            found.add(make_point(r, b))
    if not found:
        raise BasketError(f"1/{r}{tuple(weights)} is not terminal: no two weights sum to 0 mod {r}")
    if len(found) > 1:
        raise BasketError(f"1/{r}{tuple(weights)} normalizes ambiguously: {sorted(found)}")
    return found.pop()


def _parse_triples(text: str) -> Basket:
    pts = []
    pos = 0
    for m in _TRIPLE.finditer(text):
        gap = text[pos:m.start()]
        if _SEPARATORS.fullmatch(gap) is None:
            raise BasketError(f"unexpected text {gap.strip()!r} in basket {text!r}")
        r = int(m.group(1))
        pts.append(normalize_triple(r, [int(m.group(i)) for i in (2, 3, 4)]))
        pos = m.end()
    if _SEPARATORS.fullmatch(text[pos:]) is None:
        raise BasketError(f"unexpected text {text[pos:].strip()!r} in basket {text!r}")
    return Basket(tuple(pts))


def _parse_indices(text: str) -> Basket:
    inner = text.strip()[1:-1].strip()
    if not inner:
        return Basket()
    pts = []
    for item in inner.split(","):
        item = item.strip()
        m = re.fullmatch(r"(\d+)(?:\s*:\s*(\d+))?", item)
        if m is None:
            raise BasketError(f"cannot read basket entry {item!r}")
        r = int(m.group(1))
        b = int(m.group(2)) if m.group(2) else 1
        pts.append(make_point(r, b))
    return Basket(tuple(pts))


def parse_basket_text(text: str) -> Basket:
    """Read a basket from either notation.

    ``"(2,3,13)"`` lists indices; a weight can be attached as ``13:6`` and
    defaults to 1.  ``"1/2(1,1,1);1/13(1,12,6)"`` lists weight triples,
    separated by commas or semicolons.  ``"()"`` and ``""`` are empty.
    """
    s = text.strip()
    if not s:
        return Basket()
    if "/" in s:
        return _parse_triples(s)
    if s.startswith("(") and s.endswith(")"):
        return _parse_indices(s)
    raise BasketError(f"unrecognized basket text {text!r}")


def render_basket(basket: Basket) -> str:
    """Triple notation, parseable by ``parse_basket_text``."""
    if not len(basket):
        return "()"
    return ";".join(f"1/{p.r}(1,{p.r - 1},{p.b})" for p in basket)


# ------------------------------------------------------------ catalog rows


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    q: int
    a3: Fraction
    basket: Basket
    basket_text: str
    pins: tuple[tuple[int, int], ...] = ()
    line: int = field(default=0, compare=False)

    @property
    def key(self) -> tuple[int, Basket, Fraction]:
        return (self.q, self.basket, self.a3)


REQUIRED = ("id", "q", "a3", "basket")


def _parse_fraction(s: str) -> Fraction:
    s = s.strip()
    if not re.fullmatch(r"-?\d+(\s*/\s*-?\d+)?", s):
        raise ValueError(f"malformed fraction {s!r}")
    try:
        return Fraction(s.replace(" ", ""))
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in {s!r}") from None


def _parse_pins(s: str) -> tuple[tuple[int, int], ...]:
    out = {}
    for part in filter(None, (p.strip() for p in s.split(";"))):
        m = re.fullmatch(r"(\d+)\s*=\s*(\d+)", part)
        if m is None:
            raise ValueError(f"malformed pin {part!r}; expected n=h0")
        out[int(m.group(1))] = int(m.group(2))
    return tuple(sorted(out.items()))


def read_catalog(text: str) -> list[CatalogEntry]:
    """Parse CSV text with header ``id,q,a3,basket[,pins]``."""
    if not text.strip():
        return []
    reader = csv.reader(io.StringIO(text))
    header = [h.strip().lower() for h in next(reader)]
    missing = [c for c in REQUIRED if c not in header]
    if missing:
        raise CatalogError([(1, f"missing column(s) {', '.join(missing)}")])
    col = {name: header.index(name) for name in header}
    entries, errors = [], []
    for row in reader:
        line = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        if len(row) > len(header) or any(col[c] >= len(row) for c in REQUIRED):
            errors.append((line, f"expected {len(header)} fields, got {len(row)}"))
            continue
        get = lambda name: row[col[name]].strip() if col[name] < len(row) else ""  # noqa: E731
        try:
            q = int(get("q"))
            if q < 1:
                raise ValueError(f"q must be positive, got {q}")
            a3 = _parse_fraction(get("a3"))
            if a3 <= 0:
                raise ValueError(f"A^3 must be positive, got {a3}")
            basket = parse_basket_text(get("basket"))
            pins = _parse_pins(get("pins")) if "pins" in col else ()
        except (ValueError, BasketError) as exc:
            errors.append((line, str(exc)))
            continue
        entries.append(CatalogEntry(get("id"), q, a3, basket, get("basket"), pins, line))
    if errors:
        raise CatalogError(errors)
    return entries


def import_catalog(path: Union[str, Path]) -> list[CatalogEntry]:
    return read_catalog(Path(path).read_text())


def write_catalog(entries: Iterable[CatalogEntry]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "q", "a3", "basket", "pins"])
    for e in entries:
        w.writerow([e.id, e.q, _frac(e.a3), render_basket(e.basket),
                    ";".join(f"{n}={v}" for n, v in e.pins)])
    return buf.getvalue()


def entries_from_report(report: SearchReport, pins: Sequence[int] = ()) -> list[CatalogEntry]:
    """Catalog rows for every candidate, optionally pinning h0 at the given n."""
    out = []
    for p in report.candidates:
        c = p.candidate
        pv = tuple((n, p.h0[n]) for n in pins if n < len(p.h0))
        out.append(CatalogEntry(candidate_id(c), c.q, c.a3, c.basket, render_basket(c.basket), pv))
    return out


# ------------------------------------------------------------ diff


@dataclass
class PinMismatch:
    id: str
    n: int
    pinned: int
    computed: Optional[int]


@dataclass
class CatalogDiff:
    ours_only: list[HilbertProfile] = field(default_factory=list)
    theirs_only: list[CatalogEntry] = field(default_factory=list)
    pin_mismatches: list[PinMismatch] = field(default_factory=list)
    matched: int = 0

    @property
    def empty(self) -> bool:
        return not (self.ours_only or self.theirs_only or self.pin_mismatches)

    def as_dict(self) -> dict:
        return {
            "matched": self.matched,
            "ours_only": [_candidate_json(p, candidate_id(p.candidate)) for p in self.ours_only],
            "theirs_only": [{"id": e.id, "q": e.q, "a3": _frac(e.a3), "basket": render_basket(e.basket),
                             "line": e.line} for e in self.theirs_only],
            "pin_mismatches": [{"id": m.id, "n": m.n, "pinned": m.pinned, "computed": m.computed}
                               for m in self.pin_mismatches],
        }


def _computed_h0(profile: HilbertProfile, n: int) -> Optional[int]:
    if n < len(profile.h0):
        return profile.h0[n]
    try:
        return h0(profile.candidate, n)
    except CandidateInvalid:
        return None


def diff_catalogs(ours: SearchReport, theirs: Sequence[CatalogEntry]) -> CatalogDiff:
    """Match on (q, A^3, basket); baskets are canonical so b and r - b agree."""
    index = {p.candidate.key: p for p in ours.candidates}
    seen = set()
    out = CatalogDiff()
    for e in theirs:
        p = index.get(e.key)
        if p is None:
            out.theirs_only.append(e)
            continue
        seen.add(e.key)
        out.matched += 1
        for n, v in e.pins:
            got = _computed_h0(p, n)
            if got != v:
                out.pin_mismatches.append(PinMismatch(e.id, n, v, got))
    out.ours_only = [p for p in ours.candidates if p.candidate.key not in seen]
    return out


# ------------------------------------------------------------ JSON


def _frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def candidate_id(c: FanoCandidate) -> str:
    """Stable identifier built from the candidate's data, e.g. ``q7-r2b1r3b1r13b6-1_78``."""
    pts = "".join(f"r{p.r}b{p.b}" for p in c.basket) or "smooth"
    return f"q{c.q}-{pts}-{c.a3.numerator}_{c.a3.denominator}"


def _candidate_json(p: HilbertProfile, cid: str) -> dict:
    c = p.candidate
    return {
        "id": cid,
        "q": c.q,
        "a3": _frac(c.a3),
        "basket": [{"r": pt.r, "b": pt.b} for pt in c.basket],
        "sigma": _frac(c.sigma),
        "h0": list(p.h0),
        "df": p.df,
        "valid": integrality_valid(c, len(p.h0) - 1),
        "provenance": c.provenance,
    }


def report_to_dict(report: SearchReport) -> dict:
    return {
        "config": report.config.as_dict(),
        "count": len(report.candidates),
        "distinct_hilbert_series": report.distinct_hilbert_series_count,
        "candidates": [_candidate_json(p, candidate_id(p.candidate)) for p in report.candidates],
        "assertions": [{"name": a.name, "passed": a.passed, "detail": a.detail} for a in report.assertions],
    }


def report_to_json(report: SearchReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=1) + "\n"


def report_from_dict(data: dict) -> SearchReport:
    try:
        config = SearchConfig.from_dict(data["config"])
        cands = []
        for row in data["candidates"]:
            basket = Basket(tuple(QuotientPoint(pt["r"], pt["b"]) for pt in row["basket"]))
            c = FanoCandidate(row["q"], basket, Fraction(row["a3"]), provenance=row.get("provenance", ""))
            cands.append(HilbertProfile(c, tuple(row["h0"]), row["df"]))
        asserts = [AssertionRecord(a["name"], a["passed"], a.get("detail", "")) for a in data.get("assertions", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogError([(0, f"malformed report: {exc}")]) from None
    return SearchReport(config, tuple(cands), asserts)


def report_from_json(text: str) -> SearchReport:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError([(exc.lineno, f"invalid JSON: {exc.msg}")]) from None
    return report_from_dict(data)
