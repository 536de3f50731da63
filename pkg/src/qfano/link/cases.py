"""Scripted scenarios: df = 3 candidates, torsion fixtures, and No. 41478."""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from ..basket import Basket
from ..riemann_roch import HilbertProfile, candidate, hilbert_profile
from ..search import SearchConfig, enumerate_candidates
from .engine import Outcome, RuleTrace, apply_rules
from .scenario import Grid, H0Table, LinkScenario, World

FIXTURE_SOURCE = "published h0 data for Q-Fano threefolds with torsion, q >= 3, df = 3"
DF = 3


def world_from_profile(profile: HilbertProfile, label: Optional[str] = None) -> World:
    c = profile.candidate
    return World(
        label=label or f"B={c.basket} A^3={c.a3}",
        n=1,
        table=H0Table.from_profile(profile),
        indices=c.basket.indices,
        a3=c.a3,
        basket=c.basket,
        source="orbifold Riemann-Roch",
    )


def scenario_from_profile(profile: HilbertProfile, **kw) -> LinkScenario:
    c = profile.candidate
    return LinkScenario(
        name=f"torsion-free q={c.q} B={c.basket} A^3={c.a3}",
        q=c.q,
        df=DF,
        worlds=(world_from_profile(profile),),
        provenance="df=3 search list",
        **kw,
    )


@lru_cache(maxsize=1)
def df3_profiles() -> tuple[HilbertProfile, ...]:
    report = enumerate_candidates(SearchConfig(q_min=3, q_max=19, df_filter=DF))
    return report.candidates


def torsion_free_scenarios(q: Optional[int] = None) -> list[LinkScenario]:
    return [scenario_from_profile(p) for p in df3_profiles() if q is None or p.candidate.q == q]


def _table(q: int, n: int, entries: dict) -> H0Table:
    return H0Table(q, n, entries, upper=DF + 1, source=FIXTURE_SOURCE)


def q5_torsion() -> LinkScenario:
    t = _table(5, 2, {
        (1, 0): (1, 1), (1, 1): (0, 0),
        (2, 0): (1, 1), (2, 1): (1, 1),
        (3, 0): (2, 2), (3, 1): (2, 2),
    })
    w = World("q=5, n=2", 2, t, indices=(4, 4, 12), a3=Fraction(1, 12), source=FIXTURE_SOURCE)
    return LinkScenario("torsion q=5 n=2", 5, DF, (w,), provenance=FIXTURE_SOURCE)


def q4_torsion_worlds() -> tuple[World, World]:
    t2 = _table(4, 2, {
        (1, 0): (0, 0), (1, 1): (1, 1),
        (2, 0): (2, 2), (2, 1): (1, 2),
        (3, 0): (4, 4), (3, 1): (4, 4),
    })
    e5 = {(1, 0): (0, 0), (2, 0): (2, 2)}
    for k in range(1, 5):
        e5[(1, k)] = (1, 1)
        e5[(2, k)] = (2, 2)
    for k in range(5):
        e5[(3, k)] = (4, 4)
    t5 = _table(4, 5, e5)
    return (World("q=4, n=2", 2, t2, source=FIXTURE_SOURCE),
            World("q=4, n=5", 5, t5, source=FIXTURE_SOURCE))


def q4_torsion(n: Optional[int] = None) -> LinkScenario:
    worlds = tuple(w for w in q4_torsion_worlds() if n is None or w.n == n)
    name = "torsion q=4" + (f" n={n}" if n else " n in {2,5}")
    return LinkScenario(name, 4, DF, worlds, provenance=FIXTURE_SOURCE)


def q3_torsion_worlds() -> tuple[World, ...]:
    some = (1, DF + 1)
    t3 = _table(3, 3, {(1, 0): some, (1, 1): some, (1, 2): some})
    big = _table(3, 2, {(1, 0): some, (1, 1): some, (2, 0): (DF + 1, DF + 1)})
    small = _table(3, 2, {(1, 0): some, (1, 1): some, (2, 0): (1, DF)})
    return (
        World("q=3, n=3", 3, t3, source=FIXTURE_SOURCE),
        World("q=3, n=2, h0(2A)=4", 2, big, source=FIXTURE_SOURCE),
        World("q=3, n=2, h0(2A)<4", 2, small, indices=(2, 4, 14), a3=Fraction(15, 28), source=FIXTURE_SOURCE),
    )


def q3_torsion(chain: bool = True) -> LinkScenario:
    return LinkScenario("torsion q=3 n in {2,3}", 3, DF, q3_torsion_worlds(),
                        chain=resolve_chain if chain else None, provenance=FIXTURE_SOURCE)


def torsion_scenarios() -> list[LinkScenario]:
    return [q5_torsion(), q4_torsion(), q3_torsion()]


def resolve_chain(q_bound: int, q_max: int = 7) -> list[tuple[str, Outcome]]:
    """Outcomes for every df = 3 model with q_bound < q <= q_max.

    A REDUCES outcome counts as closed when its own chain is closed.
    """
    out = []
    for scn in torsion_free_scenarios():
        if q_bound < scn.q <= q_max:
            out.append((scn.name, _closed(apply_rules(scn))))
    for scn in (q5_torsion(), q4_torsion()):
        if q_bound < scn.q <= q_max:
            out.append((scn.name, _closed(apply_rules(replace(scn, chain=resolve_chain)))))
    return out


def _closed(trace: RuleTrace) -> Outcome:
    return trace.outcome


def case_41478_candidate():
    return candidate(7, [(2, 1), (3, 1), (13, 6)], Fraction(1, 78), provenance="No. 41478")


def case_41478(**kw) -> LinkScenario:
    prof = hilbert_profile(case_41478_candidate())
    return LinkScenario(
        name="No. 41478",
        q=7,
        df=prof.df,
        worlds=(world_from_profile(prof, "q=7 B=(2,3,13) A^3=1/78"),),
        target="free",
        mobile=(6, 0),
        provenance="No. 41478",
        **kw,
    )


def run_case_41478() -> RuleTrace:
    return apply_rules(case_41478())


def scripted_scenarios() -> dict[str, LinkScenario]:
    out = {s.name: s for s in torsion_free_scenarios()}
    for s in torsion_scenarios():
        out[s.name] = s
    out["No. 41478"] = case_41478()
    return out


def grid_scenario(scn: LinkScenario, grid: Grid = Grid(30, 30), disabled=frozenset()) -> LinkScenario:
    return replace(scn, grid=grid, disabled=frozenset(disabled))


def expected_outcome(scn: LinkScenario) -> Outcome:
    """Outcome the case analysis predicts for the scripted scenarios."""
    if scn.target == "free":
        return Outcome.NON_BIRATIONAL
    if scn.q == 4 and any(w.n > 1 for w in scn.worlds):
        return Outcome.REDUCES
    return Outcome.CONTRADICTION


def qds_scenarios() -> list[LinkScenario]:
    """Every scenario whose link is assumed to end at the quartic double solid."""
    return torsion_free_scenarios() + torsion_scenarios()
