"""JSON forms of link scenarios and rule traces."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from ..catalog import parse_basket_text
from ..riemann_roch import FanoCandidate, hilbert_profile
from .engine import RuleTrace
from .scenario import Grid, H0Table, LinkScenario, World


class ScenarioError(ValueError):
    """A scenario file that cannot be turned into a ``LinkScenario``."""


def _plain(v: Any) -> Any:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def trace_to_dict(trace: RuleTrace) -> dict:
    return {
        "scenario": trace.scenario,
        "outcome": trace.outcome.value,
        "condition": trace.condition,
        "forced": {k: _plain(v) for k, v in trace.forced.items()},
        "relations": list(trace.relations),
        "world_outcomes": {k: v.value for k, v in trace.world_outcomes.items()},
        "feasible_count": len(trace.feasible),
        "summary": trace.summary(),
        "steps": [
            {"rule": s.rule, "kill": s.kill, "world": s.world, "fact": s.fact,
             "bindings": {k: _plain(v) for k, v in s.bindings}}
            for s in trace.steps
        ],
    }


def _world(d: dict, q: int, df: int, i: int) -> World:
    label = d.get("label", f"world {i + 1}")
    if "candidate" in d:
        c = d["candidate"]
        cand = FanoCandidate(int(c.get("q", q)), parse_basket_text(c["basket"]), Fraction(c["a3"]))
        prof = hilbert_profile(cand)
        return World(label, 1, H0Table.from_profile(prof), cand.basket.indices, cand.a3, cand.basket,
                     "orbifold Riemann-Roch")
    n = int(d.get("n", 1))
    entries = {}
    for row in d.get("h0", []):
        k, j, lo, hi = row
        entries[(int(k), int(j))] = (int(lo), None if hi is None else int(hi))
    upper = d.get("upper", df + 1)
    table = H0Table(q, n, entries, upper=upper, source=d.get("source", "scenario file"))
    indices = tuple(d["indices"]) if d.get("indices") is not None else None
    a3 = Fraction(d["a3"]) if d.get("a3") is not None else None
    return World(label, n, table, indices, a3, source=d.get("source", "scenario file"))


def scenario_from_dict(d: dict) -> LinkScenario:
    """Build a scenario from its JSON form.

    Each world gives either ``candidate`` ({q, basket, a3}, h0 from
    Riemann-Roch) or an explicit table: ``n`` and ``h0`` rows
    ``[k, j, lo, hi]`` meaning lo <= h0(kA + jT) <= hi (hi null = unbounded).
    """
    try:
        q, df = int(d["q"]), int(d["df"])
        worlds = tuple(_world(w, q, df, i) for i, w in enumerate(d["worlds"]))
        grid = Grid(*d["grid"]) if d.get("grid") else None
        mobile = tuple(d["mobile"]) if d.get("mobile") else None
        return LinkScenario(
            name=d.get("name", "scenario"), q=q, df=df, worlds=worlds,
            target=d.get("target", "qds"), mobile=mobile, grid=grid,
            disabled=frozenset(d.get("disabled", [])),
            q_hat_max=int(d.get("q_hat_max", 7)),
            provenance=d.get("provenance", "scenario file"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad scenario: {exc!r}") from None


def load_scenario(text: str) -> tuple[LinkScenario, dict]:
    """Scenario plus the raw document (which may carry an ``expect`` outcome)."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ScenarioError("scenario file must hold a JSON object")
    return scenario_from_dict(d), d
