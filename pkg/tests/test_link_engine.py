from dataclasses import replace
from fractions import Fraction
from functools import lru_cache

import pytest

from qfano.link.cases import (
    expected_outcome,
    q3_torsion,
    q4_torsion,
    q5_torsion,
    qds_scenarios,
    run_case_41478,
    torsion_free_scenarios,
)
from qfano.link.engine import Outcome, TraceStep, UnboundedDomain, apply_rules, replay_trace
from qfano.link.scenario import Grid

SCENARIOS = {s.name: s for s in qds_scenarios()}


@lru_cache(maxsize=None)
def trace_of(name):
    return apply_rules(SCENARIOS[name])


def kills(trace, **match):
    return [s for s in trace.steps if s.kill and all(s.binding(k) == v for k, v in match.items())]


def scenario(q, basket):
    return next(s for s in torsion_free_scenarios(q) if f"B={basket} " in s.name)


def test_scenario_inventory():
    free = [s for s in SCENARIOS.values() if s.name.startswith("torsion-free")]
    assert len(free) == 30
    assert len(SCENARIOS) == 33


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_outcome_and_replay(name):
    scn = SCENARIOS[name]
    trace = trace_of(name)
    assert trace.outcome == expected_outcome(scn)
    assert replay_trace(trace)
    assert trace.steps[-1].rule == "OUTCOME"


def test_q4_torsion_reduces_to_higher_index():
    trace = trace_of(q4_torsion().name)
    assert trace.summary().endswith("REDUCES(q_hat>4)")
    assert trace.world_outcomes == {"q=4, n=2": Outcome.REDUCES, "q=4, n=5": Outcome.CONTRADICTION}


def test_q3_torsion_chain_closes():
    trace = trace_of(q3_torsion().name)
    assert trace.outcome == Outcome.CONTRADICTION and trace.condition is None


def test_q5_torsion():
    assert trace_of(q5_torsion().name).outcome == Outcome.CONTRADICTION


def test_q7_large_mobile_class_killed_by_decomposition():
    trace = apply_rules(scenario(7, "(2,2,2,5,8)"))
    six = kills(trace, b=6)
    assert [s.rule for s in six] == ["R8", "R8"]
    assert "centre of F must be a point (a >= 2) but a = 1" in six[1].fact


def test_q5_branch_order():
    trace = apply_rules(scenario(5, "(4,4,7)"))
    on_a3 = [s.rule for s in trace.steps if s.binding("a") == 3 and s.rule not in ("BRANCH",)]
    assert on_a3 == ["R8", "R15", "R10"]
    assert kills(trace, a=3)[0].rule == "R10"
    assert kills(trace, a=1, d=3)[0].rule == "R8"


def test_q3_point_centre_required():
    trace = apply_rules(scenario(3, "(5)"))
    (step,) = kills(trace, b=2)
    assert step.rule == "R8"
    assert step.fact.endswith("centre of F must be a point (a >= 2) but a = 1")


def test_41478_forced_values():
    trace = run_case_41478()
    assert trace.outcome == Outcome.NON_BIRATIONAL
    f = trace.forced
    assert f["r"] == 13 and f["alpha"] == Fraction(1, 13)
    for k in range(1, 7):
        assert f[f"beta_{k}"] == Fraction(2 * k, 13)
        assert f[f"s_{k}"] == 0
    assert "q_hat=e" in trace.relations
    assert replay_trace(trace)


def test_replay_rejects_tampered_trace():
    trace = trace_of(next(n for n in SCENARIOS if "(5)" in n))
    i = next(i for i, s in enumerate(trace.steps) if s.kill and s.rule == "R8")
    bad = replace(trace, steps=list(trace.steps))
    s = bad.steps[i]
    bad.steps[i] = TraceStep(s.rule, s.bindings, s.fact + " (edited)", s.kill, s.world)
    assert not replay_trace(bad)


def test_unbounded_alpha_raises():
    scn = scenario(4, "(11)")
    with pytest.raises(UnboundedDomain):
        apply_rules(replace(scn, disabled=frozenset({"LC"})))


def test_disabling_rules_only_loosens():
    scn = scenario(4, "(11)")
    full = apply_rules(replace(scn, grid=Grid(12, 12)))
    loose = apply_rules(replace(scn, grid=Grid(12, 12),
                                disabled=frozenset({"R8", "R9", "R10", "THRESH", "R13"})))
    assert full.feasible == [] and full.outcome == Outcome.CONTRADICTION
    assert len(loose.feasible) == 1 and loose.outcome != Outcome.CONTRADICTION
