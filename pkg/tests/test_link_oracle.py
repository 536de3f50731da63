"""Engine feasible sets against an exhaustive grid search on every q=4 torsion-free scenario."""

import pytest

from qfano.link.cases import grid_scenario, torsion_free_scenarios
from qfano.link.engine import apply_rules
from qfano.link.scenario import Grid

from oracles import engine_feasible, link_bruteforce

RULE_SETS = {
    "all": frozenset(),
    "no-decomposition": frozenset({"R8", "R9", "R10", "THRESH", "R13"}),
    "bare": frozenset({"R8", "R9", "R10", "SPLIT", "R4", "R13", "THRESH", "SUBADD"}),
}
Q4 = torsion_free_scenarios(4)


@pytest.mark.parametrize("rules", sorted(RULE_SETS))
@pytest.mark.parametrize("scn", Q4, ids=[s.name.split(" ", 2)[2] for s in Q4])
def test_engine_matches_exhaustive_search(scn, rules):
    disabled = RULE_SETS[rules]
    w = scn.worlds[0]
    h0 = [w.table.exact((k, 0)) for k in range(scn.q)]
    engine = engine_feasible(apply_rules(grid_scenario(scn, Grid(30, 30), disabled)))
    oracle = link_bruteforce(scn.q, scn.df, h0, list(w.indices), disabled)
    assert engine == oracle
    if rules == "all":
        assert engine == set()
    else:
        assert engine
