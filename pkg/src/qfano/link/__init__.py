"""Numerical constraint system of Sarkisov links and scripted case analyses."""

from .engine import (
    LinkSetup,
    LinkSolution,
    Outcome,
    RuleTrace,
    TraceStep,
    UnboundedDomain,
    apply_rules,
    replay_trace,
)
from .relations import (
    InfeasibleAssignment,
    degree_relation_solutions,
    eqmain_check,
    kawamata_alpha,
    local_multiple_t,
    threshold_bounds,
    torsion_order,
)
from .scenario import Grid, H0Table, LinkScenario, World
