"""Branch-and-prune solver for the numerical constraints of a Sarkisov link.

The search runs in two phases.

Discrete phase
    Branches are the integer data (b, a, d) of the contracted divisor F
    together with torsion labels of M and F.  Rules about linear systems
    (decompositions of M, the degree relation, the subsystem through the
    centre) prune branches using only the h0 table.

Numeric phase
    For each surviving branch the unknowns (centre index r, alpha, e, q_hat,
    and beta_k, s_k for each tracked class N_k) are enumerated over finite
    domains.  beta_k is solved from the main relation rather than guessed, so
    the enumeration is over (r, alpha, e, q_hat, s_k) only.  Domain bounds are
    derived from the active rules and logged.

Every pruning decision is written to the trace with enough bindings to
re-run the rule that made it (see ``replay_trace``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from math import floor, gcd
from typing import Callable, Optional

from .relations import degree_relation_solutions, local_multiple_t, solve_beta
from .scenario import Cls, LinkScenario, World

log = logging.getLogger(__name__)


class Outcome(str, Enum):
    CONTRADICTION = "CONTRADICTION"
    FORCED = "FORCED"
    FEASIBLE = "FEASIBLE"
    NON_BIRATIONAL = "NON_BIRATIONAL"
    REDUCES = "REDUCES"


class UnboundedDomain(ValueError):
    pass


@dataclass(frozen=True)
class TraceStep:
    rule: str
    bindings: tuple
    fact: str
    kill: bool = False
    world: str = ""

    def binding(self, key: str, default=None):
        return dict(self.bindings).get(key, default)


@dataclass(frozen=True)
class LinkSetup:
    q: int
    b: int
    mobile: Cls
    center: int
    alpha: Fraction
    beta: tuple[tuple[str, Fraction], ...]
    c: Fraction
    lam: Fraction
    delta: Fraction


@dataclass(frozen=True)
class LinkSolution:
    e: int
    s: tuple[tuple[str, int], ...]
    q_hat: int
    a: Optional[int]
    d: Optional[int]
    n: int
    j_F: Optional[int]
    slack: tuple[tuple[str, Fraction], ...]


@dataclass
class RuleTrace:
    scenario: str
    steps: list[TraceStep] = field(default_factory=list)
    outcome: Outcome = Outcome.CONTRADICTION
    forced: dict = field(default_factory=dict)
    relations: list[str] = field(default_factory=list)
    feasible: list[tuple[LinkSetup, LinkSolution]] = field(default_factory=list)
    condition: Optional[str] = None
    world_outcomes: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    source: Optional[LinkScenario] = field(default=None, repr=False)

    def add(self, rule: str, fact: str, kill: bool = False, world: str = "", **bindings) -> TraceStep:
        step = TraceStep(rule, tuple(sorted(bindings.items())), fact, kill, world)
        self.steps.append(step)
        return step

    def rules_used(self) -> list[str]:
        seen: list[str] = []
        for s in self.steps:
            if s.rule not in seen:
                seen.append(s.rule)
        return seen

    def summary(self) -> str:
        head = self.outcome.value
        if self.condition:
            head += f"({self.condition})"
        if self.forced:
            head += " forced{" + ", ".join(f"{k}={v}" for k, v in self.forced.items())
            if self.relations:
                head += ", " + ", ".join(self.relations)
            head += "}"
        return f"{self.scenario}: {head}"


# ---------------------------------------------------------------- branches


@dataclass(frozen=True)
class Branch:
    b: int
    j_M: int
    n: int
    e: Optional[int]
    a: Optional[int] = None
    d: Optional[int] = None
    j_F: Optional[int] = None
    tau: int = 0
    canonical: bool = False

    @property
    def M(self) -> Cls:
        return (self.b, self.j_M)

    @property
    def F(self) -> Optional[Cls]:
        return None if self.d is None else (self.d, self.j_F)

    def as_bindings(self) -> dict:
        out = {"b": self.b, "j_M": self.j_M, "n": self.n, "tau": self.tau}
        for k in ("a", "d", "e", "j_F"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        if self.canonical:
            out["canonical"] = True
        return out

    @classmethod
    def from_bindings(cls, bind: dict) -> "Branch":
        return cls(
            b=bind["b"], j_M=bind["j_M"], n=bind["n"], e=bind.get("e"), a=bind.get("a"),
            d=bind.get("d"), j_F=bind.get("j_F"), tau=bind.get("tau", 0),
            canonical=bind.get("canonical", False),
        )


@dataclass
class Ctx:
    scn: LinkScenario
    world: World

    @property
    def q(self) -> int:
        return self.scn.q

    @property
    def n(self) -> int:
        return self.world.n

    @property
    def table(self):
        return self.world.table

    @property
    def torsion_free(self) -> bool:
        return self.world.n == 1

    @property
    def local_data(self) -> bool:
        """Local multiples t are computable: trivial torsion and known indices."""
        return self.torsion_free and self.world.indices is not None and all(
            gcd(r, self.q) == 1 for r in self.world.indices)

    def cls_name(self, c: Cls) -> str:
        k, j = c[0], c[1] % self.n
        base = f"{k}A" if k != 1 else "A"
        return base if j == 0 else f"{base}+{j}T"

    def label(self, c: Cls) -> str:
        k, j = c[0], c[1] % self.n
        return str(k) if j == 0 else f"{k}+{j}T"

    def add(self, x: Cls, y: Cls) -> Cls:
        return (x[0] + y[0], (x[1] + y[1]) % self.n)

    def t_max(self, b: int) -> int:
        if not self.local_data:
            return 0
        return max([local_multiple_t(self.q, r, b) for r in self.world.indices] or [0])


# Discrete rules take (ctx, branch) and return (kill, fact or None).

def rule_tors(ctx: Ctx, br: Branch):
    g = gcd(br.b, br.d)
    if g != 1:
        return True, f"gcd(b, d) = gcd({br.b}, {br.d}) = {g}, classes of M and F cannot generate Cl(X)"
    return False, None


def rule_bsel(ctx: Ctx, br: Branch):
    want = ctx.scn.df + 1
    if not ctx.table.may_equal(br.M, want):
        lo, hi = ctx.table.bounds(*br.M)
        rng = f"{lo}" if lo == hi else f"[{lo}, {'inf' if hi is None else hi}]"
        return True, f"h0({ctx.cls_name(br.M)}) = {rng}, but the mobile system needs h0 = {want}"
    return False, None


def _f_shapes(ctx: Ctx, N: Cls) -> list[int]:
    """Degrees d for which some class F with m*F = N (m >= 1) could be effective."""
    out = []
    for dd in range(1, N[0] + 1):
        if N[0] % dd:
            continue
        m = N[0] // dd
        if any((m * jf - N[1]) % ctx.n == 0 and not ctx.table.empty((dd, jf)) for jf in range(ctx.n)):
            out.append(dd)
    return out


def r8_decompositions(ctx: Ctx, br: Branch) -> list[tuple[int, Cls]]:
    out = []
    for t in range(2, br.b + 1):
        if br.b % t:
            continue
        kN = br.b // t
        for jN in range(ctx.n):
            if (t * jN - br.j_M) % ctx.n:
                continue
            N = (kN, jN)
            if ctx.table.nonempty(N) or N == br.F:
                out.append((t, N))
    return out


def rule_r8(ctx: Ctx, br: Branch):
    decs = r8_decompositions(ctx, br)
    if not decs:
        return False, None
    parts = []
    problems = []
    for t, N in decs:
        shapes = _f_shapes(ctx, N)
        who = "F" if N == br.F else f"N in |{ctx.cls_name(N)}|"
        parts.append(f"M ~ {t}*N with {who} => Supp N = F => d in {{{', '.join(map(str, shapes))}}}")
        kN, jN = N
        m = kN // br.d if kN % br.d == 0 else 0
        if not m or (m * br.j_F - jN) % ctx.n or ctx.table.empty(br.F):
            problems.append(f"Supp N = F fails for N in |{ctx.cls_name(N)}| with d = {br.d}")
    if ctx.n != 1:
        problems.append(f"Cl(X) must be torsion free but n = {ctx.n}")
    if br.d != 1 or br.e != 1:
        problems.append(f"e = d = 1 required but d = {br.d}, e = {br.e}")
    if br.a < 2:
        problems.append(f"centre of F must be a point (a >= 2) but a = {br.a}")
    fact = "; ".join(parts)
    if problems:
        return True, fact + " :: " + "; ".join(problems)
    return False, fact


def r9_decompositions(ctx: Ctx, br: Branch) -> list[tuple[int, Cls, int, Cls]]:
    prim = [
        (k, j) for k in range(1, br.b) for j in range(ctx.n)
        if ctx.table.nonempty((k, j)) and ctx.table.irreducible((k, j))
    ]
    out = []
    for x in range(len(prim)):
        for y in range(x + 1, len(prim)):
            X, Y = prim[x], prim[y]
            for m1 in range(1, br.b // X[0] + 1):
                rest = br.b - m1 * X[0]
                if rest <= 0 or rest % Y[0]:
                    continue
                m2 = rest // Y[0]
                if (m1 * X[1] + m2 * Y[1] - br.j_M) % ctx.n == 0:
                    out.append((m1, X, m2, Y))
    return out


def rule_r9(ctx: Ctx, br: Branch):
    for m1, X, m2, Y in r9_decompositions(ctx, br):
        first = {X} | ({Y} if m1 == 1 else set())
        second = {Y} | ({X} if m2 == 1 else set())
        allowed = first & second
        if br.F not in allowed:
            names = ", ".join(ctx.cls_name(c) for c in sorted(allowed)) or "none"
            return True, (
                f"M contains {m1}*N1 + {m2}*N2 with prime N1 in |{ctx.cls_name(X)}|, "
                f"N2 in |{ctx.cls_name(Y)}| => F in {{{names}}}, but F ~ {ctx.cls_name(br.F)}"
            )
    return False, None


def rule_feff(ctx: Ctx, br: Branch):
    if ctx.table.empty(br.F):
        return True, f"F is effective but |{ctx.cls_name(br.F)}| is empty"
    return False, None


def rule_r15(ctx: Ctx, br: Branch):
    if br.a == 1:
        return False, "a = 1: F is contracted onto a curve"
    kind = "ordinary blowup of a point" if br.a == 2 else "weighted blowup of a point"
    return False, f"a = {br.a}: {kind}"


def rule_r10(ctx: Ctx, br: Branch):
    if br.a <= 1:
        return False, None
    ok = []
    for delta in range(1, br.b // br.d + 1):
        c = (br.b - delta * br.d, br.j_M - delta * br.j_F)
        if ctx.table.may_reach(c, 3):
            ok.append(delta)
    if not ok:
        return True, (
            f"a = {br.a} > 1 needs M ~ N + delta*F with h0(N) >= 3 and delta >= 1; "
            f"no class {ctx.cls_name((br.b - br.d, br.j_M - br.j_F))} or lower reaches 3"
        )
    return False, f"a > 1 leaves delta in {ok}"


def cartier_multiple(ctx: Ctx, D: Cls, M: Cls, K: Cls, limit: int = 10_000) -> Optional[int]:
    """Least m >= 1 with m*K a multiple of both D and M in Cl(X)."""
    def divisible(m: int, X: Cls) -> bool:
        if (m * K[0]) % X[0]:
            return False
        u = m * K[0] // X[0]
        return (u * X[1] - m * K[1]) % ctx.n == 0

    for m in range(1, limit):
        if divisible(m, D) and divisible(m, M):
            return m
    return None


def rule_split(ctx: Ctx, br: Branch):
    """-K ~ M + D with D prime and different from F forces a canonical pair."""
    if ctx.scn.target != "qds":
        return False, None
    D = (ctx.q - br.b, (br.tau - br.j_M) % ctx.n)
    if D[0] < 1 or not ctx.table.nonempty(D) or not ctx.table.irreducible(D) or D == br.F:
        return False, None
    head = (
        f"-K ~ M + D with D in |{ctx.cls_name(D)}| prime and D != F: pushing forward, "
        f"2 = s_b + s_D + gamma*e with s_b = s_D = 1, so gamma = 0 and c = 1"
    )
    problems = []
    if ctx.scn.enabled("R12") and ctx.world.indices is not None:
        m0 = cartier_multiple(ctx, D, br.M, (ctx.q, br.tau))
        bad = sorted({r for r in ctx.world.indices if m0 is None or m0 % r})
        if bad:
            problems.append(f"R12: {m0}K is Cartier but basket indices {bad} do not divide {m0}")
    if ctx.scn.enabled("R13") and ctx.local_data:
        bad = sorted({r for r in ctx.world.indices if local_multiple_t(ctx.q, r, br.b) not in (0, 1)})
        if bad:
            problems.append(f"R13: M is not -K near base points of index {bad}")
    if problems:
        return True, head + " :: " + "; ".join(problems)
    return False, head


DISCRETE_RULES: list[tuple[str, Callable]] = [
    ("TORS", rule_tors),
    ("BSEL", rule_bsel),
    ("R8", rule_r8),
    ("R9", rule_r9),
    ("FEFF", rule_feff),
    ("R15", rule_r15),
    ("R10", rule_r10),
    ("SPLIT", rule_split),
]
DISCRETE_BY_NAME = dict(DISCRETE_RULES)


def run_discrete(ctx: Ctx, br: Branch, trace: Optional[RuleTrace]) -> Optional[Branch]:
    """Apply discrete rules in order; return the (possibly refined) branch or None."""
    for name, fn in DISCRETE_RULES:
        if not ctx.scn.enabled(name):
            continue
        if br.d is None and name in ("TORS", "R8", "R9", "FEFF", "R15", "R10", "SPLIT"):
            continue
        kill, fact = fn(ctx, br)
        if fact and trace is not None:
            trace.add(name, fact, kill, ctx.world.label, **br.as_bindings())
        if kill:
            return None
        if name == "SPLIT" and fact:
            br = replace(br, canonical=True)
    return br


# ---------------------------------------------------------------- numeric phase


@dataclass(frozen=True)
class Tracked:
    label: str
    cls: Cls
    exact: bool
    is_mobile: bool


@dataclass
class Assignment:
    r: int
    alpha: Fraction
    e: int
    q_hat: int
    beta: dict = field(default_factory=dict)
    s: dict = field(default_factory=dict)

    def bindings(self) -> dict:
        out = {"r": self.r, "alpha": self.alpha, "e": self.e, "q_hat": self.q_hat}
        for k, v in self.beta.items():
            out[f"beta_{k}"] = v
        for k, v in self.s.items():
            out[f"s_{k}"] = v
        return out

    @classmethod
    def from_bindings(cls, bind: dict) -> "Assignment":
        asg = cls(bind["r"], Fraction(bind["alpha"]), bind["e"], bind["q_hat"])
        for key, v in bind.items():
            if key.startswith("beta_"):
                asg.beta[key[5:]] = Fraction(v)
            elif key.startswith("s_"):
                asg.s[key[2:]] = v
        return asg


def tracked_classes(ctx: Ctx, br: Branch) -> list[Tracked]:
    q, n = ctx.q, ctx.n
    exact_m = (q * br.j_M - br.b * br.tau) % n == 0
    out = [Tracked(ctx.label(br.M), br.M, exact_m, True)]
    for k in range(1, br.b):
        if ctx.scn.k_set is not None and k not in ctx.scn.k_set:
            continue
        for j in range(n):
            if (q * j - k * br.tau) % n:
                continue
            if ctx.table.nonempty((k, j)):
                out.append(Tracked(ctx.label((k, j)), (k, j), True, False))
    return out


# Numeric rules return a violation message or None.  ``x`` is the class
# just assigned (None for alpha-level checks).

def nr_r11(ctx, br, asg, x):
    if asg.r > 1 and ctx.world.indices is not None and ctx.world.multiplicity(asg.r) == 1:
        if asg.alpha != Fraction(1, asg.r):
            return f"single point of index {asg.r} is a cyclic quotient, so alpha = 1/{asg.r}, not {asg.alpha}"
    return None


def nr_grid(ctx, br, asg, x):
    g = ctx.scn.grid
    if g is not None and not g.contains(asg.beta[x.label]):
        return f"beta_{x.label} = {asg.beta[x.label]} outside the grid"
    return None


def nr_r6(ctx, br, asg, x):
    v = asg.r * asg.beta[x.label]
    if v.denominator != 1:
        return f"{asg.r}*beta_{x.label} = {v} is not an integer"
    return None


def nr_r5(ctx, br, asg, x):
    if not x.exact:
        return None
    v = ctx.q * asg.beta[x.label] - x.cls[0] * asg.alpha
    if v.denominator != 1:
        return f"q*beta_{x.label} - {x.cls[0]}*alpha = {v} is not an integer"
    return None


def nr_r7(ctx, br, asg, x):
    if asg.r == 1 or not ctx.local_data or asg.r not in ctx.world.indices:
        return None
    t = local_multiple_t(ctx.q, asg.r, x.cls[0])
    if t and asg.beta[x.label] <= 0:
        return f"N_{x.label} is not Cartier at the centre (t = {t}), so beta_{x.label} > 0"
    return None


def nr_r4(ctx, br, asg, x):
    if ctx.table.bounds(*x.cls)[0] >= 2 and asg.s[x.label] < 1:
        return f"h0({ctx.cls_name(x.cls)}) >= 2 so a general member survives: s_{x.label} >= 1"
    return None


def nr_subadd(ctx, br, asg, x, classes):
    by_cls = {c.cls: c.label for c in classes if c.label in asg.beta}
    for c1, l1 in by_cls.items():
        for c2, l2 in by_cls.items():
            tot = ctx.add(c1, c2)
            if tot not in by_cls:
                continue
            l3 = by_cls[tot]
            if x.label not in (l1, l2, l3):
                continue
            if asg.beta[l3] > asg.beta[l1] + asg.beta[l2]:
                return f"N_{l1} + N_{l2} lies in N_{l3}, so beta_{l3} <= beta_{l1} + beta_{l2}"
    return None


def nr_ct(ctx, br, asg, x):
    if asg.beta[x.label] < asg.alpha:
        return f"pair is not terminal: c <= 1 needs beta_{x.label} >= alpha"
    return None


def nr_thresh(ctx, br, asg, x):
    t = ctx.t_max(br.b)
    if t > 1 and asg.beta[x.label] < t * asg.alpha:
        return f"some point has M ~ {t}(-K) locally, so beta_{x.label} >= {t}*alpha"
    return None


def nr_lc(ctx, br, asg, x):
    if ctx.q * asg.beta[x.label] <= br.b * asg.alpha:
        return f"lambda = {Fraction(ctx.q, br.b)} must exceed c"
    return None


def nr_r13(ctx, br, asg, x):
    if asg.beta[x.label] != asg.alpha or not ctx.local_data:
        return None
    bad = sorted({r for r in ctx.world.indices if local_multiple_t(ctx.q, r, br.b) not in (0, 1)})
    if bad:
        return f"c = 1 forces M ~ -K at base points, violated at indices {bad}"
    return None


def nr_splitc(ctx, br, asg, x):
    if br.canonical and asg.beta[x.label] != asg.alpha:
        return "anticanonical split forces c = 1"
    return None


def nr_r3(ctx, br, asg, x):
    s = asg.s[x.label]
    if s >= 1 and Fraction(asg.q_hat, s) <= Fraction(ctx.q, br.b):
        return f"lambda must increase: q_hat/s_b = {Fraction(asg.q_hat, s)} <= {Fraction(ctx.q, br.b)}"
    return None


ALPHA_RULES = [("R11", nr_r11)]
CLASS_RULES = [("GRID", nr_grid), ("R6", nr_r6), ("R5", nr_r5), ("R7", nr_r7)]
MOBILE_RULES = [("CT", nr_ct), ("THRESH", nr_thresh), ("LC", nr_lc), ("R13", nr_r13),
                ("SPLIT", nr_splitc), ("R3", nr_r3)]
NUMERIC_BY_NAME = dict(ALPHA_RULES + CLASS_RULES + MOBILE_RULES + [("R4", nr_r4)])


def check_numeric(name: str, ctx: Ctx, br: Branch, asg: Assignment, x: Optional[Tracked],
                  classes: list[Tracked]) -> Optional[str]:
    if name == "SUBADD":
        return nr_subadd(ctx, br, asg, x, classes)
    return NUMERIC_BY_NAME[name](ctx, br, asg, x)


def numeric_domain(ctx: Ctx, br: Branch) -> dict:
    """Finite domains for the numeric phase, derived from the active rules."""
    scn, q, b = ctx.scn, ctx.q, br.b
    qds = scn.target == "qds"
    T = 1 if scn.enabled("CT") else 0
    if scn.enabled("THRESH"):
        T = max(T, ctx.t_max(b))
    q_hats = [2] if qds else list(range(1, scn.q_hat_max + 1))
    s_b_min = 1 if qds and scn.enabled("R14") else 0
    e_vals = [br.e] if br.e is not None else list(range(1, b * scn.q_hat_max + 1))
    alpha_max = None
    if q * T - b > 0 and scn.enabled("LC"):
        alpha_max = Fraction(b * max(q_hats) - q * s_b_min, (q * T - b) * min(e_vals))
    if scn.grid is not None:
        alpha_max = scn.grid.top if alpha_max is None else min(alpha_max, scn.grid.top)
    if alpha_max is None:
        raise UnboundedDomain(f"{scn.name}: alpha is unbounded with the active rules; supply a grid")
    if ctx.world.indices is not None:
        centers = [1] + sorted(set(ctx.world.indices))
    else:
        centers = list(range(1, scn.max_center_index + 1))
    return {"alpha_max": alpha_max, "T": T, "centers": centers, "e": e_vals, "q_hat": q_hats,
            "s_b": [1] if qds and scn.enabled("R14") else None}


def alpha_values(r: int, alpha_max: Fraction, grid) -> list[Fraction]:
    step = Fraction(1) if r == 1 else Fraction(1, r)
    out = []
    m = 1
    while m * step <= alpha_max:
        a = m * step
        if grid is None or grid.contains(a):
            out.append(a)
        m += 1
    return out


class _Kills:
    def __init__(self) -> None:
        self.count: dict[str, int] = {}
        self.example: dict[str, tuple[str, dict, Optional[str]]] = {}

    def note(self, rule: str, msg: str, bind: dict, label: Optional[str]) -> None:
        if rule not in self.count:
            self.count[rule] = 0
            self.example[rule] = (msg, bind, label)
        self.count[rule] += 1


def run_numeric(ctx: Ctx, br: Branch, trace: Optional[RuleTrace]) -> tuple[list, list]:
    """Enumerate assignments; return (pre-R4 survivors, survivors) for free targets,
    (survivors, survivors) for QDS targets."""
    scn = ctx.scn
    classes = tracked_classes(ctx, br)
    mobile = classes[0]
    others = classes[1:]
    dom = numeric_domain(ctx, br)
    if trace is not None:
        cs, es = dom["centers"], dom["e"]
        centres = str(cs) if len(cs) < 8 else f"1..{max(cs)}"
        evals = str(es) if len(es) < 4 else f"1..{max(es)}"
        trace.add("DOMAIN", (
            f"centres {centres}, alpha <= {dom['alpha_max']}, e in {evals}, q_hat in {dom['q_hat']}, "
            f"tracked N: {', '.join(c.label for c in classes)}"
        ), False, ctx.world.label, **br.as_bindings())
    free = scn.target != "qds"
    defer_r4 = free
    kills = _Kills()
    pre: list[Assignment] = []
    post: list[Assignment] = []

    def fail(rule, msg, asg, x) -> None:
        bind = {**br.as_bindings(), **asg.bindings()}
        kills.note(rule, msg, bind, None if x is None else x.label)

    def class_ok(asg: Assignment, x: Tracked) -> bool:
        for name, _ in CLASS_RULES:
            if scn.enabled(name):
                msg = check_numeric(name, ctx, br, asg, x, classes)
                if msg:
                    fail(name, msg, asg, x)
                    return False
        if scn.enabled("SUBADD"):
            msg = nr_subadd(ctx, br, asg, x, classes)
            if msg:
                fail("SUBADD", msg, asg, x)
                return False
        if not defer_r4 and scn.enabled("R4"):
            msg = nr_r4(ctx, br, asg, x)
            if msg:
                fail("R4", msg, asg, x)
                return False
        return True

    def extend(asg: Assignment, idx: int) -> None:
        if idx == len(others):
            snap = Assignment(asg.r, asg.alpha, asg.e, asg.q_hat, dict(asg.beta), dict(asg.s))
            pre.append(snap)
            if defer_r4 and scn.enabled("R4"):
                for x in classes:
                    msg = nr_r4(ctx, br, snap, x)
                    if msg:
                        fail("R4", msg, snap, x)
                        return
            post.append(snap)
            return
        x = others[idx]
        k = x.cls[0]
        top = floor(Fraction(k * asg.q_hat, ctx.q) + k * asg.alpha * asg.e / ctx.q)
        for s in range(0, top + 1):
            beta = solve_beta(ctx.q, asg.q_hat, k, s, asg.alpha, asg.e)
            if beta < 0:
                continue
            asg.beta[x.label], asg.s[x.label] = beta, s
            if class_ok(asg, x):
                extend(asg, idx + 1)
            del asg.beta[x.label], asg.s[x.label]

    b = br.b
    for r in dom["centers"]:
        for alpha in alpha_values(r, dom["alpha_max"], scn.grid):
            asg = Assignment(r, alpha, 0, 0)
            bad = None
            for name, fn in ALPHA_RULES:
                if scn.enabled(name):
                    msg = fn(ctx, br, asg, None)
                    if msg:
                        bad = (name, msg)
                        break
            if bad:
                asg.e, asg.q_hat = dom["e"][0], dom["q_hat"][0]
                fail(bad[0], bad[1], asg, None)
                continue
            for e in dom["e"]:
                for qh in dom["q_hat"]:
                    asg = Assignment(r, alpha, e, qh)
                    if dom["s_b"] is not None:
                        sbs = dom["s_b"]
                    else:
                        sbs = range(0, floor(Fraction(b * qh, ctx.q) + b * alpha * e / ctx.q) + 1)
                    for s_b in sbs:
                        beta_b = solve_beta(ctx.q, qh, b, s_b, alpha, e)
                        if beta_b < 0:
                            continue
                        asg.beta = {mobile.label: beta_b}
                        asg.s = {mobile.label: s_b}
                        if not class_ok(asg, mobile):
                            continue
                        ok = True
                        for name, fn in MOBILE_RULES:
                            if scn.enabled(name):
                                msg = fn(ctx, br, asg, mobile)
                                if msg:
                                    fail(name, msg, asg, mobile)
                                    ok = False
                                    break
                        if ok:
                            extend(asg, 0)
    if trace is not None:
        for rule in sorted(kills.count, key=lambda k: -kills.count[k]):
            msg, bind, label = kills.example[rule]
            trace.add(rule, f"eliminates {kills.count[rule]} assignment(s), e.g. {msg}", True,
                      ctx.world.label, **bind, **({"cls": label} if label else {}))
    setups = [_package(ctx, br, classes, a) for a in post]
    pres = [_package(ctx, br, classes, a) for a in pre]
    return pres, setups


def _package(ctx: Ctx, br: Branch, classes: list[Tracked], asg: Assignment):
    m = classes[0].label
    beta_b = asg.beta[m]
    c = asg.alpha / beta_b if beta_b else Fraction(10**9)
    lam = Fraction(ctx.q, br.b)
    setup = LinkSetup(
        q=ctx.q, b=br.b, mobile=br.M, center=asg.r, alpha=asg.alpha,
        beta=tuple((x.label, asg.beta[x.label]) for x in classes),
        c=c, lam=lam, delta=asg.alpha * (lam / c - 1) if beta_b else Fraction(0),
    )
    sol = LinkSolution(
        e=asg.e, s=tuple((x.label, asg.s[x.label]) for x in classes), q_hat=asg.q_hat,
        a=br.a, d=br.d, n=br.n, j_F=br.j_F,
        slack=tuple((x.label, ctx.q * asg.beta[x.label] - x.cls[0] * asg.alpha) for x in classes),
    )
    return setup, sol


# ---------------------------------------------------------------- driver


def world_branches(ctx: Ctx, trace: Optional[RuleTrace]) -> list[Branch]:
    scn, q, n = ctx.scn, ctx.q, ctx.n
    if scn.target != "qds":
        b, j = scn.mobile
        return [Branch(b=b, j_M=j % n, n=n, e=None)]
    sols = sorted(degree_relation_solutions(q), reverse=True)
    if trace is not None:
        trace.add("DEG", "2b = q + a*d with b < q gives (b, a, d) in " + ", ".join(map(str, sols)),
                  False, ctx.world.label, q=q)
    out = []
    for b, a, d in sols:
        for j_M in range(n):
            for j_F in range(n):
                tau = (2 * j_M - a * j_F) % n
                out.append(Branch(b=b, j_M=j_M, n=n, e=n * d, a=a, d=d, j_F=j_F, tau=tau))
    return out


def retarget(ctx: Ctx) -> Optional[tuple[Cls, int, Cls]]:
    """An alternative mobile class whose own link cannot end at the quartic double solid."""
    if ctx.n == 1 or ctx.scn.target != "qds":
        return None
    want = ctx.scn.df + 1
    for b2 in range(ctx.q - 1, 0, -1):
        for j2 in range(ctx.n):
            c = (b2, j2)
            if ctx.table.exact(c) != want:
                continue
            for t in range(2, b2 + 1):
                if b2 % t:
                    continue
                for jN in range(ctx.n):
                    N = (b2 // t, jN)
                    if (t * jN - j2) % ctx.n == 0 and ctx.table.nonempty(N):
                        return c, t, N
    return None


def _forced(solutions: list[tuple[LinkSetup, LinkSolution]]) -> tuple[dict, list[str]]:
    if not solutions:
        return {}, []
    rows = []
    for setup, sol in solutions:
        row = {"r": setup.center, "alpha": setup.alpha}
        for lab, v in setup.beta:
            row[f"beta_{lab}"] = v
        for lab, v in sol.s:
            row[f"s_{lab}"] = v
        row["q_hat"] = sol.q_hat
        row["e"] = sol.e
        rows.append(row)
    keys = list(rows[0])
    forced = {k: rows[0][k] for k in keys if all(r[k] == rows[0][k] for r in rows)}
    free = [k for k in keys if k not in forced]
    rel = []
    for i, x in enumerate(free):
        for y in free[i + 1:]:
            if all(r[x] == r[y] for r in rows):
                rel.append(f"{x}={y}")
    return forced, rel


def _run_world(scn: LinkScenario, world: World, trace: RuleTrace) -> tuple[Outcome, list, list, Optional[str]]:
    ctx = Ctx(scn, world)
    trace.add("WORLD", f"{world.label}: n = {world.n}" + (f", indices {world.indices}" if world.indices else "")
              + (f", source {world.source}" if world.source else ""), False, world.label)
    survivors_pre: list = []
    survivors: list = []
    for br in world_branches(ctx, trace):
        trace.add("BRANCH", f"try {ctx.cls_name(br.M)}" + (
            f", F ~ {ctx.cls_name(br.F)}, a = {br.a}, e = {br.e}" if br.d is not None else ""),
            False, world.label, **br.as_bindings())
        refined = run_discrete(ctx, br, trace)
        if refined is None:
            continue
        pre, post = run_numeric(ctx, refined, trace)
        survivors_pre.extend(pre)
        survivors.extend(post)
        trace.add("NUMERIC", f"{len(post)} assignment(s) survive" + (
            f" ({len(pre)} before R4)" if len(pre) != len(post) else ""),
            len(post) == 0, world.label, **refined.as_bindings())
    if scn.target == "qds":
        if not survivors:
            return Outcome.CONTRADICTION, [], [], None
        alt = retarget(ctx) if scn.enabled("RETARGET") else None
        if alt is not None:
            c, t, N = alt
            trace.add("RETARGET", (
                f"take M' = |{ctx.cls_name(c)}| (dimension {scn.df}, lambda = {Fraction(scn.q, c[0])}); "
                f"M' contains {t}*N with N in |{ctx.cls_name(N)}| and Cl(X) has torsion, so by R8 its link "
                f"does not end at the quartic double solid; by R3 the next model has q_hat > {scn.q}"),
                False, world.label, b=c[0], j=c[1], t=t)
            return Outcome.REDUCES, survivors, survivors, f"q_hat>{scn.q}"
        return Outcome.FEASIBLE, survivors, survivors, None
    if survivors:
        return Outcome.FEASIBLE, survivors_pre, survivors, None
    if survivors_pre:
        return Outcome.NON_BIRATIONAL, survivors_pre, [], None
    return Outcome.CONTRADICTION, [], [], None


def apply_rules(scn: LinkScenario) -> RuleTrace:
    """Run the scenario to an outcome with a full trace."""
    trace = RuleTrace(scn.name, source=scn)
    trace.add("SETUP", f"q = {scn.q}, df = {scn.df}, target = {scn.target}"
              + (f", disabled {sorted(scn.disabled)}" if scn.disabled else ""), False)
    outcomes = []
    all_pre: list = []
    all_post: list = []
    conditions = []
    for w in scn.worlds:
        out, pre, post, cond = _run_world(scn, w, trace)
        trace.world_outcomes[w.label] = out
        outcomes.append(out)
        all_pre.extend(pre)
        all_post.extend(post)
        if cond:
            conditions.append(cond)
    if Outcome.FEASIBLE in outcomes:
        final = Outcome.FEASIBLE
    elif Outcome.REDUCES in outcomes:
        final = Outcome.REDUCES
    elif Outcome.NON_BIRATIONAL in outcomes:
        final = Outcome.NON_BIRATIONAL
    else:
        final = Outcome.CONTRADICTION
    trace.feasible = all_post
    if final == Outcome.NON_BIRATIONAL:
        trace.forced, trace.relations = _forced(all_pre)
        trace.feasible = all_pre
        trace.add("FORCED", ", ".join(f"{k}={v}" for k, v in trace.forced.items())
                  + (", " + ", ".join(trace.relations) if trace.relations else ""), False)
        trace.add("R4", "every solution has s_b = 0 although dim M >= 1, so the contraction "
                  "onto the last model is not birational", True)
    elif final == Outcome.FEASIBLE:
        trace.forced, trace.relations = _forced(all_post)
    if final == Outcome.REDUCES:
        trace.condition = conditions[0]
        if scn.chain is not None and scn.enabled("CHAIN"):
            bound = scn.q
            results = scn.chain(bound)
            closed = all(o == Outcome.CONTRADICTION for _, o in results)
            trace.add("CHAIN", f"models with {bound} < q_hat <= {scn.q_hat_max}: "
                      + ", ".join(f"{name} -> {o.value}" for name, o in results), False, q_bound=bound)
            if closed:
                final = Outcome.CONTRADICTION
                trace.condition = None
                trace.add("CHAIN", f"every model with q_hat > {bound} is excluded", True)
    trace.outcome = final
    trace.add("OUTCOME", trace.summary().split(": ", 1)[1], final == Outcome.CONTRADICTION)
    trace.bounds = {w.label: None for w in scn.worlds}
    return trace


def replay_trace(trace: RuleTrace, scn: Optional[LinkScenario] = None) -> bool:
    """Re-run every recorded pruning step on its bindings and the whole scenario.

    True when each kill step is reproduced by its rule and the re-run yields
    an identical trace.
    """
    scn = scn or trace.source
    if scn is None:
        raise ValueError("trace carries no scenario")
    worlds = {w.label: w for w in scn.worlds}
    for step in trace.steps:
        if not step.kill or step.world not in worlds:
            continue
        ctx = Ctx(scn, worlds[step.world])
        bind = dict(step.bindings)
        if "b" not in bind:
            continue
        br = Branch.from_bindings(bind)
        numeric = "alpha" in bind
        if step.rule in DISCRETE_BY_NAME and not numeric:
            kill, fact = DISCRETE_BY_NAME[step.rule](ctx, br)
            if not kill or fact != step.fact:
                return False
        elif step.rule in NUMERIC_BY_NAME or step.rule == "SUBADD":
            asg = Assignment.from_bindings(bind)
            classes = tracked_classes(ctx, br)
            lab = bind.get("cls")
            x = next((c for c in classes if c.label == lab), classes[0]) if lab is not None else None
            msg = check_numeric(step.rule, ctx, br, asg, x, classes)
            if msg is None or msg not in step.fact:
                return False
    again = apply_rules(scn)
    return again.steps == trace.steps and again.outcome == trace.outcome
