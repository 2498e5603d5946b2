"""Shared fixtures and random-instance generators.

The generators build small regulations (and examination extensions) whose
assignment spaces stay under the brute-force oracle cap, so solver output can
be compared against definitional enumeration.  All randomness is driven by
caller-supplied `random.Random` objects; the test files fix their seeds.
"""

from __future__ import annotations

import random
from contextlib import contextmanager
from pathlib import Path

import pytest

import regula
from regula.dsl import parse_exam_plan, parse_instance, parse_study_plan
from regula.model import (
    After,
    Before,
    Between,
    Card,
    Comparison,
    Empty,
    ExamSpec,
    ExamUnion,
    Implies,
    Intersect,
    Literal,
    NamedSet,
    PlanUnion,
    Regulation,
    SeasonSet,
    SemesterSet,
    SubsetEq,
    Sum,
    Turnus,
)
from regula.solver import SolveRequest, brute_force_oracle, consequences, solve

INSTANCE_DIR = Path(regula.__file__).resolve().parent / "instances"


def read_instance(name: str) -> str:
    return (INSTANCE_DIR / name).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# Bundled instances
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def cogsys_text() -> str:
    return read_instance("cogsys.reg")


@pytest.fixture(scope="session")
def cogsys(cogsys_text):
    return parse_instance(cogsys_text)


@pytest.fixture(scope="session")
def cogsys_reg(cogsys) -> Regulation:
    return cogsys[0]


@pytest.fixture(scope="session")
def cogsys_exam(cogsys) -> ExamSpec:
    return cogsys[1]


@pytest.fixture(scope="session")
def reference_plan(cogsys_reg):
    return parse_study_plan(read_instance("plan_example.plan"), cogsys_reg)


@pytest.fixture(scope="session")
def reference_exam_plan(cogsys_exam):
    return parse_exam_plan(read_instance("exam_example.eplan"), cogsys_exam)


@pytest.fixture(scope="session")
def exam_prime_plan(cogsys_exam):
    return parse_exam_plan(read_instance("exam_prime.eplan"), cogsys_exam)


@pytest.fixture(scope="session")
def toy_text() -> str:
    return read_instance("toy.reg")


@pytest.fixture(scope="session")
def toy(toy_text):
    return parse_instance(toy_text)


@pytest.fixture(scope="session")
def toy_reg(toy) -> Regulation:
    return toy[0]


@pytest.fixture(scope="session")
def toy_exam():
    return parse_instance(read_instance("toy_exam.reg"))


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

#: Module disjointness plus the two season-compatibility rules; every
#: generated regulation carries them, like the bundled instances do.
BUILTIN_TEMPORAL = (
    Empty(Intersect(SemesterSet("I"), SemesterSet("J"))),
    Empty(Intersect(SeasonSet("w"), SemesterSet("even"))),
    Empty(Intersect(SeasonSet("s"), SemesterSet("odd"))),
)

_TURNUS_CHOICES = (Turnus.WINTER, Turnus.SUMMER, Turnus.EVERY, Turnus.EVERY)


def _taken(name: str) -> Intersect:
    return Intersect(NamedSet(name), PlanUnion())


def random_regulation(rng: random.Random, max_modules: int = 6) -> Regulation:
    """A small well-formed regulation with randomized groups, credit bounds,
    season maps, and a mix of compiled and leaf-checked constraint shapes."""
    count = rng.randint(2, max_modules)
    modules = tuple(f"m{i}" for i in range(1, count + 1))
    credits = {mod: rng.randint(1, 9) for mod in modules}
    turnus = {mod: rng.choice(_TURNUS_CHOICES) for mod in modules}

    groups: dict[str, frozenset[str]] = {}
    for name in ("g1", "g2"):
        if rng.random() < 0.6:
            groups[name] = frozenset(rng.sample(modules, rng.randint(1, count)))
    named_sets: dict[str, frozenset[str]] = {}
    if rng.random() < 0.5:
        named_sets["e"] = frozenset(
            rng.sample(modules, rng.randint(1, min(2, count))))

    lower: dict[str, int] = {}
    upper: dict[str, int] = {}
    global_constraints = []
    for name in (*sorted(groups), "m"):
        if rng.random() >= (0.7 if name == "m" else 0.4):
            continue
        pool = modules if name == "m" else groups[name]
        total = sum(credits[mod] for mod in pool)
        lo = rng.randint(0, max(1, (total * 7) // 10))
        hi = rng.randint(lo, total)
        shape = rng.random()
        if shape < 0.6:
            lower[name], upper[name] = lo, hi
            cmp = Comparison("bw", (lo, hi))
        elif shape < 0.8:
            upper[name] = hi
            cmp = Comparison("leq", hi)
        else:
            lower[name] = lo
            cmp = Comparison("geq", lo)
        global_constraints.append(Sum(_taken(name), "c", cmp))
    if "e" in named_sets and rng.random() < 0.7:
        global_constraints.append(SubsetEq(NamedSet("e"), PlanUnion()))
    if groups and rng.random() < 0.35:
        name = rng.choice(sorted(groups))
        op = rng.choice(("leq", "geq", "eq"))
        global_constraints.append(
            Card(_taken(name), Comparison(op, rng.randint(0, len(groups[name])))))
    if rng.random() < 0.15:
        absent, wanted = rng.sample(modules, 2)
        global_constraints.append(
            Implies(Empty(Intersect(Literal(frozenset({absent})), PlanUnion())),
                    SubsetEq(Literal(frozenset({wanted})), PlanUnion())))

    temporal = list(BUILTIN_TEMPORAL)
    anchors = sorted(groups) + sorted(named_sets)
    if anchors and rng.random() < 0.3:
        op = rng.choice(("geq", "leq"))
        bound = rng.randint(0, max(1, sum(credits.values()) // 2))
        temporal.append(
            Sum(Before(NamedSet(rng.choice(anchors))), "c", Comparison(op, bound)))
    if rng.random() < 0.25:
        temporal.append(Card(SemesterSet("I"), Comparison("leq", rng.randint(1, 4))))
    if anchors and rng.random() < 0.2:
        index = rng.choice((1, 2, "even", "odd"))
        temporal.append(
            Empty(Intersect(NamedSet(rng.choice(anchors)), SemesterSet(index))))
    if anchors and rng.random() < 0.1:
        temporal.append(
            Card(After(NamedSet(rng.choice(anchors))),
                 Comparison("leq", rng.randint(0, count))))
    if len(anchors) >= 2 and rng.random() < 0.08:
        first, second = rng.sample(anchors, 2)
        temporal.append(
            Card(Between(NamedSet(first), NamedSet(second)),
                 Comparison("leq", rng.randint(0, count))))

    return Regulation(
        modules=frozenset(modules),
        groups=groups,
        credits=credits,
        turnus=turnus,
        lower=lower,
        upper=upper,
        named_sets=named_sets,
        global_constraints=tuple(global_constraints),
        temporal_constraints=tuple(temporal),
    )


def random_exam_instance(
        rng: random.Random, max_tasks: int = 6) -> tuple[Regulation, ExamSpec]:
    """A tiny regulation plus examination extension with at most `max_tasks`
    tasks, small enough for the exam-mode brute-force oracle."""
    count = rng.randint(1, 3)
    modules = tuple(f"m{i}" for i in range(1, count + 1))
    credits = {mod: rng.randint(1, 6) for mod in modules}
    turnus = {mod: rng.choice(_TURNUS_CHOICES) for mod in modules}
    global_constraints = []
    if rng.random() < 0.3:
        total = sum(credits.values())
        global_constraints.append(
            Sum(_taken("m"), "c", Comparison("leq", rng.randint(total // 2, total))))
    reg = Regulation(
        modules=frozenset(modules),
        groups={},
        credits=credits,
        turnus=turnus,
        lower={},
        upper={},
        named_sets={},
        global_constraints=tuple(global_constraints),
        temporal_constraints=BUILTIN_TEMPORAL,
    )

    ep: dict[str, frozenset] = {}
    es: dict[str, frozenset] = {}
    deps = set()
    primary: list[str] = []
    secondary: list[str] = []
    budget = rng.randint(2, max_tasks)

    def fresh(kind: str, pool: list[str]) -> str:
        task = f"{kind}{len(primary) + len(secondary) + 1}"
        pool.append(task)
        return task

    for mod in modules:
        if budget <= 0 or (ep and rng.random() < 0.25):
            continue
        shape = rng.random()
        if budget >= 2 and shape < 0.3:
            ep[mod] = frozenset({frozenset({fresh("p", primary)}),
                                 frozenset({fresh("p", primary)})})
            budget -= 2
        elif budget >= 2 and shape < 0.5:
            ep[mod] = frozenset({frozenset({fresh("p", primary),
                                            fresh("p", primary)})})
            budget -= 2
        else:
            ep[mod] = frozenset({frozenset({fresh("p", primary)})})
            budget -= 1
        shape = rng.random()
        if budget <= 0 or shape < 0.45:
            es[mod] = frozenset({frozenset()})
        elif budget >= 2 and shape < 0.6:
            es[mod] = frozenset({frozenset({fresh("q", secondary),
                                            fresh("q", secondary)})})
            budget -= 2
        else:
            es[mod] = frozenset({frozenset({fresh("q", secondary)})})
            budget -= 1
        combos = [v for v in es[mod] if v]
        if combos and rng.random() < 0.5:
            head = sorted(rng.choice(sorted(ep[mod], key=sorted)))[0]
            deps.add((frozenset({rng.choice(combos)}), frozenset({head})))

    exam_global = ()
    exam_temporal = ()
    if rng.random() < 0.25:
        exam_global = (Card(ExamUnion(),
                            Comparison("leq", rng.randint(1, max_tasks))),)
    if (primary or secondary) and rng.random() < 0.1:
        banned = rng.choice(primary + secondary)
        exam_temporal = (Empty(Intersect(ExamUnion(),
                                         Literal(frozenset({banned})))),)

    exam = ExamSpec(
        primary_tasks=frozenset(primary),
        secondary_tasks=frozenset(secondary),
        ep=ep,
        es=es,
        deps=frozenset(deps),
        exam_global_constraints=exam_global,
        exam_temporal_constraints=exam_temporal,
    )
    return reg, exam


def random_assumptions(rng: random.Random, reg: Regulation, horizon: int,
                       count: int = 1) -> tuple:
    from regula.model import Assumption

    out = []
    modules = sorted(reg.modules)
    for _ in range(count):
        out.append(Assumption(rng.choice(modules), rng.randint(1, horizon),
                              rng.choice(("assigned", "excluded"))))
    return tuple(out)


# ---------------------------------------------------------------------------
# Oracle comparison
# ---------------------------------------------------------------------------

def study_component(solution):
    return solution[1] if isinstance(solution, tuple) else solution


def oracle_check(req: SolveRequest, cap: int = 10_000_000) -> list[str]:
    """Compare solve() and consequences() against definitional enumeration.

    Returns human-readable mismatch descriptions; an empty list means full
    agreement (solution-set equality plus per-semester intersection/union).
    """
    mismatches: list[str] = []
    solved = solve(req)
    oracle = brute_force_oracle(req, cap=cap)
    if len(solved) != len(set(solved)):
        mismatches.append(f"{len(solved) - len(set(solved))} duplicate solutions")
    if set(solved) != set(oracle):
        mismatches.append(
            f"solution sets differ ({len(solved)} solved vs {len(oracle)} oracle)")

    report = consequences(req)
    n = req.horizon
    plans = [study_component(sol) for sol in oracle]
    empties = tuple(frozenset() for _ in range(n))
    if plans:
        want_possible = tuple(
            frozenset().union(*(p.semesters[i] for p in plans)) for i in range(n))
        want_forced = tuple(
            frozenset(plans[0].semesters[i]).intersection(
                *(p.semesters[i] for p in plans)) for i in range(n))
        if not report.satisfiable:
            mismatches.append("reported unsatisfiable, oracle finds solutions")
    else:
        want_possible = want_forced = empties
        if report.satisfiable:
            mismatches.append("reported satisfiable, oracle finds nothing")
    if report.forced != want_forced:
        mismatches.append(f"forced {report.forced} != oracle {want_forced}")
    if report.possible != want_possible:
        mismatches.append(f"possible {report.possible} != oracle {want_possible}")
    return mismatches


def oracle_batch(study_count: int, exam_count: int, base_seed: int) -> list[str]:
    """Run the oracle comparison over freshly generated instances; returns all
    mismatches, tagged with the seed that produced them."""
    failures: list[str] = []
    for i in range(study_count):
        rng = random.Random(base_seed + i)
        reg = random_regulation(rng)
        horizon = rng.randint(1, 3)
        assumptions = (random_assumptions(rng, reg, horizon)
                       if rng.random() < 0.3 else ())
        req = SolveRequest(reg, horizon, assumptions=assumptions)
        for text in oracle_check(req):
            failures.append(f"study seed {base_seed + i}: {text}")
    for i in range(exam_count):
        rng = random.Random(base_seed + 100_000 + i)
        reg, exam = random_exam_instance(rng)
        horizon = rng.randint(1, 3)
        req = SolveRequest(reg, horizon, exam=exam, mode="exam")
        for text in oracle_check(req):
            failures.append(f"exam seed {base_seed + 100_000 + i}: {text}")
    return failures


# ---------------------------------------------------------------------------
# Acceptance reporting
# ---------------------------------------------------------------------------

ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


@contextmanager
def acceptance(name: str):
    """Record and print one PASS/FAIL line per acceptance criterion."""
    try:
        yield
    except BaseException:
        ACCEPTANCE_RESULTS.append((name, "FAIL"))
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    ACCEPTANCE_RESULTS.append((name, "PASS"))
    print(f"ACCEPTANCE {name}: PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"ACCEPTANCE {name}: {status}")
