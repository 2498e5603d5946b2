"""Regulation-language parsing, pooling, serialization, and plan files."""

from __future__ import annotations

import random

import pytest

from conftest import read_instance
from regula.dsl import (
    ParseError,
    Pool,
    expand_pool,
    parse_exam_plan,
    parse_facts,
    parse_instance,
    parse_study_plan,
    render_constraint,
    render_set,
    serialize_instance,
    serialize_plan,
)
from regula.model import (
    Before,
    Card,
    Comparison,
    Empty,
    Intersect,
    NamedSet,
    PlanUnion,
    SeasonSet,
    SemesterSet,
    Sum,
    Turnus,
)

# ---------------------------------------------------------------------------
# Parsing the bundled instances
# ---------------------------------------------------------------------------

def test_cogsys_modules_and_groups(cogsys_reg):
    assert len(cogsys_reg.modules) == 17
    assert cogsys_reg.groups.keys() == {"b", "f", "a", "o", "p"}
    assert cogsys_reg.groups["b"] == frozenset({"bm1", "bm2", "bm3"})
    assert cogsys_reg.groups["o"] == (cogsys_reg.groups["f"]
                                      | cogsys_reg.groups["a"])
    assert len(cogsys_reg.groups["a"]) == 6


def test_cogsys_maps(cogsys_reg):
    assert cogsys_reg.credits["bm1"] == 9
    assert cogsys_reg.credits["fm2"] == 6
    assert cogsys_reg.credits["pm3"] == 12
    assert cogsys_reg.credits["im"] == 15
    assert cogsys_reg.credits["msc"] == 30
    assert cogsys_reg.turnus["bm2"] is Turnus.SUMMER
    assert cogsys_reg.turnus["bm1"] is Turnus.WINTER
    assert cogsys_reg.turnus["msc"] is Turnus.EVERY
    assert cogsys_reg.lower == {"b": 27, "o": 24, "p": 24, "m": 120}
    assert cogsys_reg.lower == cogsys_reg.upper


def test_cogsys_named_sets(cogsys_reg):
    assert cogsys_reg.named_sets["e"] == frozenset({"fm1"})
    assert cogsys_reg.named_sets["gc3"] == frozenset({"im", "msc"})
    assert cogsys_reg.named_sets["tc4"] == frozenset({"msc"})
    assert cogsys_reg.set_named("b") == frozenset({"bm1", "bm2", "bm3"})
    assert cogsys_reg.set_named("nope") is None


def test_cogsys_constraint_sections(cogsys_reg):
    assert len(cogsys_reg.global_constraints) == 7
    assert len(cogsys_reg.temporal_constraints) == 4
    assert cogsys_reg.temporal_constraints[0] == Empty(
        Intersect(SemesterSet("I"), SemesterSet("J")))
    assert cogsys_reg.temporal_constraints[3] == Sum(
        Before(NamedSet("tc4")), "c", Comparison("geq", 90))


def test_cogsys_exam_spec(cogsys_exam):
    assert len(cogsys_exam.primary_tasks) == 12
    assert len(cogsys_exam.secondary_tasks) == 6
    assert cogsys_exam.ep["bm1"] == frozenset(
        {frozenset({"ep_bm1_1"}), frozenset({"ep_bm1_2"})})
    assert cogsys_exam.es["bm1"] == frozenset(
        {frozenset({"es_bm1_1", "es_bm1_2"})})
    # "no secondary tasks" is the family containing the empty set
    assert cogsys_exam.es["am12"] == frozenset({frozenset()})
    assert len(cogsys_exam.deps) == 2
    assert (frozenset({frozenset({"es_bm1_2"})}),
            frozenset({"ep_bm1_1"})) in cogsys_exam.deps
    assert len(cogsys_exam.exam_global_constraints) == 22


def test_toy_instance(toy_reg, toy):
    assert toy[1] is None
    assert toy_reg.modules == frozenset({"a", "b"})
    assert toy_reg.turnus == {"a": Turnus.EVERY, "b": Turnus.WINTER}
    assert len(toy_reg.global_constraints) == 1
    assert len(toy_reg.temporal_constraints) == 3


# ---------------------------------------------------------------------------
# Pooling
# ---------------------------------------------------------------------------

def test_pool_expansion_order():
    term = (Pool(("a", "b")), Pool(("1", "2")))
    assert expand_pool(term) == [("a", "1"), ("a", "2"), ("b", "1"), ("b", "2")]


def test_pool_expansion_nested():
    assert expand_pool(Pool(("a", Pool(("b", "c"))))) == ["a", "b", "c"]
    assert expand_pool("x") == ["x"]


POOLED = """
in((a;b),m).
map(c,(a;b),5).
map(s,(a;b),e).
"""

EXPANDED = """
in(a,m). in(b,m).
map(c,a,5). map(c,b,5).
map(s,a,e). map(s,b,e).
"""


def test_pooled_fact_file_equals_manual_expansion():
    assert parse_facts(POOLED) == parse_facts(EXPANDED)
    assert parse_instance(POOLED) == parse_instance(EXPANDED)


def test_pooled_membership_order():
    facts = parse_facts("in((a;b;c),m).").facts
    assert [f.member for f in facts] == ["a", "b", "c"]


# ---------------------------------------------------------------------------
# Parse errors
# ---------------------------------------------------------------------------

def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_instance("in(a,m).\nin(b m).\n")
    assert err.value.line == 2
    assert err.value.col > 0
    assert "line 2" in str(err.value)


def test_unknown_predicate():
    with pytest.raises(ParseError, match="unknown predicate 'foo'"):
        parse_instance("foo(a,b).")


def test_unknown_map_function():
    with pytest.raises(ParseError, match="unknown map function"):
        parse_instance("in(a,m). map(z,a,1).")


def test_undeclared_set_in_constraint():
    with pytest.raises(ParseError, match="undeclared set 'q'"):
        parse_instance("in(a,m). map(c,a,1). map(s,a,e).\n#global.\nempty(q).")


def test_undeclared_element_in_literal():
    with pytest.raises(ParseError, match="undeclared element 'zz'"):
        parse_instance("in(a,m). map(c,a,1). map(s,a,e).\n#global.\nempty({zz}).")


def test_conflicting_map_rejected():
    with pytest.raises(ParseError, match="conflicting"):
        parse_instance("in(a,m). map(c,a,5). map(c,a,6).")


def test_repeated_identical_map_accepted():
    reg, _ = parse_instance("in(a,m). map(c,a,5). map(c,a,5). map(s,a,e).")
    assert reg.credits == {"a": 5}


def test_constraint_before_section_directive():
    with pytest.raises(ParseError, match="before any section"):
        parse_instance("in(a,m). empty(s).")


def test_unknown_section_directive():
    with pytest.raises(ParseError, match="unknown section"):
        parse_instance("#nonsense.\n")


def test_bad_turnus_value():
    with pytest.raises(ParseError, match="must be w, s, or e"):
        parse_instance("in(a,m). map(c,a,1). map(s,a,x).")


def test_bad_semester_index():
    with pytest.raises(ParseError, match="semester indices start at 1"):
        parse_instance("in(a,m). map(c,a,1). map(s,a,e).\n#temporal.\nempty(s(0)).")


def test_reserved_name_rejected_as_set_term():
    with pytest.raises(ParseError, match="reserved name"):
        parse_instance("in(a,m). map(c,a,1). map(s,a,e).\n#global.\nempty(map).")


def test_ee_outside_exam_section():
    with pytest.raises(ParseError, match="exam sections"):
        parse_instance("in(a,m). map(c,a,1). map(s,a,e).\n#global.\nempty(ee).")


# ---------------------------------------------------------------------------
# Round-trips
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "name", ["cogsys.reg", "toy.reg", "toy_exam.reg"])
def test_instance_round_trip(name):
    first = parse_instance(read_instance(name))
    text = serialize_instance(*first)
    assert parse_instance(text) == first


def test_serialized_form_is_stable(cogsys_reg, cogsys_exam):
    text = serialize_instance(cogsys_reg, cogsys_exam)
    again = serialize_instance(*parse_instance(text))
    assert text == again


def test_render_constraint_matches_surface_syntax():
    reg, _ = parse_instance(
        "in(a,m). map(c,a,3). map(s,a,e).\n#global.\n"
        "sum(int(m,s),c,bw,(3,3)).\ncard(comp(s),leq,1).")
    rendered = [render_constraint(c) for c in reg.global_constraints]
    assert rendered == ["sum(int(m,s),c,bw,(3,3))", "card(comp(s),leq,1)"]


def test_render_set_shapes():
    assert render_set(SeasonSet("w")) == "m(w)"
    assert render_set(SemesterSet("even")) == "s(even)"
    assert render_set(Intersect(NamedSet("b"), PlanUnion())) == "int(b,s)"


def test_fact_order_independence(cogsys_text, cogsys):
    # Reordering the declaration facts (everything before the first section
    # directive) must not change the parsed value; constraint facts keep
    # their section-relative order, so they stay put here.
    head, sep, tail = cogsys_text.partition("#")
    lines = [line for line in head.splitlines() if line.split("%")[0].strip()]
    reordered = "\n".join(reversed(lines)) + "\n" + sep + tail
    assert parse_instance(reordered) == cogsys


def test_fact_order_independence_random_shuffles():
    facts = ["in(a,m).", "in(b,m).", "map(c,a,1).", "map(c,b,2).",
             "map(s,a,e).", "map(s,b,w).", "in(g1,g).", "in(a,g1).",
             "map(l,g1,0).", "map(u,g1,1)."]
    base = parse_instance(" ".join(facts))
    rng = random.Random(5)
    for _ in range(10):
        rng.shuffle(facts)
        assert parse_instance(" ".join(facts)) == base


# ---------------------------------------------------------------------------
# Plan files
# ---------------------------------------------------------------------------

def test_parse_study_plan(reference_plan):
    assert reference_plan.horizon == 4
    assert reference_plan.semesters[0] == frozenset({"bm1", "bm3", "fm1", "am12"})
    assert reference_plan.semesters[3] == frozenset({"msc"})


def test_parse_exam_plan(reference_exam_plan):
    assert reference_exam_plan.horizon == 4
    assert "ep_msc" in reference_exam_plan.semesters[3]


def test_plan_round_trip(reference_plan, reference_exam_plan):
    assert parse_study_plan(serialize_plan(reference_plan)) == reference_plan
    assert parse_exam_plan(serialize_plan(reference_exam_plan)) == reference_exam_plan


def test_empty_semester_line():
    plan = parse_study_plan("1: a\n2:\n3: b\n")
    assert plan.semesters[1] == frozenset()
    assert parse_study_plan(serialize_plan(plan)) == plan


def test_plan_rejects_gap():
    with pytest.raises(ParseError, match="semester 2 expected"):
        parse_study_plan("1: a\n3: b\n")


def test_plan_rejects_malformed_line():
    with pytest.raises(ParseError, match="form 'i: id1"):
        parse_study_plan("first: a\n")


def test_plan_rejects_empty_file():
    with pytest.raises(ParseError, match="empty plan"):
        parse_study_plan("% nothing here\n")


def test_plan_checks_declarations(toy_reg, cogsys_exam):
    with pytest.raises(ParseError, match="unknown module 'zz'"):
        parse_study_plan("1: a zz\n", toy_reg)
    with pytest.raises(ParseError, match="unknown task"):
        parse_exam_plan("1: not_a_task\n", cogsys_exam)
