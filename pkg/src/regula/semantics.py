"""Evaluation of set expressions and constraints over a fixed plan.

Study-plan admissibility checks every global and temporal constraint of the
regulation; exam-plan admissibility additionally derives the induced study
plan, applies the built-in completion-combination and dependency rules, and
evaluates the instance's exam constraints.
"""

from __future__ import annotations

import itertools
from collections.abc import Set as AbstractSet
from dataclasses import dataclass

from .dsl import render_constraint
from .model import (
    After, Before, Between, Card, Complement, ConstraintExpr, Diff, Empty,
    Equal, ExamPlan, ExamSpec, ExamUnion, Expand, InFamily, Implies,
    Intersect, Literal, LiteralFamily, ModuleId, NamedSet, Neg, PlanUnion,
    Regulation, SeasonSet, SemesterSet, SetExpr, StudyPlan, SubsetEq,
    SubsetProper, Sum, SupsetEq, SupsetProper, Turnus, Union,
    ValidationReport, Violation, index_variables, substitute_indices,
)


class EvalError(Exception):
    """An expression does not denote under the current context."""


@dataclass(frozen=True)
class EvalContext:
    regulation: Regulation
    semesters: tuple[frozenset[str], ...]
    exam_semesters: tuple[frozenset[str], ...] | None = None

    @classmethod
    def for_study(cls, reg: Regulation, plan: StudyPlan) -> EvalContext:
        return cls(reg, plan.semesters)

    @classmethod
    def for_exam(cls, reg: Regulation, eplan: ExamPlan,
                 induced: StudyPlan) -> EvalContext:
        return cls(reg, induced.semesters, eplan.semesters)

    @property
    def horizon(self) -> int:
        return len(self.semesters)

    def season(self, which: str) -> frozenset[str]:
        wanted = Turnus(which)
        return frozenset(m for m, t in self.regulation.turnus.items() if t is wanted)


def _is_family(value: frozenset) -> bool:
    return any(isinstance(x, frozenset) for x in value)


def _require_same_kind(left: frozenset, right: frozenset, what: str) -> None:
    if left and right and _is_family(left) != _is_family(right):
        raise EvalError(f"{what} mixes a set with a set of sets")


def eval_set(expr: SetExpr, ctx: EvalContext) -> frozenset:
    """Evaluate a set expression to a set of ids, or a set of sets."""
    if isinstance(expr, NamedSet):
        if expr.name == "m":
            return ctx.regulation.modules
        resolved = ctx.regulation.set_named(expr.name)
        if resolved is None:
            raise EvalError(f"undeclared set {expr.name!r}")
        return resolved
    if isinstance(expr, PlanUnion):
        return frozenset().union(*ctx.semesters)
    if isinstance(expr, SemesterSet):
        if isinstance(expr.index, int):
            if 1 <= expr.index <= ctx.horizon:
                return ctx.semesters[expr.index - 1]
            return frozenset()
        if expr.index == "even":
            return frozenset().union(frozenset(), *ctx.semesters[1::2])
        if expr.index == "odd":
            return frozenset().union(frozenset(), *ctx.semesters[0::2])
        raise EvalError(f"unbound semester index {expr.index!r}")
    if isinstance(expr, SeasonSet):
        return ctx.season(expr.season)
    if isinstance(expr, ExamUnion):
        if ctx.exam_semesters is None:
            raise EvalError("ee used outside an examination context")
        return frozenset().union(*ctx.exam_semesters)
    if isinstance(expr, Intersect):
        left, right = eval_set(expr.left, ctx), eval_set(expr.right, ctx)
        _require_same_kind(left, right, "int")
        return left & right
    if isinstance(expr, Union):
        left, right = eval_set(expr.left, ctx), eval_set(expr.right, ctx)
        _require_same_kind(left, right, "union")
        return left | right
    if isinstance(expr, Diff):
        left, right = eval_set(expr.left, ctx), eval_set(expr.right, ctx)
        _require_same_kind(left, right, "diff")
        return left - right
    if isinstance(expr, Complement):
        value = eval_set(expr.arg, ctx)
        if _is_family(value):
            raise EvalError("comp applies to plain sets only")
        return ctx.regulation.modules - value
    if isinstance(expr, Before):
        return _before(eval_set(expr.arg, ctx), ctx)
    if isinstance(expr, After):
        return _after(eval_set(expr.arg, ctx), ctx)
    if isinstance(expr, Between):
        return _after(eval_set(expr.first, ctx), ctx) & _before(
            eval_set(expr.second, ctx), ctx)
    if isinstance(expr, Expand):
        value = eval_set(expr.arg, ctx)
        if value and not _is_family(value):
            raise EvalError("expand applies to sets of sets only")
        return frozenset().union(frozenset(), *value)
    if isinstance(expr, Literal):
        return expr.members
    if isinstance(expr, LiteralFamily):
        return expr.members
    raise TypeError(f"not a set expression: {expr!r}")


def _before(target: frozenset, ctx: EvalContext) -> frozenset[str]:
    hits = [i for i, sem in enumerate(ctx.semesters) if target & sem]
    if not hits:
        return frozenset()
    return frozenset().union(frozenset(), *ctx.semesters[: max(hits)])


def _after(target: frozenset, ctx: EvalContext) -> frozenset[str]:
    hits = [i for i, sem in enumerate(ctx.semesters) if target & sem]
    if not hits:
        return frozenset()
    return frozenset().union(frozenset(), *ctx.semesters[min(hits) + 1 :])


def holds(constraint: ConstraintExpr, ctx: EvalContext) -> bool:
    if isinstance(constraint, Empty):
        return not eval_set(constraint.arg, ctx)
    if isinstance(constraint, (Equal, SubsetEq, SubsetProper, SupsetEq, SupsetProper)):
        left = eval_set(constraint.left, ctx)
        right = eval_set(constraint.right, ctx)
        _require_same_kind(left, right, type(constraint).__name__)
        if isinstance(constraint, Equal):
            return left == right
        if isinstance(constraint, SubsetEq):
            return left <= right
        if isinstance(constraint, SubsetProper):
            return left < right
        if isinstance(constraint, SupsetEq):
            return left >= right
        return left > right
    if isinstance(constraint, Card):
        return constraint.cmp.check(len(eval_set(constraint.arg, ctx)))
    if isinstance(constraint, Sum):
        return constraint.cmp.check(_credit_sum(constraint, ctx))
    if isinstance(constraint, Implies):
        return not holds(constraint.antecedent, ctx) or holds(constraint.consequent, ctx)
    if isinstance(constraint, Neg):
        return not holds(constraint.arg, ctx)
    if isinstance(constraint, InFamily):
        member = eval_set(constraint.member, ctx)
        family = eval_set(constraint.family, ctx)
        if _is_family(member) or (family and not _is_family(family)):
            raise EvalError("in_fam relates a set to a set of sets")
        return member in family
    raise TypeError(f"not a constraint: {constraint!r}")


def _credit_sum(constraint: Sum, ctx: EvalContext) -> int:
    value = eval_set(constraint.arg, ctx)
    if _is_family(value):
        raise EvalError("sum applies to plain sets only")
    credits = ctx.regulation.credits
    total = 0
    for elem in value:
        if elem not in credits:
            raise EvalError(f"no credits declared for {elem!r}")
        total += credits[elem]
    return total


def instantiate(constraint: ConstraintExpr, horizon: int) -> list[ConstraintExpr]:
    """Ground a constraint's semester-index variables over 1..horizon.

    Distinct variables range over strictly increasing index tuples, so
    ``empty(int(s(I),s(J)))`` grounds to one disjointness check per pair i<j.
    """
    variables = index_variables(constraint)
    if not variables:
        return [constraint]
    out = []
    for combo in itertools.combinations(range(1, horizon + 1), len(variables)):
        out.append(substitute_indices(constraint, dict(zip(variables, combo))))
    return out


# --------------------------------------------------------------------------
# Violation reporting
# --------------------------------------------------------------------------

def _fmt(elems: frozenset) -> str:
    if _is_family(elems):
        return "{" + ",".join(
            "{" + ",".join(sorted(e)) + "}" for e in sorted(elems, key=sorted)) + "}"
    return "{" + ",".join(sorted(elems)) + "}"


def _why(constraint: ConstraintExpr, ctx: EvalContext) -> str:
    """First-witness explanation for a failed constraint."""
    if isinstance(constraint, Empty):
        value = eval_set(constraint.arg, ctx)
        witness = sorted(value, key=lambda e: sorted(e) if isinstance(e, frozenset) else e)[0]
        if isinstance(witness, frozenset):
            witness = "{" + ",".join(sorted(witness)) + "}"
        return f"contains {witness}"
    if isinstance(constraint, (Equal, SubsetEq, SubsetProper, SupsetEq, SupsetProper)):
        left = eval_set(constraint.left, ctx)
        right = eval_set(constraint.right, ctx)
        if isinstance(constraint, (SubsetProper, SupsetProper)) and left == right:
            return "the sets are equal"
        missing = (right - left) if isinstance(constraint, (SupsetEq, SupsetProper)) \
            else (left - right)
        if not missing and isinstance(constraint, Equal):
            missing = right - left
            side = "missing on the left"
        else:
            side = "not in the right-hand set" \
                if not isinstance(constraint, (SupsetEq, SupsetProper)) \
                else "not in the left-hand set"
        witness = sorted(missing, key=lambda e: sorted(e) if isinstance(e, frozenset) else e)[0]
        if isinstance(witness, frozenset):
            witness = "{" + ",".join(sorted(witness)) + "}"
        return f"{witness} {side}"
    if isinstance(constraint, Card):
        return f"cardinality is {len(eval_set(constraint.arg, ctx))}"
    if isinstance(constraint, Sum):
        return f"credit sum is {_credit_sum(constraint, ctx)}"
    if isinstance(constraint, Implies):
        return f"antecedent holds but: {_why(constraint.consequent, ctx)}"
    if isinstance(constraint, Neg):
        return "the negated condition holds"
    if isinstance(constraint, InFamily):
        member = eval_set(constraint.member, ctx)
        return f"{_fmt(member)} is not one of the declared combinations"
    raise TypeError(f"not a constraint: {constraint!r}")


def _check_constraints(exprs, ctx: EvalContext, violations: list[Violation]) -> None:
    for constraint in exprs:
        for ground in instantiate(constraint, ctx.horizon):
            if not holds(ground, ctx):
                violations.append(
                    Violation(render_constraint(ground), _why(ground, ctx)))
                break


# --------------------------------------------------------------------------
# Plan validation
# --------------------------------------------------------------------------

def validate_study_plan(reg: Regulation, plan: StudyPlan) -> ValidationReport:
    violations: list[Violation] = []
    for i, sem in enumerate(plan.semesters, start=1):
        for mod in sorted(sem - reg.modules):
            violations.append(Violation(f"s({i})", f"undeclared module {mod}"))
    if violations:
        return ValidationReport(tuple(violations))
    ctx = EvalContext.for_study(reg, plan)
    _check_constraints(reg.global_constraints, ctx, violations)
    _check_constraints(reg.temporal_constraints, ctx, violations)
    return ValidationReport(tuple(violations))


def induce(eplan: ExamPlan, exam: ExamSpec,
           modules: AbstractSet[ModuleId]) -> StudyPlan:
    """Derive the study plan in which each module is completed as early as
    possible: module m lands in semester i when some declared combination of
    its tasks is covered by E_1..E_i but not by E_1..E_{i-1}."""
    prefixes: list[frozenset[str]] = [frozenset()]
    for sem in eplan.semesters:
        prefixes.append(prefixes[-1] | sem)
    semesters = []
    candidates = sorted(set(modules) & set(exam.ep) & set(exam.es))
    for i in range(1, eplan.horizon + 1):
        done: set[str] = set()
        for mod in candidates:
            if any(v | w <= prefixes[i] and not v | w <= prefixes[i - 1]
                   for v in exam.es[mod] for w in exam.ep[mod]):
                done.add(mod)
        semesters.append(frozenset(done))
    return StudyPlan(tuple(semesters))


def validate_exam_plan(reg: Regulation, exam: ExamSpec,
                       eplan: ExamPlan) -> ValidationReport:
    violations: list[Violation] = []
    for i, sem in enumerate(eplan.semesters, start=1):
        for task in sorted(sem - exam.tasks):
            violations.append(Violation(f"s({i})", f"undeclared task {task}"))
    if violations:
        return ValidationReport(tuple(violations))

    induced = induce(eplan, exam, reg.modules)
    violations.extend(validate_study_plan(reg, induced).violations)

    taken = frozenset().union(*eplan.semesters)
    _check_combinations(exam, taken, violations)
    _check_task_disjointness(eplan, violations)
    _check_dependencies(exam, eplan, taken, violations)

    ctx = EvalContext.for_exam(reg, eplan, induced)
    _check_constraints(exam.exam_global_constraints, ctx, violations)
    _check_constraints(exam.exam_temporal_constraints, ctx, violations)
    return ValidationReport(tuple(violations))


def _check_combinations(exam: ExamSpec, taken: frozenset[str],
                        violations: list[Violation]) -> None:
    # Any module some of whose tasks are taken must have its taken primary
    # tasks form a declared e_p combination, and likewise for secondary.
    for mod in sorted(set(exam.ep) | set(exam.es)):
        if not taken & exam.module_tasks(mod):
            continue
        primary = frozenset().union(frozenset(), *exam.ep.get(mod, frozenset()))
        secondary = frozenset().union(frozenset(), *exam.es.get(mod, frozenset()))
        if taken & primary not in exam.ep.get(mod, frozenset()):
            violations.append(Violation(
                f"primary_combination({mod})",
                f"{_fmt(taken & primary)} is not one of the declared combinations"))
        if taken & secondary not in exam.es.get(mod, frozenset()):
            violations.append(Violation(
                f"secondary_combination({mod})",
                f"{_fmt(taken & secondary)} is not one of the declared combinations"))


def _check_task_disjointness(eplan: ExamPlan, violations: list[Violation]) -> None:
    seen: dict[str, int] = {}
    for i, sem in enumerate(eplan.semesters, start=1):
        for task in sorted(sem):
            if task in seen:
                violations.append(Violation(
                    "task_disjointness",
                    f"{task} occurs in semesters {seen[task]} and {i}"))
                return
            seen[task] = i


def _check_dependencies(exam: ExamSpec, eplan: ExamPlan, taken: frozenset[str],
                        violations: list[Violation]) -> None:
    # For (X,W) in D: once all of W is taken, some combination V in X must be
    # fully taken and finished no later than the first W semester.
    def max_semester(tasks: frozenset[str]) -> int:
        out = 0
        for i, sem in enumerate(eplan.semesters, start=1):
            if tasks & sem:
                out = i
        return out

    def min_semester(tasks: frozenset[str]) -> int:
        for i, sem in enumerate(eplan.semesters, start=1):
            if tasks & sem:
                return i
        return eplan.horizon + 1

    for x, w in sorted(exam.deps, key=lambda d: (sorted(map(sorted, d[0])), sorted(d[1]))):
        if not w <= taken:
            continue
        start = min_semester(w)
        if any(v <= taken and max_semester(v) <= start for v in x):
            continue
        wtxt = "{" + ",".join(sorted(w)) + "}"
        violations.append(Violation(
            f"dependency({_fmt(x)},{wtxt})",
            f"no combination is completed by semester {start}"))
