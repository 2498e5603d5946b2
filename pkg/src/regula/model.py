"""Domain types for study regulations, plans, and the constraint language."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Union as _U

ModuleId = str
TaskId = str

IDENT_RE = re.compile(r"[a-z][a-z0-9_]*\Z")

#: Names with a fixed meaning in the regulation language; they cannot be
#: reused as module, group, or auxiliary set names.
RESERVED_NAMES = frozenset(
    {
        "in", "map", "m", "g", "d", "s", "ep", "es", "ee",
        "int", "union", "diff", "comp", "before", "after", "between", "expand",
        "empty", "equal", "subseteq", "subset", "supseteq", "supset",
        "card", "sum", "implies", "neg", "in_fam",
        "leq", "geq", "eq", "lt", "gt", "bw",
    }
)


class Turnus(enum.Enum):
    """Season(s) in which a module is offered; odd semesters are winter, even are summer."""

    WINTER = "w"
    SUMMER = "s"
    EVERY = "e"


# --------------------------------------------------------------------------
# Set expressions
# --------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class NamedSet:
    name: str


@dataclass(frozen=True, slots=True)
class PlanUnion:
    """The union of all semester module sets (the term ``s``)."""


@dataclass(frozen=True, slots=True)
class SemesterSet:
    """One semester's module set ``s(i)``.

    The index is a 1-based integer, the class token ``even``/``odd`` (union of
    all even-/odd-indexed semesters), or an uppercase variable name that is
    quantified over semester indices when the enclosing constraint is
    instantiated for a concrete horizon.
    """

    index: int | str


@dataclass(frozen=True, slots=True)
class SeasonSet:
    """All modules with the given turnus: ``m(w)`` or ``m(s)``."""

    season: str  # "w" | "s"


@dataclass(frozen=True, slots=True)
class ExamUnion:
    """The union of all semester examination-task sets (the term ``ee``)."""


@dataclass(frozen=True, slots=True)
class Intersect:
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, slots=True)
class Union:
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, slots=True)
class Diff:
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, slots=True)
class Complement:
    """Complement relative to the regulation's module set."""

    arg: SetExpr


@dataclass(frozen=True, slots=True)
class Before:
    """Modules placed in some semester strictly before an occurrence of the argument set."""

    arg: SetExpr


@dataclass(frozen=True, slots=True)
class After:
    """Mirror of `Before`: modules placed strictly after an occurrence of the argument set."""

    arg: SetExpr


@dataclass(frozen=True, slots=True)
class Between:
    first: SetExpr
    second: SetExpr


@dataclass(frozen=True, slots=True)
class Expand:
    """Union of the members of a set of sets."""

    arg: SetExpr


@dataclass(frozen=True, slots=True)
class Literal:
    members: frozenset[str]


@dataclass(frozen=True, slots=True)
class LiteralFamily:
    members: frozenset[frozenset[str]]


SetExpr = _U[
    NamedSet, PlanUnion, SemesterSet, SeasonSet, ExamUnion,
    Intersect, Union, Diff, Complement,
    Before, After, Between, Expand,
    Literal, LiteralFamily,
]


# --------------------------------------------------------------------------
# Constraints
# --------------------------------------------------------------------------

COMPARISON_OPS = ("leq", "geq", "eq", "lt", "gt", "bw")


@dataclass(frozen=True, slots=True)
class Comparison:
    """A comparison against an integer bound, or an inclusive interval for ``bw``."""

    op: str
    bound: int | tuple[int, int]

    def __post_init__(self) -> None:
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")
        if self.op == "bw":
            if not isinstance(self.bound, tuple):
                raise ValueError("bw comparison needs an (L,U) pair")
            lo, hi = self.bound
            if lo > hi:
                raise ValueError(f"bw bounds out of order: ({lo},{hi})")
        elif not isinstance(self.bound, int):
            raise ValueError(f"{self.op} comparison needs an integer bound")

    def check(self, value: int) -> bool:
        if self.op == "leq":
            return value <= self.bound
        if self.op == "geq":
            return value >= self.bound
        if self.op == "eq":
            return value == self.bound
        if self.op == "lt":
            return value < self.bound
        if self.op == "gt":
            return value > self.bound
        lo, hi = self.bound  # bw
        return lo <= value <= hi


@dataclass(frozen=True, slots=True)
class Empty:
    arg: SetExpr


@dataclass(frozen=True, slots=True)
class Equal:
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, slots=True)
class SubsetEq:
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, slots=True)
class SubsetProper:
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, slots=True)
class SupsetEq:
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, slots=True)
class SupsetProper:
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True, slots=True)
class Card:
    arg: SetExpr
    cmp: Comparison


@dataclass(frozen=True, slots=True)
class Sum:
    """Compare the sum of an integer-valued module map over a set against a bound."""

    arg: SetExpr
    func: str
    cmp: Comparison


@dataclass(frozen=True, slots=True)
class Implies:
    antecedent: ConstraintExpr
    consequent: ConstraintExpr


@dataclass(frozen=True, slots=True)
class Neg:
    arg: ConstraintExpr


@dataclass(frozen=True, slots=True)
class InFamily:
    """Membership of a set in a set of sets (the primed variant of ``in``)."""

    member: SetExpr
    family: SetExpr


ConstraintExpr = _U[
    Empty, Equal, SubsetEq, SubsetProper, SupsetEq, SupsetProper,
    Card, Sum, Implies, Neg, InFamily,
]


def iter_set_exprs(obj: ConstraintExpr | SetExpr) -> Iterator[SetExpr]:
    """Yield every set expression occurring in `obj`, including nested ones."""
    if isinstance(obj, (Empty, Complement, Before, After, Expand)):
        yield from iter_set_exprs(obj.arg)
        if not isinstance(obj, Empty):
            yield obj
    elif isinstance(obj, (Equal, SubsetEq, SubsetProper, SupsetEq, SupsetProper)):
        yield from iter_set_exprs(obj.left)
        yield from iter_set_exprs(obj.right)
    elif isinstance(obj, (Card, Sum)):
        yield from iter_set_exprs(obj.arg)
    elif isinstance(obj, Implies):
        yield from iter_set_exprs(obj.antecedent)
        yield from iter_set_exprs(obj.consequent)
    elif isinstance(obj, Neg):
        yield from iter_set_exprs(obj.arg)
    elif isinstance(obj, InFamily):
        yield from iter_set_exprs(obj.member)
        yield from iter_set_exprs(obj.family)
    elif isinstance(obj, (Intersect, Union, Diff, Between)):
        left = obj.first if isinstance(obj, Between) else obj.left
        right = obj.second if isinstance(obj, Between) else obj.right
        yield from iter_set_exprs(left)
        yield from iter_set_exprs(right)
        yield obj
    else:
        yield obj


def index_variables(constraint: ConstraintExpr) -> tuple[str, ...]:
    """Index variables of a constraint, in order of first occurrence."""
    seen: list[str] = []
    for expr in iter_set_exprs(constraint):
        if isinstance(expr, SemesterSet) and isinstance(expr.index, str):
            if expr.index not in ("even", "odd") and expr.index not in seen:
                seen.append(expr.index)
    return tuple(seen)


def substitute_indices(
    constraint: ConstraintExpr, binding: dict[str, int]
) -> ConstraintExpr:
    """Replace quantified semester-index variables by concrete indices."""

    def sub_set(e: SetExpr) -> SetExpr:
        if isinstance(e, SemesterSet) and isinstance(e.index, str) and e.index in binding:
            return SemesterSet(binding[e.index])
        if isinstance(e, Intersect):
            return Intersect(sub_set(e.left), sub_set(e.right))
        if isinstance(e, Union):
            return Union(sub_set(e.left), sub_set(e.right))
        if isinstance(e, Diff):
            return Diff(sub_set(e.left), sub_set(e.right))
        if isinstance(e, Complement):
            return Complement(sub_set(e.arg))
        if isinstance(e, Before):
            return Before(sub_set(e.arg))
        if isinstance(e, After):
            return After(sub_set(e.arg))
        if isinstance(e, Between):
            return Between(sub_set(e.first), sub_set(e.second))
        if isinstance(e, Expand):
            return Expand(sub_set(e.arg))
        return e

    c = constraint
    if isinstance(c, Empty):
        return Empty(sub_set(c.arg))
    if isinstance(c, (Equal, SubsetEq, SubsetProper, SupsetEq, SupsetProper)):
        return type(c)(sub_set(c.left), sub_set(c.right))
    if isinstance(c, Card):
        return Card(sub_set(c.arg), c.cmp)
    if isinstance(c, Sum):
        return Sum(sub_set(c.arg), c.func, c.cmp)
    if isinstance(c, Implies):
        return Implies(
            substitute_indices(c.antecedent, binding),
            substitute_indices(c.consequent, binding),
        )
    if isinstance(c, Neg):
        return Neg(substitute_indices(c.arg, binding))
    if isinstance(c, InFamily):
        return InFamily(sub_set(c.member), sub_set(c.family))
    raise TypeError(f"not a constraint: {c!r}")


# --------------------------------------------------------------------------
# Regulations and plans
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=True)
class Regulation:
    """A basic study regulation: modules, groups, credit/turnus maps, group
    credit bounds, auxiliary named sets, and the global/temporal constraints."""

    modules: frozenset[ModuleId]
    groups: dict[str, frozenset[ModuleId]]
    credits: dict[ModuleId, int]
    turnus: dict[ModuleId, Turnus]
    lower: dict[str, int]
    upper: dict[str, int]
    named_sets: dict[str, frozenset[ModuleId]]
    global_constraints: tuple[ConstraintExpr, ...]
    temporal_constraints: tuple[ConstraintExpr, ...]

    def set_named(self, name: str) -> frozenset[ModuleId] | None:
        """Resolve a group or auxiliary set name (one shared namespace)."""
        if name in self.groups:
            return self.groups[name]
        return self.named_sets.get(name)


@dataclass(frozen=True, slots=True)
class StudyPlan:
    semesters: tuple[frozenset[ModuleId], ...]

    def __post_init__(self) -> None:
        if len(self.semesters) < 1:
            raise ValueError("a plan needs at least one semester")

    @property
    def horizon(self) -> int:
        return len(self.semesters)

    @property
    def union(self) -> frozenset[ModuleId]:
        return frozenset().union(*self.semesters)


@dataclass(frozen=True, slots=True)
class ExamPlan:
    semesters: tuple[frozenset[TaskId], ...]

    def __post_init__(self) -> None:
        if len(self.semesters) < 1:
            raise ValueError("a plan needs at least one semester")

    @property
    def horizon(self) -> int:
        return len(self.semesters)

    @property
    def union(self) -> frozenset[TaskId]:
        return frozenset().union(*self.semesters)


Family = frozenset[frozenset[TaskId]]
Dependency = tuple[Family, frozenset[TaskId]]


@dataclass(frozen=True, eq=True)
class ExamSpec:
    """Examination extension: task sets, per-module completion combinations,
    secondary-before-primary dependencies, and extra exam-plan constraints."""

    primary_tasks: frozenset[TaskId]
    secondary_tasks: frozenset[TaskId]
    ep: dict[ModuleId, Family]
    es: dict[ModuleId, Family]
    deps: frozenset[Dependency]
    exam_global_constraints: tuple[ConstraintExpr, ...] = ()
    exam_temporal_constraints: tuple[ConstraintExpr, ...] = ()

    @property
    def tasks(self) -> frozenset[TaskId]:
        return self.primary_tasks | self.secondary_tasks

    def combinations(self, module: ModuleId) -> Family:
        """All primary-task combinations declared for `module` (empty family if none)."""
        return self.ep.get(module, frozenset())

    def module_tasks(self, module: ModuleId) -> frozenset[TaskId]:
        """Every task associated with `module` through ep or es."""
        out: set[TaskId] = set()
        for combo in self.ep.get(module, frozenset()):
            out |= combo
        for combo in self.es.get(module, frozenset()):
            out |= combo
        return frozenset(out)


@dataclass(frozen=True, slots=True)
class Assumption:
    module: ModuleId
    semester: int
    polarity: str = "assigned"  # "assigned" | "excluded"

    def __post_init__(self) -> None:
        if self.polarity not in ("assigned", "excluded"):
            raise ValueError(f"bad polarity {self.polarity!r}")
        if self.semester < 1:
            raise ValueError("semester indices start at 1")


@dataclass(frozen=True, slots=True)
class Violation:
    constraint: str
    reason: str


@dataclass(frozen=True, slots=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def admissible(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.admissible:
            return "admissible"
        lines = ["inadmissible:"]
        lines += [f"  {v.constraint}: {v.reason}" for v in self.violations]
        return "\n".join(lines)


@dataclass(frozen=True, slots=True)
class ConsequenceReport:
    """Per-semester cautious (forced) and brave (possible) module assignments."""

    satisfiable: bool
    forced: tuple[frozenset[ModuleId], ...]
    possible: tuple[frozenset[ModuleId], ...]
    complete: bool = True
    unknown: tuple[frozenset[ModuleId], ...] = field(default=())

    def __post_init__(self) -> None:
        for f, p in zip(self.forced, self.possible):
            if not f <= p:
                raise ValueError("forced assignments must also be possible")


# --------------------------------------------------------------------------
# Well-formedness
# --------------------------------------------------------------------------

def check_wellformed(reg: Regulation, exam: ExamSpec | None = None) -> ValidationReport:
    """Check the type-level side conditions of a regulation (and exam extension).

    Malformedness is reported, never raised; the check is pure and idempotent.
    """
    violations: list[Violation] = []

    def bad(where: str, reason: str) -> None:
        violations.append(Violation(where, reason))

    if not reg.modules:
        bad("modules", "no modules declared")
    for m in sorted(reg.modules):
        if not IDENT_RE.match(m) or m in RESERVED_NAMES:
            bad(f"module {m}", "invalid identifier")

    for kind, table in (("group", reg.groups), ("set", reg.named_sets)):
        for name in sorted(table):
            if not IDENT_RE.match(name) or name in RESERVED_NAMES:
                bad(f"{kind} {name}", "invalid identifier")
            for m in sorted(table[name] - reg.modules):
                bad(f"{kind} {name}", f"undeclared module {m}")

    for m in sorted(set(reg.credits) - reg.modules):
        bad(f"credits of {m}", "undeclared module")
    for m in sorted(set(reg.turnus) - reg.modules):
        bad(f"turnus of {m}", "undeclared module")
    for m in sorted(reg.modules - set(reg.credits)):
        bad(f"module {m}", "missing credits entry")
    for m in sorted(reg.modules - set(reg.turnus)):
        bad(f"module {m}", "missing turnus entry")
    for m in sorted(reg.credits):
        if reg.credits[m] < 0:
            bad(f"credits of {m}", "negative credits")

    # The full module set m counts as a group for bound purposes.
    for fn, table in (("lower", reg.lower), ("upper", reg.upper)):
        for name in sorted(set(table) - set(reg.groups) - {"m"}):
            bad(f"{fn} bound of {name}", "not a declared group")
    for name in sorted(set(reg.lower) & set(reg.upper)):
        if reg.lower[name] > reg.upper[name]:
            bad(f"bounds of {name}", "lower exceeds upper")

    if exam is not None:
        _check_exam(reg, exam, violations)
    return ValidationReport(tuple(violations))


def _check_exam(reg: Regulation, exam: ExamSpec, violations: list[Violation]) -> None:
    def bad(where: str, reason: str) -> None:
        violations.append(Violation(where, reason))

    for t in sorted(exam.primary_tasks & exam.secondary_tasks):
        bad(f"task {t}", "declared both primary and secondary")
    for t in sorted(exam.tasks):
        if not IDENT_RE.match(t) or t in RESERVED_NAMES:
            bad(f"task {t}", "invalid identifier")

    owner: dict[TaskId, ModuleId] = {}
    for fn, table, pool in (("ep", exam.ep, exam.primary_tasks),
                            ("es", exam.es, exam.secondary_tasks)):
        for m in sorted(table):
            if m not in reg.modules:
                bad(f"{fn} of {m}", "undeclared module")
            for combo in sorted(table[m], key=sorted):
                for t in sorted(combo - pool):
                    kind = "primary" if fn == "ep" else "secondary"
                    bad(f"{fn} of {m}", f"{t} is not a declared {kind} task")
                for t in sorted(combo):
                    prev = owner.setdefault(t, m)
                    if prev != m:
                        bad(f"task {t}", f"shared between modules {prev} and {m}")

    # A module covered by the exam system needs both maps: "no secondary
    # tasks" is the empty combination {{}}, not a missing entry.
    for m in sorted(set(exam.ep) ^ set(exam.es)):
        missing = "es" if m in exam.ep else "ep"
        bad(f"{missing} of {m}", "module has a combination map for only one kind of task")

    for x, w in sorted(exam.deps, key=lambda d: (sorted(map(sorted, d[0])), sorted(d[1]))):
        for t in sorted(w - exam.primary_tasks):
            bad("dependency", f"{t} is not a declared primary task")
        for v in sorted(x, key=sorted):
            for t in sorted(v - exam.secondary_tasks):
                bad("dependency", f"{t} is not a declared secondary task")
