"""Parser and serializer for the fact-based regulation language and plan files.

A regulation file is a sequence of period-terminated facts.  ``in(E,A).`` puts
element E into set A, ``map(F,E,V).`` assigns V to E under the function F, and
constraint facts (``empty``, ``card``, ``sum``, ...) state conditions on plans.
``%`` starts a comment; ``;`` inside parentheses pools alternatives; section
directives ``#global.``, ``#temporal.``, ``#exam_global.``, ``#exam_temporal.``
route the constraint facts that follow them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .model import (
    IDENT_RE,
    After, Before, Between, Card, Comparison, Complement, ConstraintExpr,
    Diff, Empty, Equal, ExamPlan, ExamSpec, ExamUnion, Expand, InFamily,
    Implies, Intersect, Literal, LiteralFamily, NamedSet, Neg, PlanUnion,
    Regulation, SeasonSet, SemesterSet, SetExpr, StudyPlan, SubsetEq,
    SubsetProper, Sum, SupsetEq, SupsetProper, Turnus, Union,
    iter_set_exprs,
)

SECTIONS = ("global", "temporal", "exam_global", "exam_temporal")
CONSTRAINT_PREDS = frozenset(
    {"empty", "equal", "subseteq", "subset", "supseteq", "supset",
     "card", "sum", "implies", "neg", "in_fam"}
)
MAP_FUNCS = frozenset({"c", "s", "l", "u", "ep", "es"})
RESERVED_TARGETS = frozenset({"m", "g", "ep", "es", "d"})


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(msg)
        self.msg = msg
        self.line = line
        self.col = col

    def __str__(self) -> str:
        if self.line:
            return f"line {self.line}, column {self.col}: {self.msg}"
        return self.msg


# --------------------------------------------------------------------------
# Lexer
# --------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_SYMBOLS = "(){},;."


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == "%":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in _SYMBOLS:
            toks.append(Token(ch, ch, line, col))
            i += 1
            col += 1
        elif ch == "#":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i + 1 : j]
            if not name:
                raise ParseError("empty directive", line, col)
            toks.append(Token("directive", name, line, col))
            col += j - i
            i = j
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if word[0].isupper() else "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# --------------------------------------------------------------------------
# Fact-level terms
# --------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class SetValue:
    """A brace literal in fact-argument position: a plain set or a set of sets."""

    kind: str  # "set" | "family"
    members: frozenset

    def as_family(self) -> frozenset[frozenset[str]]:
        if self.kind == "family":
            return self.members
        if not self.members:
            return frozenset()
        raise ValueError("expected a set of sets")


@dataclass(frozen=True, slots=True)
class Pool:
    alternatives: tuple


FactTerm = object  # str | int | SetValue | tuple[FactTerm, ...] | Pool


def expand_pool(term: FactTerm) -> list[FactTerm]:
    """Cross-product expansion of ``;`` pools, preserving left-to-right order."""
    if isinstance(term, Pool):
        out: list[FactTerm] = []
        for alt in term.alternatives:
            out.extend(expand_pool(alt))
        return out
    if isinstance(term, tuple):
        parts = [expand_pool(part) for part in term]
        return [tuple(combo) for combo in itertools.product(*parts)]
    return [term]


@dataclass(frozen=True, slots=True)
class Membership:
    member: FactTerm
    target: str
    line: int = field(compare=False, default=0)


@dataclass(frozen=True, slots=True)
class MapEntry:
    func: str
    key: FactTerm
    value: FactTerm
    line: int = field(compare=False, default=0)


@dataclass(frozen=True, slots=True)
class ConstraintFact:
    section: str
    expr: ConstraintExpr
    line: int = field(compare=False, default=0)


@dataclass(frozen=True, slots=True)
class FactFile:
    facts: tuple


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            want = kind if len(kind) > 1 else repr(kind)
            raise ParseError(f"expected {want}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return self.advance()

    def fail(self, msg: str) -> ParseError:
        tok = self.peek()
        return ParseError(msg, tok.line, tok.col)

    # -- fact arguments ----------------------------------------------------

    def fact_term(self) -> FactTerm:
        tok = self.peek()
        if tok.kind == "ident":
            return self.advance().text
        if tok.kind == "int":
            return int(self.advance().text)
        if tok.kind == "{":
            return self.brace_literal()
        if tok.kind == "(":
            self.advance()
            items = [self.fact_term()]
            sep = self.peek().kind
            if sep == ";":
                while self.peek().kind == ";":
                    self.advance()
                    items.append(self.fact_term())
                self.expect(")")
                return Pool(tuple(items))
            if sep == ",":
                while self.peek().kind == ",":
                    self.advance()
                    items.append(self.fact_term())
                self.expect(")")
                return tuple(items)
            self.expect(")")
            return Pool((items[0],))
        raise self.fail(f"unexpected {tok.text or 'end of input'!r} in fact argument")

    def brace_literal(self) -> SetValue:
        self.expect("{")
        if self.peek().kind == "}":
            self.advance()
            return SetValue("set", frozenset())
        if self.peek().kind == "{":
            inner = [self.brace_set()]
            while self.peek().kind == ",":
                self.advance()
                inner.append(self.brace_set())
            self.expect("}")
            return SetValue("family", frozenset(inner))
        members = [self.expect("ident").text]
        while self.peek().kind == ",":
            self.advance()
            members.append(self.expect("ident").text)
        self.expect("}")
        return SetValue("set", frozenset(members))

    def brace_set(self) -> frozenset[str]:
        self.expect("{")
        members: list[str] = []
        if self.peek().kind != "}":
            members.append(self.expect("ident").text)
            while self.peek().kind == ",":
                self.advance()
                members.append(self.expect("ident").text)
        self.expect("}")
        return frozenset(members)

    # -- constraint expressions --------------------------------------------

    def constraint(self) -> ConstraintExpr:
        tok = self.expect("ident")
        if tok.text not in CONSTRAINT_PREDS:
            raise ParseError(f"unknown predicate {tok.text!r}", tok.line, tok.col)
        return self.constraint_body(tok)

    def constraint_body(self, head: Token) -> ConstraintExpr:
        name = head.text
        self.expect("(")
        if name == "empty":
            arg = self.set_term()
            self.expect(")")
            return Empty(arg)
        if name in ("equal", "subseteq", "subset", "supseteq", "supset", "in_fam"):
            left = self.set_term()
            self.expect(",")
            right = self.set_term()
            self.expect(")")
            cls = {"equal": Equal, "subseteq": SubsetEq, "subset": SubsetProper,
                   "supseteq": SupsetEq, "supset": SupsetProper,
                   "in_fam": InFamily}[name]
            return cls(left, right)
        if name == "card":
            arg = self.set_term()
            self.expect(",")
            cmp = self.comparison()
            self.expect(")")
            return Card(arg, cmp)
        if name == "sum":
            arg = self.set_term()
            self.expect(",")
            func = self.expect("ident")
            if func.text != "c":
                raise ParseError(f"sum supports only the credit function c, not {func.text!r}",
                                 func.line, func.col)
            self.expect(",")
            cmp = self.comparison()
            self.expect(")")
            return Sum(arg, func.text, cmp)
        if name == "implies":
            antecedent = self.constraint()
            self.expect(",")
            consequent = self.constraint()
            self.expect(")")
            return Implies(antecedent, consequent)
        # neg
        arg = self.constraint()
        self.expect(")")
        return Neg(arg)

    def comparison(self) -> Comparison:
        op = self.expect("ident")
        self.expect(",")
        if self.peek().kind == "(":
            self.advance()
            lo = int(self.expect("int").text)
            self.expect(",")
            hi = int(self.expect("int").text)
            self.expect(")")
            bound: int | tuple[int, int] = (lo, hi)
        else:
            bound = int(self.expect("int").text)
        try:
            return Comparison(op.text, bound)
        except ValueError as exc:
            raise ParseError(str(exc), op.line, op.col) from None

    def set_term(self) -> SetExpr:
        tok = self.peek()
        if tok.kind == "{":
            lit = self.brace_literal()
            if lit.kind == "family":
                return LiteralFamily(lit.members)
            return Literal(lit.members)
        if tok.kind != "ident":
            raise self.fail(f"unexpected {tok.text or 'end of input'!r} in set term")
        name = self.advance().text
        if name == "s":
            if self.peek().kind == "(":
                self.advance()
                idx = self.advance()
                if idx.kind == "int":
                    index: int | str = int(idx.text)
                    if index < 1:
                        raise ParseError("semester indices start at 1", idx.line, idx.col)
                elif idx.kind == "ident" and idx.text in ("even", "odd"):
                    index = idx.text
                elif idx.kind == "var":
                    index = idx.text
                else:
                    raise ParseError(f"bad semester index {idx.text!r}", idx.line, idx.col)
                self.expect(")")
                return SemesterSet(index)
            return PlanUnion()
        if name == "ee":
            return ExamUnion()
        if name == "m" and self.peek().kind == "(":
            self.advance()
            season = self.expect("ident")
            if season.text not in ("w", "s"):
                raise ParseError(f"turnus selector must be w or s, not {season.text!r}",
                                 season.line, season.col)
            self.expect(")")
            return SeasonSet(season.text)
        if name in ("int", "union", "diff", "between"):
            self.expect("(")
            left = self.set_term()
            self.expect(",")
            right = self.set_term()
            self.expect(")")
            cls = {"int": Intersect, "union": Union, "diff": Diff,
                   "between": Between}[name]
            return cls(left, right)
        if name in ("comp", "before", "after", "expand"):
            self.expect("(")
            arg = self.set_term()
            self.expect(")")
            cls = {"comp": Complement, "before": Before, "after": After,
                   "expand": Expand}[name]
            return cls(arg)
        if name in CONSTRAINT_PREDS or name in ("in", "map", "g", "d", "ep", "es"):
            raise ParseError(f"reserved name {name!r} cannot be used as a set term",
                             tok.line, tok.col)
        return NamedSet(name)


def parse_facts(text: str) -> FactFile:
    """Tokenize and parse a regulation file into its expanded ground facts."""
    parser = _Parser(tokenize(text))
    facts: list = []
    section: str | None = None
    while True:
        tok = parser.peek()
        if tok.kind == "eof":
            break
        if tok.kind == "directive":
            parser.advance()
            if tok.text not in SECTIONS:
                raise ParseError(f"unknown section {tok.text!r}", tok.line, tok.col)
            parser.expect(".")
            section = tok.text
            continue
        if tok.kind != "ident":
            raise ParseError(f"expected a fact, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        facts.extend(_parse_fact(parser, section))
    return FactFile(tuple(facts))


def _parse_fact(parser: _Parser, section: str | None) -> list:
    head = parser.expect("ident")
    if head.text == "in":
        parser.expect("(")
        member = parser.fact_term()
        parser.expect(",")
        target = parser.expect("ident")
        parser.expect(")")
        parser.expect(".")
        return [Membership(g, target.text, head.line) for g in expand_pool(member)]
    if head.text == "map":
        parser.expect("(")
        func = parser.expect("ident")
        if func.text not in MAP_FUNCS:
            raise ParseError(f"unknown map function {func.text!r}", func.line, func.col)
        parser.expect(",")
        key = parser.fact_term()
        parser.expect(",")
        value = parser.fact_term()
        parser.expect(")")
        parser.expect(".")
        return [MapEntry(func.text, k, v, head.line)
                for k in expand_pool(key) for v in expand_pool(value)]
    if head.text in CONSTRAINT_PREDS:
        if section is None:
            raise ParseError(
                f"constraint fact {head.text!r} before any section directive",
                head.line, head.col)
        expr = parser.constraint_body(head)
        parser.expect(".")
        return [ConstraintFact(section, expr, head.line)]
    raise ParseError(f"unknown predicate {head.text!r}", head.line, head.col)


# --------------------------------------------------------------------------
# Assembly: facts -> Regulation (+ ExamSpec)
# --------------------------------------------------------------------------

def assemble(facts: FactFile) -> tuple[Regulation, ExamSpec | None]:
    modules: set[str] = set()
    group_names: set[str] = set()
    members: dict[str, set[str]] = {}
    ptasks: set[str] = set()
    stasks: set[str] = set()
    deps: set = set()
    maps: dict[str, dict] = {f: {} for f in MAP_FUNCS}
    map_lines: dict[tuple[str, str], int] = {}
    constraints: dict[str, list[ConstraintExpr]] = {s: [] for s in SECTIONS}
    exam_data = False

    for fact in facts.facts:
        if isinstance(fact, Membership):
            _assemble_membership(fact, modules, group_names, members,
                                 ptasks, stasks, deps)
            if fact.target in ("ep", "es", "d"):
                exam_data = True
        elif isinstance(fact, MapEntry):
            _assemble_map(fact, maps, map_lines)
            if fact.func in ("ep", "es"):
                exam_data = True
        else:
            constraints[fact.section].append(fact.expr)
            if fact.section.startswith("exam"):
                exam_data = True

    groups = {g: frozenset(members.get(g, set())) for g in group_names}
    named = {name: frozenset(ms) for name, ms in members.items()
             if name not in group_names}

    turnus = {}
    for mod, value in maps["s"].items():
        if not isinstance(value, str) or value not in ("w", "s", "e"):
            raise ParseError(f"turnus of {mod} must be w, s, or e",
                             map_lines.get(("s", mod), 0), 0)
        turnus[mod] = Turnus(value)
    for func in ("c", "l", "u"):
        for key, value in maps[func].items():
            if not isinstance(value, int):
                raise ParseError(f"map({func},{key},...) needs an integer value",
                                 map_lines.get((func, key), 0), 0)
    ep = {}
    es = {}
    for func, table in (("ep", ep), ("es", es)):
        for mod, value in maps[func].items():
            line = map_lines.get((func, mod), 0)
            if not isinstance(value, SetValue):
                raise ParseError(f"map({func},{mod},...) needs a set of sets", line, 0)
            try:
                table[mod] = value.as_family()
            except ValueError as exc:
                raise ParseError(f"map({func},{mod},...): {exc}", line, 0) from None

    reg = Regulation(
        modules=frozenset(modules),
        groups=groups,
        credits=dict(sorted(maps["c"].items())),
        turnus=dict(sorted(turnus.items())),
        lower=dict(sorted(maps["l"].items())),
        upper=dict(sorted(maps["u"].items())),
        named_sets=named,
        global_constraints=tuple(constraints["global"]),
        temporal_constraints=tuple(constraints["temporal"]),
    )
    exam: ExamSpec | None = None
    if exam_data:
        exam = ExamSpec(
            primary_tasks=frozenset(ptasks),
            secondary_tasks=frozenset(stasks),
            ep=dict(sorted(ep.items())),
            es=dict(sorted(es.items())),
            deps=frozenset(deps),
            exam_global_constraints=tuple(constraints["exam_global"]),
            exam_temporal_constraints=tuple(constraints["exam_temporal"]),
        )
    _check_references(facts, reg, exam)
    return reg, exam


def _assemble_membership(fact, modules, group_names, members, ptasks, stasks, deps):
    member, target = fact.member, fact.target
    if target == "d":
        if (not isinstance(member, tuple) or len(member) != 2
                or not all(isinstance(p, SetValue) for p in member)):
            raise ParseError("a dependency is a pair (set of sets, set)", fact.line, 0)
        x, w = member
        if w.kind != "set":
            raise ParseError("the second dependency component is a plain set",
                             fact.line, 0)
        try:
            deps.add((x.as_family(), w.members))
        except ValueError:
            raise ParseError("the first dependency component is a set of sets",
                             fact.line, 0) from None
        return
    if not isinstance(member, str):
        raise ParseError(f"membership in {target!r} needs an identifier", fact.line, 0)
    if target == "m":
        modules.add(member)
    elif target == "g":
        group_names.add(member)
    elif target == "ep":
        ptasks.add(member)
    elif target == "es":
        stasks.add(member)
    else:
        members.setdefault(target, set()).add(member)


def _assemble_map(fact, maps, map_lines):
    if not isinstance(fact.key, str):
        raise ParseError(f"map({fact.func},...) needs an identifier key", fact.line, 0)
    table = maps[fact.func]
    if fact.key in table:
        if table[fact.key] != fact.value:
            raise ParseError(
                f"conflicting map({fact.func},{fact.key},...) entries "
                f"(also on line {map_lines[(fact.func, fact.key)]})", fact.line, 0)
        return
    table[fact.key] = fact.value
    map_lines[(fact.func, fact.key)] = fact.line


def _check_references(facts: FactFile, reg: Regulation, exam: ExamSpec | None) -> None:
    """Reject constraint facts that mention undeclared sets or elements."""
    known_elems = set(reg.modules)
    if exam is not None:
        known_elems |= exam.tasks
    for fact in facts.facts:
        if not isinstance(fact, ConstraintFact):
            continue
        for expr in iter_set_exprs(fact.expr):
            if isinstance(expr, NamedSet):
                if expr.name != "m" and reg.set_named(expr.name) is None:
                    raise ParseError(f"undeclared set {expr.name!r}", fact.line, 0)
            elif isinstance(expr, ExamUnion) and not fact.section.startswith("exam"):
                raise ParseError("ee is only meaningful in exam sections", fact.line, 0)
            elif isinstance(expr, Literal):
                for elem in sorted(expr.members - known_elems):
                    raise ParseError(f"undeclared element {elem!r} in set literal",
                                     fact.line, 0)
            elif isinstance(expr, LiteralFamily):
                for inner in expr.members:
                    for elem in sorted(inner - known_elems):
                        raise ParseError(f"undeclared element {elem!r} in set literal",
                                         fact.line, 0)


def parse_instance(text: str) -> tuple[Regulation, ExamSpec | None]:
    """Parse a full regulation file."""
    return assemble(parse_facts(text))


# --------------------------------------------------------------------------
# Serializer
# --------------------------------------------------------------------------

def render_set(expr: SetExpr) -> str:
    if isinstance(expr, NamedSet):
        return expr.name
    if isinstance(expr, PlanUnion):
        return "s"
    if isinstance(expr, SemesterSet):
        return f"s({expr.index})"
    if isinstance(expr, SeasonSet):
        return f"m({expr.season})"
    if isinstance(expr, ExamUnion):
        return "ee"
    if isinstance(expr, Intersect):
        return f"int({render_set(expr.left)},{render_set(expr.right)})"
    if isinstance(expr, Union):
        return f"union({render_set(expr.left)},{render_set(expr.right)})"
    if isinstance(expr, Diff):
        return f"diff({render_set(expr.left)},{render_set(expr.right)})"
    if isinstance(expr, Complement):
        return f"comp({render_set(expr.arg)})"
    if isinstance(expr, Before):
        return f"before({render_set(expr.arg)})"
    if isinstance(expr, After):
        return f"after({render_set(expr.arg)})"
    if isinstance(expr, Between):
        return f"between({render_set(expr.first)},{render_set(expr.second)})"
    if isinstance(expr, Expand):
        return f"expand({render_set(expr.arg)})"
    if isinstance(expr, Literal):
        return "{" + ",".join(sorted(expr.members)) + "}"
    if isinstance(expr, LiteralFamily):
        return _render_family(expr.members)
    raise TypeError(f"not a set expression: {expr!r}")


def _render_family(family: frozenset[frozenset[str]]) -> str:
    inner = sorted(tuple(sorted(s)) for s in family)
    return "{" + ",".join("{" + ",".join(s) + "}" for s in inner) + "}"


def _render_bound(cmp: Comparison) -> str:
    if cmp.op == "bw":
        lo, hi = cmp.bound
        return f"{cmp.op},({lo},{hi})"
    return f"{cmp.op},{cmp.bound}"


def render_constraint(expr: ConstraintExpr) -> str:
    if isinstance(expr, Empty):
        return f"empty({render_set(expr.arg)})"
    if isinstance(expr, Equal):
        return f"equal({render_set(expr.left)},{render_set(expr.right)})"
    if isinstance(expr, SubsetEq):
        return f"subseteq({render_set(expr.left)},{render_set(expr.right)})"
    if isinstance(expr, SubsetProper):
        return f"subset({render_set(expr.left)},{render_set(expr.right)})"
    if isinstance(expr, SupsetEq):
        return f"supseteq({render_set(expr.left)},{render_set(expr.right)})"
    if isinstance(expr, SupsetProper):
        return f"supset({render_set(expr.left)},{render_set(expr.right)})"
    if isinstance(expr, Card):
        return f"card({render_set(expr.arg)},{_render_bound(expr.cmp)})"
    if isinstance(expr, Sum):
        return f"sum({render_set(expr.arg)},{expr.func},{_render_bound(expr.cmp)})"
    if isinstance(expr, Implies):
        return f"implies({render_constraint(expr.antecedent)},{render_constraint(expr.consequent)})"
    if isinstance(expr, Neg):
        return f"neg({render_constraint(expr.arg)})"
    if isinstance(expr, InFamily):
        return f"in_fam({render_set(expr.member)},{render_set(expr.family)})"
    raise TypeError(f"not a constraint: {expr!r}")


def serialize_instance(reg: Regulation, exam: ExamSpec | None = None) -> str:
    """Emit a canonical (pool-free, sorted) regulation file."""
    out: list[str] = []
    for mod in sorted(reg.modules):
        out.append(f"in({mod},m).")
    for mod in sorted(reg.credits):
        out.append(f"map(c,{mod},{reg.credits[mod]}).")
    for mod in sorted(reg.turnus):
        out.append(f"map(s,{mod},{reg.turnus[mod].value}).")
    for grp in sorted(reg.groups):
        out.append(f"in({grp},g).")
        for mod in sorted(reg.groups[grp]):
            out.append(f"in({mod},{grp}).")
    for grp in sorted(reg.lower):
        out.append(f"map(l,{grp},{reg.lower[grp]}).")
    for grp in sorted(reg.upper):
        out.append(f"map(u,{grp},{reg.upper[grp]}).")
    for aux in sorted(reg.named_sets):
        for mod in sorted(reg.named_sets[aux]):
            out.append(f"in({mod},{aux}).")
    if exam is not None:
        for task in sorted(exam.primary_tasks):
            out.append(f"in({task},ep).")
        for task in sorted(exam.secondary_tasks):
            out.append(f"in({task},es).")
        for mod in sorted(exam.ep):
            out.append(f"map(ep,{mod},{_render_family(exam.ep[mod])}).")
        for mod in sorted(exam.es):
            out.append(f"map(es,{mod},{_render_family(exam.es[mod])}).")
        for x, w in sorted(exam.deps,
                           key=lambda d: (sorted(map(sorted, d[0])), sorted(d[1]))):
            wtxt = "{" + ",".join(sorted(w)) + "}"
            out.append(f"in(({_render_family(x)},{wtxt}),d).")
    sections = [("global", reg.global_constraints),
                ("temporal", reg.temporal_constraints)]
    if exam is not None:
        sections += [("exam_global", exam.exam_global_constraints),
                     ("exam_temporal", exam.exam_temporal_constraints)]
    for name, exprs in sections:
        if not exprs:
            continue
        out.append("")
        out.append(f"#{name}.")
        for expr in exprs:
            out.append(render_constraint(expr) + ".")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# Plan files
# --------------------------------------------------------------------------

def _parse_plan_lines(text: str) -> list[frozenset[str]]:
    semesters: list[frozenset[str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        if not sep or not head.strip().isdigit():
            raise ParseError("expected a line of the form 'i: id1 id2 ...'", lineno, 1)
        index = int(head)
        if index != len(semesters) + 1:
            raise ParseError(f"semester {len(semesters) + 1} expected, found {index}",
                             lineno, 1)
        ids = rest.split()
        for elem in ids:
            if not IDENT_RE.match(elem):
                raise ParseError(f"malformed identifier {elem!r}", lineno, 1)
        semesters.append(frozenset(ids))
    if not semesters:
        raise ParseError("empty plan file")
    return semesters


def parse_study_plan(text: str, reg: Regulation | None = None) -> StudyPlan:
    semesters = _parse_plan_lines(text)
    if reg is not None:
        for i, sem in enumerate(semesters, start=1):
            for mod in sorted(sem - reg.modules):
                raise ParseError(f"unknown module {mod!r} in semester {i}")
    return StudyPlan(tuple(semesters))


def parse_exam_plan(text: str, exam: ExamSpec | None = None) -> ExamPlan:
    semesters = _parse_plan_lines(text)
    if exam is not None:
        for i, sem in enumerate(semesters, start=1):
            for task in sorted(sem - exam.tasks):
                raise ParseError(f"unknown task {task!r} in semester {i}")
    return ExamPlan(tuple(semesters))


def serialize_plan(plan: StudyPlan | ExamPlan) -> str:
    lines = []
    for i, sem in enumerate(plan.semesters, start=1):
        suffix = " " + " ".join(sorted(sem)) if sem else ""
        lines.append(f"{i}:{suffix}")
    return "\n".join(lines) + "\n"
