"""Enumeration of admissible plans by backtracking search.

Each module (study mode) or examination task (exam mode) is one decision
variable whose value is a semester in 1..n or 0 for "not taken", so the
at-most-once constraint holds by construction.  Recognized constraint shapes
are compiled into domain prunes and incremental sum/cardinality bounds before
the search starts; anything unrecognized is checked on completed candidates.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, replace

from .model import (
    Assumption, Before, Card, Comparison, Complement, ConsequenceReport,
    ConstraintExpr, Diff, Empty, Equal, ExamPlan, ExamSpec, Implies,
    InFamily, Intersect, Literal, LiteralFamily, NamedSet, Neg, PlanUnion,
    Regulation, SeasonSet, SemesterSet, SetExpr, StudyPlan, SubsetEq,
    SubsetProper, Sum, SupsetEq, SupsetProper, Turnus, Union,
)
from .semantics import (
    EvalContext, holds, induce, instantiate, validate_exam_plan,
    validate_study_plan,
)

_NEG = -(10**12)
_POS = 10**12


def _wrap_plan(semesters, _new=StudyPlan.__new__, _set=object.__setattr__,
               _cls=StudyPlan) -> StudyPlan:
    """Constructor bypass for the bulk path: the dataclass __init__ costs more
    than everything else per plan once millions of plans are composed, and the
    semesters tuple is correct by construction there."""
    plan = _new(_cls)
    _set(plan, "semesters", semesters)
    return plan


class SearchBudgetExceeded(Exception):
    """The node budget ran out; satisfiability is unknown, not refuted."""

    def __init__(self, nodes: int):
        super().__init__(f"search stopped after {nodes} nodes")
        self.nodes = nodes
        self.partial: list = []


class OracleCapExceeded(Exception):
    """The brute-force assignment space exceeds the safety cap."""


@dataclass(frozen=True)
class SolveRequest:
    regulation: Regulation
    horizon: int
    exam: ExamSpec | None = None
    assumptions: tuple[Assumption, ...] = ()
    model_limit: int | None = None
    mode: str = "study"
    seed: int | None = None
    node_budget: int | None = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.mode not in ("study", "exam"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "exam" and self.exam is None:
            raise ValueError("exam mode needs an examination specification")
        if self.model_limit is not None and self.model_limit < 1:
            raise ValueError("model_limit must be positive (or None for all)")
        for a in self.assumptions:
            if a.module not in self.regulation.modules:
                raise ValueError(f"assumption references undeclared module {a.module!r}")
            if a.semester > self.horizon:
                raise ValueError(
                    f"assumption semester {a.semester} exceeds horizon {self.horizon}")


def _assumptions_hold(plan: StudyPlan, assumptions: tuple[Assumption, ...]) -> bool:
    for a in assumptions:
        inside = a.module in plan.semesters[a.semester - 1]
        if inside != (a.polarity == "assigned"):
            return False
    return True


# --------------------------------------------------------------------------
# Static (plan-independent) evaluation
# --------------------------------------------------------------------------

def _static_eval(expr: SetExpr, reg: Regulation) -> frozenset | None:
    """Evaluate an expression that does not depend on the plan, else None."""
    if isinstance(expr, (Literal, LiteralFamily)):
        return expr.members
    if isinstance(expr, NamedSet):
        if expr.name == "m":
            return reg.modules
        return reg.set_named(expr.name)
    if isinstance(expr, SeasonSet):
        wanted = Turnus(expr.season)
        return frozenset(m for m, t in reg.turnus.items() if t is wanted)
    if isinstance(expr, (Intersect, Union, Diff)):
        left = _static_eval(expr.left, reg)
        right = _static_eval(expr.right, reg)
        if left is None or right is None:
            return None
        if isinstance(expr, Intersect):
            return left & right
        if isinstance(expr, Union):
            return left | right
        return left - right
    if isinstance(expr, Complement):
        value = _static_eval(expr.arg, reg)
        return None if value is None else reg.modules - value
    return None


def _flat(value: frozenset) -> bool:
    return not any(isinstance(x, frozenset) for x in value)


def _static_holds(constraint: ConstraintExpr, reg: Regulation) -> bool | None:
    if isinstance(constraint, Empty):
        value = _static_eval(constraint.arg, reg)
        return None if value is None else not value
    if isinstance(constraint, (Equal, SubsetEq, SubsetProper, SupsetEq, SupsetProper)):
        left = _static_eval(constraint.left, reg)
        right = _static_eval(constraint.right, reg)
        if left is None or right is None:
            return None
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
        value = _static_eval(constraint.arg, reg)
        return None if value is None else constraint.cmp.check(len(value))
    if isinstance(constraint, Sum):
        value = _static_eval(constraint.arg, reg)
        if value is None or not _flat(value):
            return None
        if any(m not in reg.credits for m in value):
            return None
        return constraint.cmp.check(sum(reg.credits[m] for m in value))
    if isinstance(constraint, Implies):
        ante = _static_holds(constraint.antecedent, reg)
        if ante is False:
            return True
        cons = _static_holds(constraint.consequent, reg)
        if ante is True:
            return cons
        return True if cons is True else None
    if isinstance(constraint, Neg):
        value = _static_holds(constraint.arg, reg)
        return None if value is None else not value
    if isinstance(constraint, InFamily):
        member = _static_eval(constraint.member, reg)
        family = _static_eval(constraint.family, reg)
        if member is None or family is None:
            return None
        return member in family
    return None


def _interval(cmp: Comparison) -> tuple[int, int]:
    if cmp.op == "bw":
        return cmp.bound
    bound = cmp.bound
    return {"leq": (_NEG, bound), "geq": (bound, _POS), "eq": (bound, bound),
            "lt": (_NEG, bound - 1), "gt": (bound + 1, _POS)}[cmp.op]


# --------------------------------------------------------------------------
# Study-mode search
# --------------------------------------------------------------------------

#: Suffix length of the memoized tail block in unlimited enumerations.
_MEMO_TAIL = 8


class _BeforeState:
    """Incremental bounds for sum/card over before(T), activated once every
    member of T has been decided and the cut-off semester k is known."""

    __slots__ = ("tdepths", "remaining", "kmax", "active", "k", "sid",
                 "table", "hi_suf", "lo_suf", "weights")

    def __init__(self, tdepths, sid, table, hi_suf, lo_suf, weights):
        self.tdepths = tdepths
        self.remaining = len(tdepths)
        self.kmax = 0
        self.active = False
        self.k = 0
        self.sid = sid
        self.table = table
        self.hi_suf = hi_suf
        self.lo_suf = lo_suf
        self.weights = weights


class _StudySearch:
    def __init__(self, req: SolveRequest):
        reg = req.regulation
        self.req = req
        self.reg = reg
        self.n = n = req.horizon
        self.modules = reg.modules
        self.all_window = frozenset(range(1, n + 1))
        self.evens = frozenset(range(2, n + 1, 2))
        self.odds = frozenset(range(1, n + 1, 2))
        self.root_unsat = False
        self.residuals: list[ConstraintExpr] = []
        self._sum_specs: list = []
        self._before_specs: list = []

        canonical = sorted(reg.modules, key=lambda m: (-reg.credits.get(m, 0), m))
        base_values = list(range(1, n + 1)) + [0]
        rng = random.Random(req.seed) if req.seed is not None else None
        if rng is not None:
            rng.shuffle(canonical)
        self.dom: dict[str, list[int]] = {}
        for m in canonical:
            values = base_values[:]
            if rng is not None:
                rng.shuffle(values)
            self.dom[m] = values

        for constraint in reg.global_constraints + reg.temporal_constraints:
            for ground in instantiate(constraint, n):
                if self.root_unsat:
                    break
                if not self._compile(ground):
                    self.residuals.append(ground)
        for a in req.assumptions:
            if a.polarity == "assigned":
                self._restrict(a.module, frozenset({a.semester}))
            else:
                self._ban(a.module, frozenset({a.semester}))
        self._tighten()
        if self.root_unsat or any(not self.dom[m] for m in canonical):
            self.root_unsat = True
            self.order: list[str] = []
            self.index: dict[str, int] = {}
            self.domains: list[list[int]] = []
            self.memo_depth = None
            return

        # Modules whose domain is already a single value go first; they never
        # branch, so the enumeration order over the others is unchanged.
        self.order = ([m for m in canonical if len(self.dom[m]) == 1]
                      + [m for m in canonical if len(self.dom[m]) > 1])
        self.index = {m: d for d, m in enumerate(self.order)}
        self.domains = [self.dom[m] for m in self.order]
        # Unlimited enumerations memoize the tail block of the search tree
        # keyed by solver state; capped or budgeted runs stay fully lazy.
        self.memo_depth = None
        if req.model_limit is None and req.node_budget is None and self.order:
            self.memo_depth = max(0, len(self.order) - _MEMO_TAIL)
        self._build_states()

    # -- root propagation --------------------------------------------------

    def _restrict(self, module: str, allowed: frozenset[int]) -> None:
        self.dom[module] = [v for v in self.dom[module] if v in allowed]

    def _ban(self, module: str, banned: frozenset[int]) -> None:
        if banned:
            self.dom[module] = [v for v in self.dom[module] if v not in banned]

    def _ban_all(self, banned: frozenset[int]) -> None:
        if banned:
            for m in self.dom:
                self._ban(m, banned)

    def _tighten(self) -> None:
        """Bound-propagate the sum specs onto the domains.

        When the best attainable sum only just reaches the lower bound, every
        member that could count must count (and dually for the upper bound),
        so the uncommitted members lose their non-counting values.
        """
        changed = True
        while changed and not self.root_unsat:
            changed = False
            for members, window, weights, lob, hib in self._sum_specs:
                hi0 = lo0 = 0
                open_members = []
                for m in members:
                    weight = 1 if weights is None else weights.get(m, 0)
                    if weight == 0:
                        continue
                    values = self.dom[m]
                    if not values:
                        self.root_unsat = True
                        return
                    counting = [v for v in values if v and v in window]
                    if counting:
                        hi0 += weight
                    if len(counting) == len(values):
                        lo0 += weight
                    elif counting:
                        open_members.append((m, counting))
                if hi0 < lob or lo0 > hib:
                    self.root_unsat = True
                    return
                if hi0 == lob and open_members:
                    for m, counting in open_members:
                        self.dom[m] = counting
                    changed = True
                elif lo0 == hib and open_members:
                    for m, counting in open_members:
                        drop = set(counting)
                        self.dom[m] = [v for v in self.dom[m] if v not in drop]
                    changed = True

    def _window_of(self, expr: SetExpr) -> frozenset[int] | None:
        if isinstance(expr, PlanUnion):
            return self.all_window
        if isinstance(expr, SemesterSet):
            index = expr.index
            if isinstance(index, int):
                return frozenset({index}) & self.all_window
            if index == "even":
                return self.evens
            if index == "odd":
                return self.odds
        return None

    def _compile(self, c: ConstraintExpr) -> bool:
        """Try to turn a ground constraint into prunes/states; False = leaf-check."""
        static = _static_holds(c, self.reg)
        if static is True:
            return True
        if static is False:
            self.root_unsat = True
            return True
        if isinstance(c, Empty):
            return self._compile_empty(c.arg)
        if isinstance(c, (SubsetEq, SupsetEq)):
            sub, sup = (c.left, c.right) if isinstance(c, SubsetEq) else (c.right, c.left)
            return self._compile_subseteq(sub, sup)
        if isinstance(c, (SubsetProper, SupsetProper)):
            sub, sup = (c.left, c.right) if isinstance(c, SubsetProper) else (c.right, c.left)
            self._compile_subseteq(sub, sup)  # necessary part; properness at the leaf
            return False
        if isinstance(c, Equal):
            return self._compile_equal(c)
        if isinstance(c, Card):
            return self._compile_counting(c.arg, None, c.cmp)
        if isinstance(c, Sum):
            return self._compile_counting(c.arg, self.reg.credits, c.cmp)
        if isinstance(c, Implies):
            ante = _static_holds(c.antecedent, self.reg)
            if ante is False:
                return True
            if ante is True:
                return self._compile(c.consequent)
            return False
        return False

    def _compile_empty(self, arg: SetExpr) -> bool:
        window = self._window_of(arg)
        if window is not None:
            self._ban_all(window)
            return True
        if isinstance(arg, Intersect):
            wl = self._window_of(arg.left)
            wr = self._window_of(arg.right)
            if wl is not None and wr is not None:
                # One semester per module, so only the window overlap matters.
                self._ban_all(wl & wr)
                return True
            for x, y in ((arg.left, arg.right), (arg.right, arg.left)):
                static = _static_eval(x, self.reg)
                wy = self._window_of(y)
                if static is not None and _flat(static) and wy is not None:
                    for m in static & self.modules:
                        self._ban(m, wy)
                    return True
        return False

    def _compile_subseteq(self, sub: SetExpr, sup: SetExpr) -> bool:
        static_sub = _static_eval(sub, self.reg)
        if static_sub is not None and _flat(static_sub):
            ws = self._window_of(sup)
            if ws is not None:
                if static_sub - self.modules:
                    self.root_unsat = True
                    return True
                for m in static_sub:
                    self._restrict(m, ws)
                return True
            if isinstance(sup, Intersect):
                lit = Literal(static_sub)
                left = self._compile_subseteq(lit, sup.left)
                right = self._compile_subseteq(lit, sup.right)
                return left and right
        wl = self._window_of(sub)
        if wl is not None:
            static_sup = _static_eval(sup, self.reg)
            if static_sup is not None and _flat(static_sup):
                for m in self.modules - static_sup:
                    self._ban(m, wl)
                return True
            wr = self._window_of(sup)
            if wr is not None:
                self._ban_all(wl - wr)
                return True
        if isinstance(sub, Intersect):
            static_sup = _static_eval(sup, self.reg)
            if static_sup is not None and _flat(static_sup):
                for x, y in ((sub.left, sub.right), (sub.right, sub.left)):
                    static = _static_eval(x, self.reg)
                    wy = self._window_of(y)
                    if static is not None and _flat(static) and wy is not None:
                        for m in (static & self.modules) - static_sup:
                            self._ban(m, wy)
                        return True
        return False

    def _compile_equal(self, c: Equal) -> bool:
        for a, b in ((c.left, c.right), (c.right, c.left)):
            target = _static_eval(b, self.reg)
            if target is None or not _flat(target):
                continue
            wa = self._window_of(a)
            if wa is not None:
                if target - self.modules:
                    self.root_unsat = True
                    return True
                for m in target:
                    self._restrict(m, wa)
                for m in self.modules - target:
                    self._ban(m, wa)
                return True
            if isinstance(a, Intersect):
                for x, y in ((a.left, a.right), (a.right, a.left)):
                    static = _static_eval(x, self.reg)
                    wy = self._window_of(y)
                    if static is not None and _flat(static) and wy is not None:
                        if not target <= static or target - self.modules:
                            self.root_unsat = True
                            return True
                        for m in target:
                            self._restrict(m, wy)
                        for m in (static & self.modules) - target:
                            self._ban(m, wy)
                        return True
        return False

    def _compile_counting(self, arg: SetExpr, weights: dict[str, int] | None,
                          cmp: Comparison) -> bool:
        lob, hib = _interval(cmp)
        window = self._window_of(arg)
        members = self.modules if window is not None else None
        if members is None and isinstance(arg, Intersect):
            for x, y in ((arg.left, arg.right), (arg.right, arg.left)):
                static = _static_eval(x, self.reg)
                wy = self._window_of(y)
                if static is not None and _flat(static) and wy is not None:
                    members = static & self.modules
                    window = wy
                    break
        if members is not None:
            self._sum_specs.append((members, window, weights, lob, hib))
            return True
        if isinstance(arg, Before):
            target = _static_eval(arg.arg, self.reg)
            if target is not None and _flat(target):
                anchors = target & self.modules
                if not anchors:
                    if lob > 0 or hib < 0:
                        self.root_unsat = True
                    return True
                self._before_specs.append((anchors, weights, lob, hib))
                return True
        return False

    # -- state construction ------------------------------------------------

    def _build_states(self) -> None:
        """Freeze the sum specs into [hi, lo, lob, hib] states plus per
        (depth, value) delta tuples; hi/lo track the best/worst completion of
        the partial assignment, so a bound violation prunes the subtree."""
        n = self.n
        count = len(self.order)
        self.states: list[list[int]] = []
        delta: list[list[list]] = [[[] for _ in range(n + 1)] for _ in range(count)]

        for members, window, weights, lob, hib in self._sum_specs:
            hi0 = lo0 = 0
            sid = len(self.states)
            for m in members:
                weight = 1 if weights is None else weights.get(m, 0)
                if weight == 0:
                    continue
                values = self.dom[m]
                counted = [v != 0 and v in window for v in range(n + 1)]
                can = any(counted[v] for v in values)
                must = all(counted[v] for v in values)
                if can:
                    hi0 += weight
                if must:
                    lo0 += weight
                if not can:
                    continue
                d = self.index[m]
                for v in values:
                    da = weight if counted[v] else 0
                    dh = da - weight
                    dl = da - (weight if must else 0)
                    if dh or dl:
                        delta[d][v].append((sid, dh, dl))
            self.states.append([hi0, lo0, lob, hib])
            if hi0 < lob or lo0 > hib:
                self.root_unsat = True

        self.before_states: list[_BeforeState] = []
        for anchors, weights, lob, hib in self._before_specs:
            sid = len(self.states)
            self.states.append([0, 0, lob, hib])
            w_by_depth = [1 if weights is None else weights.get(m, 0)
                          for m in self.order]
            table = []
            hi_suf = []
            lo_suf = []
            for k in range(n + 2):
                can_row = [any(0 < v < k for v in self.dom[m]) for m in self.order]
                must_row = [bool(self.dom[m]) and all(0 < v < k for v in self.dom[m])
                            for m in self.order]
                rows = []
                for d in range(count):
                    weight = w_by_depth[d]
                    cells = []
                    for v in range(n + 1):
                        da = weight if 0 < v < k else 0
                        cells.append((da - (weight if can_row[d] else 0),
                                      da - (weight if must_row[d] else 0)))
                    rows.append(tuple(cells))
                table.append(tuple(rows))
                hs = [0] * (count + 1)
                ls = [0] * (count + 1)
                for d in range(count - 1, -1, -1):
                    hs[d] = hs[d + 1] + (w_by_depth[d] if can_row[d] else 0)
                    ls[d] = ls[d + 1] + (w_by_depth[d] if must_row[d] else 0)
                hi_suf.append(hs)
                lo_suf.append(ls)
            tdepths = frozenset(self.index[m] for m in anchors)
            self.before_states.append(
                _BeforeState(tdepths, sid, table, hi_suf, lo_suf, w_by_depth))

        self.delta = [[tuple(cell) for cell in row] for row in delta]

    # -- enumeration -------------------------------------------------------

    def _apply(self, d: int, v: int):
        """Apply the state deltas of assigning value v at depth d.

        Returns (ok, applied, brecs): ok is False when some bound broke, in
        which case only the first `applied` sum entries and the recorded
        before-ops were written; _unapply with the same triple restores the
        previous state exactly.
        """
        states = self.states
        applied = 0
        for sid, dh, dl in self.delta[d][v]:
            st = states[sid]
            nh = st[0] + dh
            nl = st[1] + dl
            if nh < st[2] or nl > st[3]:
                return False, applied, None
            st[0] = nh
            st[1] = nl
            applied += 1
        brecs = None
        if self.before_states:
            brecs = []
            for b in self.before_states:
                if b.active:
                    dh, dl = b.table[b.k][d][v]
                    st = states[b.sid]
                    nh = st[0] + dh
                    nl = st[1] + dl
                    if nh < st[2] or nl > st[3]:
                        return False, applied, brecs
                    st[0] = nh
                    st[1] = nl
                    brecs.append((0, b))
                elif d in b.tdepths:
                    prev = b.kmax
                    b.remaining -= 1
                    if v > b.kmax:
                        b.kmax = v
                    if b.remaining:
                        brecs.append((1, b, prev, False))
                    else:
                        b.active = True
                        b.k = b.kmax
                        brecs.append((1, b, prev, True))
                        st = states[b.sid]
                        st[0], st[1] = self._activation_bounds(b, d)
                        if st[0] < st[2] or st[1] > st[3]:
                            return False, applied, brecs
        return True, applied, brecs

    def _unapply(self, d: int, v: int, applied: int, brecs) -> None:
        states = self.states
        entries = self.delta[d][v]
        for i in range(applied - 1, -1, -1):
            sid, dh, dl = entries[i]
            st = states[sid]
            st[0] -= dh
            st[1] -= dl
        if brecs:
            for rec in reversed(brecs):
                b = rec[1]
                if rec[0] == 0:
                    dh, dl = b.table[b.k][d][v]
                    st = states[b.sid]
                    st[0] -= dh
                    st[1] -= dl
                else:
                    if rec[3]:
                        b.active = False
                        b.k = 0
                        st = states[b.sid]
                        st[0] = 0
                        st[1] = 0
                    b.remaining += 1
                    b.kmax = rec[2]

    def _activation_bounds(self, b: _BeforeState, d: int) -> tuple[int, int]:
        """Fresh hi/lo for a before-state that just fixed its cut-off at depth
        d: exact weight of the decided assignments plus the table's bounds for
        the still-open tail."""
        k = b.k
        wts = b.weights
        val = self._val
        assigned = 0
        for dd in range(d + 1):
            if 0 < val[dd] < k:
                assigned += wts[dd]
        return assigned + b.hi_suf[k][d + 1], assigned + b.lo_suf[k][d + 1]

    def iter_solutions(self):
        """Lazy depth-first enumeration; the node budget is charged here."""
        if self.root_unsat:
            return
        count = len(self.order)
        n = self.n
        if count == 0:
            plan = StudyPlan(tuple(frozenset() for _ in range(n)))
            if self._residuals_ok(plan):
                yield plan
            return

        domains = self.domains
        budget = self.req.node_budget
        residuals = self.residuals
        val = self._val = [0] * count
        vi = [0] * count
        undo: list = [None] * count
        sems: list[list[str]] = [[] for _ in range(n)]
        nodes = 0
        d = 0
        while True:
            if vi[d] >= len(domains[d]):
                if d == 0:
                    return
                d -= 1
                self._unapply(d, val[d], len(self.delta[d][val[d]]), undo[d])
                if val[d]:
                    sems[val[d] - 1].pop()
                vi[d] += 1
                continue
            v = domains[d][vi[d]]
            nodes += 1
            if budget is not None and nodes > budget:
                raise SearchBudgetExceeded(nodes)
            val[d] = v
            ok, applied, brecs = self._apply(d, v)
            if not ok:
                self._unapply(d, v, applied, brecs)
                vi[d] += 1
                continue
            if v:
                sems[v - 1].append(self.order[d])
            undo[d] = brecs
            if d == count - 1:
                plan = StudyPlan(tuple(frozenset(s) for s in sems))
                if not residuals or self._residuals_ok(plan):
                    yield plan
                self._unapply(d, v, applied, brecs)
                if v:
                    sems[v - 1].pop()
                vi[d] += 1
                continue
            d += 1
            vi[d] = 0

    def collect(self) -> list[StudyPlan]:
        """Full enumeration in iter_solutions order, built bottom-up.

        The search tree is split at memo_depth: distinct tails are enumerated
        once per solver-state fingerprint and cached as per-semester columns,
        then each admissible prefix is composed onto its cached tail block.
        Set unions are cached per (prefix semester, tail semester) pair, so
        the number of set allocations is governed by the number of distinct
        semester contents rather than by the number of plans.
        """
        out: list[StudyPlan] = []
        if self.root_unsat:
            return out
        md = self.memo_depth
        if md is None:
            return list(self.iter_solutions())
        if not self.order:
            plan = StudyPlan(tuple(frozenset() for _ in range(self.n)))
            if self._residuals_ok(plan):
                out.append(plan)
            return out

        memo: dict = {}
        ucache: dict = {}
        residuals = self.residuals

        def visit(sems: list[list[str]]) -> None:
            key = self._memo_key(md)
            entry = memo.get(key)
            if entry is None:
                memo[key] = entry = self._suffix_columns(md)
            cols = entry[0]
            if cols[0]:
                composed = self._compose(sems, cols, ucache)
                if residuals:
                    out.extend(p for p in composed if self._residuals_ok(p))
                else:
                    out.extend(composed)

        self._walk_prefixes(md, visit)
        return out

    def realized_values(self) -> list[set[int]]:
        """Per-depth sets of semester values taken in at least one solution.

        Only valid without residual constraints (callers check); with the
        whole space visited through the tail cache this is far cheaper than
        per-cell satisfiability probes, and exact.
        """
        count = len(self.order)
        realized: list[set[int]] = [set() for _ in range(count)]
        if self.root_unsat or count == 0:
            return realized
        md = self.memo_depth
        if md is None:
            md = max(0, count - _MEMO_TAIL)
        memo: dict = {}

        def visit(sems: list[list[str]]) -> None:
            key = self._memo_key(md)
            entry = memo.get(key)
            if entry is None:
                memo[key] = entry = self._suffix_columns(md)
            breal = entry[1]
            if breal[md]:
                val = self._val
                for dd in range(md):
                    realized[dd].add(val[dd])
                for dd in range(md, count):
                    realized[dd] |= breal[dd]

        self._walk_prefixes(md, visit)
        return realized

    def _walk_prefixes(self, md: int, visit) -> None:
        """DFS over depths 0..md-1 calling visit(sems) at every consistent
        prefix; self._val holds the assignment during the call."""
        count = len(self.order)
        domains = self.domains
        val = self._val = [0] * count
        sems: list[list[str]] = [[] for _ in range(self.n)]
        if md == 0:
            visit(sems)
            return
        vi = [0] * (md + 1)
        undo: list = [None] * md
        d = 0
        while True:
            if d == md:
                visit(sems)
                d -= 1
                self._unapply(d, val[d], len(self.delta[d][val[d]]), undo[d])
                if val[d]:
                    sems[val[d] - 1].pop()
                vi[d] += 1
                continue
            if vi[d] >= len(domains[d]):
                if d == 0:
                    return
                d -= 1
                self._unapply(d, val[d], len(self.delta[d][val[d]]), undo[d])
                if val[d]:
                    sems[val[d] - 1].pop()
                vi[d] += 1
                continue
            v = domains[d][vi[d]]
            val[d] = v
            ok, applied, brecs = self._apply(d, v)
            if not ok:
                self._unapply(d, v, applied, brecs)
                vi[d] += 1
                continue
            if v:
                sems[v - 1].append(self.order[d])
            undo[d] = brecs
            d += 1
            vi[d] = 0

    def _compose(self, sems: list[list[str]], cols, ucache: dict):
        """Iterator of StudyPlans pairing the current prefix with every tail
        piece, reusing union results across pieces and across prefixes."""
        mapped = []
        for prefix_names, col in zip(sems, cols):
            if not prefix_names:
                mapped.append(col)
                continue
            pre = frozenset(prefix_names)
            local = {}
            for x in set(col):
                u = ucache.get((pre, x))
                if u is None:
                    u = pre | x if x else pre
                    ucache[(pre, x)] = u
                local[x] = u
            mapped.append(list(map(local.__getitem__, col)))
        return map(_wrap_plan, zip(*mapped))

    def _memo_key(self, md: int):
        """Solver state fingerprint at depth md: everything the suffix subtree
        depends on. Two prefixes with equal keys have identical tails."""
        val = self._val
        n = self.n
        bparts = []
        for b in self.before_states:
            if b.active:
                bparts.append((True, b.k))
            else:
                wts = b.weights
                vec = [0] * (n + 2)
                for dd in range(md):
                    v = val[dd]
                    if v:
                        w = wts[dd]
                        for k in range(v + 1, n + 2):
                            vec[k] += w
                bparts.append((False, b.remaining, b.kmax, tuple(vec)))
        return (tuple((st[0], st[1]) for st in self.states), tuple(bparts))

    def _suffix_columns(self, md: int):
        """All completions of the tail depths md.., one list per semester, in
        the exact order the plain search would produce them, plus the set of
        values each tail depth takes across those completions.

        Runs inside the suspended main loop, so self._val still holds the
        prefix assignment; before-state activations read it directly. The memo
        key fingerprints exactly that prefix contribution, which is what makes
        a cached tail valid for every prefix sharing the key.
        """
        domains = self.domains
        count = len(self.order)
        n = self.n
        names: list[list[str]] = [[] for _ in range(n)]
        cols: tuple[list, ...] = tuple([] for _ in range(n))
        breal: list[set[int]] = [set() for _ in range(count)]
        fcache: dict = {}
        val = self._val
        vi = [0] * count
        undo: list = [None] * count
        d = md
        while True:
            if vi[d] >= len(domains[d]):
                if d == md:
                    return cols, breal
                d -= 1
                self._unapply(d, val[d], len(self.delta[d][val[d]]), undo[d])
                if val[d]:
                    names[val[d] - 1].pop()
                vi[d] += 1
                continue
            v = domains[d][vi[d]]
            val[d] = v
            ok, applied, brecs = self._apply(d, v)
            if not ok:
                self._unapply(d, v, applied, brecs)
                vi[d] += 1
                continue
            if v:
                names[v - 1].append(self.order[d])
            undo[d] = brecs
            if d == count - 1:
                for j in range(n):
                    content = tuple(names[j])
                    fs = fcache.get(content)
                    if fs is None:
                        fcache[content] = fs = frozenset(content)
                    cols[j].append(fs)
                for dd in range(md, count):
                    breal[dd].add(val[dd])
                self._unapply(d, v, applied, brecs)
                if v:
                    names[v - 1].pop()
                vi[d] += 1
                continue
            d += 1
            vi[d] = 0

    def _residuals_ok(self, plan: StudyPlan) -> bool:
        if not self.residuals:
            return True
        ctx = EvalContext.for_study(self.reg, plan)
        return all(holds(c, ctx) for c in self.residuals)


# --------------------------------------------------------------------------
# Exam-mode search
# --------------------------------------------------------------------------

class _ExamSearch:
    """Exam plans are enumerated over task-semester assignments and checked by
    the validator on completion; exam instances are small by construction."""

    def __init__(self, req: SolveRequest):
        self.req = req
        n = req.horizon
        tasks = sorted(req.exam.tasks)
        base_values = list(range(1, n + 1)) + [0]
        rng = random.Random(req.seed) if req.seed is not None else None
        if rng is not None:
            rng.shuffle(tasks)
        self.order = tasks
        self.domains = []
        for _ in tasks:
            values = base_values[:]
            if rng is not None:
                rng.shuffle(values)
            self.domains.append(values)

    def iter_solutions(self):
        req = self.req
        n = req.horizon
        budget = req.node_budget
        nodes = 0
        for combo in itertools.product(*self.domains):
            nodes += 1
            if budget is not None and nodes > budget:
                raise SearchBudgetExceeded(nodes)
            sems: list[set[str]] = [set() for _ in range(n)]
            for task, v in zip(self.order, combo):
                if v:
                    sems[v - 1].add(task)
            eplan = ExamPlan(tuple(frozenset(s) for s in sems))
            induced = self._admissible(eplan)
            if induced is not None:
                yield (eplan, induced)

    def collect(self) -> list:
        return list(self.iter_solutions())

    def _admissible(self, eplan: ExamPlan) -> StudyPlan | None:
        req = self.req
        report = validate_exam_plan(req.regulation, req.exam, eplan)
        if not report.admissible:
            return None
        induced = induce(eplan, req.exam, req.regulation.modules)
        if not _assumptions_hold(induced, req.assumptions):
            return None
        return induced


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------

def _make_search(req: SolveRequest):
    return _ExamSearch(req) if req.mode == "exam" else _StudySearch(req)


def solve(req: SolveRequest) -> list:
    """Enumerate admissible plans: StudyPlan items in study mode,
    (ExamPlan, induced StudyPlan) pairs in exam mode."""
    search = _make_search(req)
    if req.model_limit is None and req.node_budget is None:
        return search.collect()
    out: list = []
    try:
        for solution in search.iter_solutions():
            out.append(solution)
            if req.model_limit is not None and len(out) >= req.model_limit:
                break
    except SearchBudgetExceeded as exc:
        exc.partial = out
        raise
    return out


class SolveSession:
    """Single-owner cursor over the deterministic solution sequence."""

    def __init__(self, request: SolveRequest):
        self.request = request
        self._iterator = None
        self._exhausted = False

    def next(self):
        """The next solution, or None once (and forever after) exhausted."""
        if self._exhausted:
            return None
        if self._iterator is None:
            self._iterator = _make_search(self.request).iter_solutions()
        try:
            return next(self._iterator)
        except StopIteration:
            self._exhausted = True
            return None

    def reset(self) -> None:
        self._iterator = None
        self._exhausted = False

    @property
    def exhausted(self) -> bool:
        return self._exhausted


def _study_component(solution) -> StudyPlan:
    return solution[1] if isinstance(solution, tuple) else solution


def consequences(req: SolveRequest) -> ConsequenceReport:
    """Brave/cautious semester assignments.

    A module is possible at semester i when some solution places it there and
    forced when every solution does.  Study-mode requests without a node
    budget are answered exactly from one memoized sweep of the solution
    space; otherwise each cell is decided by a satisfiability probe (with an
    added "assigned" assumption, or an "excluded" one for forcedness), and
    budget overruns mark individual cells unknown.
    """
    n = req.horizon
    empties = tuple(frozenset() for _ in range(n))
    if req.mode != "exam" and req.node_budget is None:
        search = _StudySearch(replace(req, model_limit=None, node_budget=None))
        if not search.residuals:
            return _exact_consequences(search, n, empties)
    base = solve(replace(req, model_limit=1))
    if not base:
        return ConsequenceReport(False, empties, empties)
    witnesses = [_study_component(base[0])]
    mods = sorted(req.regulation.modules)
    possible = [set() for _ in range(n)]
    unknown = [set() for _ in range(n)]
    complete = True

    def query(extra: Assumption):
        probe = replace(req, assumptions=req.assumptions + (extra,), model_limit=1)
        return solve(probe)

    for m in mods:
        for i in range(1, n + 1):
            if any(m in w.semesters[i - 1] for w in witnesses):
                possible[i - 1].add(m)
                continue
            try:
                found = query(Assumption(m, i, "assigned"))
            except SearchBudgetExceeded:
                unknown[i - 1].add(m)
                complete = False
                continue
            if found:
                witnesses.append(_study_component(found[0]))
                possible[i - 1].add(m)

    forced = [set() for _ in range(n)]
    for m in mods:
        for i in range(1, n + 1):
            if m not in possible[i - 1]:
                continue
            if not all(m in w.semesters[i - 1] for w in witnesses):
                continue
            try:
                found = query(Assumption(m, i, "excluded"))
            except SearchBudgetExceeded:
                unknown[i - 1].add(m)
                complete = False
                continue
            if found:
                witnesses.append(_study_component(found[0]))
            else:
                forced[i - 1].add(m)

    return ConsequenceReport(
        True,
        tuple(frozenset(s) for s in forced),
        tuple(frozenset(s) for s in possible),
        complete,
        tuple(frozenset(s) for s in unknown),
    )


def _exact_consequences(search: _StudySearch, n: int,
                        empties: tuple) -> ConsequenceReport:
    if not search.order:
        return ConsequenceReport(not search.root_unsat, empties, empties)
    realized = search.realized_values()
    if not any(realized):
        return ConsequenceReport(False, empties, empties)
    possible = [set() for _ in range(n)]
    forced = [set() for _ in range(n)]
    for d, m in enumerate(search.order):
        values = realized[d]
        for i in values:
            if i:
                possible[i - 1].add(m)
        if len(values) == 1:
            (i,) = values
            if i:
                forced[i - 1].add(m)
    return ConsequenceReport(
        True,
        tuple(frozenset(s) for s in forced),
        tuple(frozenset(s) for s in possible),
    )


def brute_force_oracle(req: SolveRequest, cap: int = 10_000_000) -> list:
    """Definitional enumeration: try every assignment, keep what the validator
    accepts.  Only usable when (n+1)^variables stays below the cap."""
    n = req.horizon
    if req.mode == "exam":
        names = sorted(req.exam.tasks)
    else:
        names = sorted(req.regulation.modules)
    space = (n + 1) ** len(names)
    if space > cap:
        raise OracleCapExceeded(f"{space} assignments exceed the cap of {cap}")
    out = []
    for combo in itertools.product(range(n + 1), repeat=len(names)):
        sems: list[set[str]] = [set() for _ in range(n)]
        for name, v in zip(names, combo):
            if v:
                sems[v - 1].add(name)
        if req.mode == "exam":
            eplan = ExamPlan(tuple(frozenset(s) for s in sems))
            if not validate_exam_plan(req.regulation, req.exam, eplan).admissible:
                continue
            induced = induce(eplan, req.exam, req.regulation.modules)
            if _assumptions_hold(induced, req.assumptions):
                out.append((eplan, induced))
        else:
            plan = StudyPlan(tuple(frozenset(s) for s in sems))
            if not validate_study_plan(req.regulation, plan).admissible:
                continue
            if _assumptions_hold(plan, req.assumptions):
                out.append(plan)
    return out
