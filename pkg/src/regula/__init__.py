"""Reasoning about university study regulations.

Parse declarative regulation files, validate and enumerate study and
examination plans, compute forced/possible assignments under assumptions,
and serve an interactive plan-building API.
"""

from .dsl import (
    ParseError, parse_exam_plan, parse_facts, parse_instance,
    parse_study_plan, serialize_instance, serialize_plan,
)
from .model import (
    Assumption, ConsequenceReport, ExamPlan, ExamSpec, Regulation, StudyPlan,
    Turnus, ValidationReport, Violation, check_wellformed,
)
from .semantics import (
    EvalContext, EvalError, eval_set, holds, induce, validate_exam_plan,
    validate_study_plan,
)
from .solver import (
    OracleCapExceeded, SearchBudgetExceeded, SolveRequest, SolveSession,
    brute_force_oracle, consequences, solve,
)

__version__ = "0.1.0"

__all__ = [
    "Assumption", "ConsequenceReport", "EvalContext", "EvalError", "ExamPlan",
    "ExamSpec", "OracleCapExceeded", "ParseError", "Regulation",
    "SearchBudgetExceeded", "SolveRequest", "SolveSession", "StudyPlan",
    "Turnus", "ValidationReport", "Violation", "brute_force_oracle",
    "check_wellformed", "consequences", "eval_set", "holds", "induce",
    "parse_exam_plan", "parse_facts", "parse_instance", "parse_study_plan",
    "serialize_instance", "serialize_plan", "solve", "validate_exam_plan",
    "validate_study_plan",
]
