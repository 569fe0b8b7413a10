"""Satisfiability and derivability workbench for multi-agent
justification logics with agent interactions."""

from .agents import AgentAnalysis, ClassificationReport, ROOT, analyze, classify
from .logic import (
    ConstantSpecification,
    LogicError,
    LogicSpec,
    load_logic,
    load_logic_file,
    make_logic,
)
from .models import (
    FModel,
    brute_force_sat,
    check_strong_evidence,
    find_cluster,
    model_from_text,
    model_to_text,
    validate_frame,
)
from .star import (
    FiniteFrame,
    PrefixedStar,
    StarEngine,
    derivable,
    derives_any,
    prove_justified,
    prove_plus_free,
    pstar,
    saturate_naive,
)
from .syntax import (
    Atom,
    FALSUM,
    Formula,
    Just,
    ParseError,
    StarExpression,
    Term,
    parse_formula,
    parse_term,
    print_formula,
    print_term,
)
from .tableau import (
    Branch,
    Limits,
    PrefixedFormula,
    ResourceExceeded,
    Satisfiable,
    Unsatisfiable,
    decide,
    extract_model,
)

__version__ = "0.1.0"
