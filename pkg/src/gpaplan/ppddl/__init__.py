from pathlib import Path

from .grounding import GroundingError, GroundingLimitExceeded, ground
from .model import ActionSchema, Atom, DomainDef, Outcome, PredicateDef, ProbabilisticEffect, ProblemDef
from .parser import (
    ArityMismatch,
    DomainMismatch,
    DuplicateName,
    InvalidProbability,
    UnknownObject,
    UnknownPredicate,
    UnknownType,
    UnsupportedConstruct,
    parse_domain,
    parse_problem,
)
from .printer import format_domain, format_problem
from .sexpr import PPDDLError, PPDDLSyntaxError


def load_text(domain_text: str, problem_text: str, **limits):
    dom = parse_domain(domain_text)
    prob = parse_problem(problem_text, dom)
    return ground(dom, prob, **limits)


def load(domain_path, problem_path, **limits):
    return load_text(
        Path(domain_path).read_text(encoding="utf-8"),
        Path(problem_path).read_text(encoding="utf-8"),
        **limits,
    )


__all__ = [
    "ActionSchema",
    "ArityMismatch",
    "Atom",
    "DomainDef",
    "DomainMismatch",
    "DuplicateName",
    "GroundingError",
    "GroundingLimitExceeded",
    "InvalidProbability",
    "Outcome",
    "PPDDLError",
    "PPDDLSyntaxError",
    "PredicateDef",
    "ProbabilisticEffect",
    "ProblemDef",
    "UnknownObject",
    "UnknownPredicate",
    "UnknownType",
    "UnsupportedConstruct",
    "format_domain",
    "format_problem",
    "ground",
    "load",
    "load_text",
    "parse_domain",
    "parse_problem",
]
