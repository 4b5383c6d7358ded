"""Render parsed structures back to PPDDL text.

Effects are printed in their flattened form (one explicit branch per
outcome), so ``parse(print(d))`` is structurally equal to ``d``.
"""

from __future__ import annotations

from fractions import Fraction

from .model import (
    OBJECT,
    And,
    Atom,
    DomainDef,
    Eq,
    Exists,
    Forall,
    Formula,
    Imply,
    Not,
    Or,
    Outcome,
    ProblemDef,
)


def _typed(params) -> str:
    return " ".join(f"{v} - {t}" if t != OBJECT else v for v, t in params)


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return str(f)
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Not):
        return f"(not {format_formula(f.arg)})"
    if isinstance(f, And):
        return "(and" + "".join(" " + format_formula(x) for x in f.args) + ")"
    if isinstance(f, Or):
        return "(or" + "".join(" " + format_formula(x) for x in f.args) + ")"
    if isinstance(f, Imply):
        return f"(imply {format_formula(f.cond)} {format_formula(f.then)})"
    if isinstance(f, (Forall, Exists)):
        kw = "forall" if isinstance(f, Forall) else "exists"
        return f"({kw} ({_typed(f.params)}) {format_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def _prob(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def _outcome(o: Outcome) -> str:
    parts = [str(a) for a in sorted(o.add, key=str)]
    parts += [f"(not {a})" for a in sorted(o.dels, key=str)]
    return "(and" + "".join(" " + p for p in parts) + ")"


def format_domain(dom: DomainDef) -> str:
    lines = [f"(define (domain {dom.name})"]
    if dom.requirements:
        lines.append(f"  (:requirements {' '.join(dom.requirements)})")
    if dom.types:
        lines.append(f"  (:types {' '.join(f'{t} - {p}' for t, p in dom.types.items())})")
    if dom.constants:
        lines.append(f"  (:constants {_typed(dom.constants)})")
    lines.append("  (:predicates")
    for p in dom.predicates:
        lines.append(f"    ({' '.join([p.name] + ([_typed(p.params)] if p.params else []))})")
    lines.append("  )")
    if any(a.cost is not None for a in dom.action_schemas):
        lines.append("  (:functions (total-cost) - number)")
    for a in dom.action_schemas:
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_typed(a.params)})")
        lines.append(f"    :precondition {format_formula(a.precondition)}")
        cost = f" (increase (total-cost) {_prob(a.cost)})" if a.cost is not None else ""
        if a.effect.deterministic:
            body = _outcome(a.effect.outcomes[0])
            eff = body[:-1] + cost + ")"
        else:
            branches = " ".join(f"{_prob(o.prob)} {_outcome(o)}" for o in a.effect.outcomes)
            eff = f"(and (probabilistic {branches}){cost})"
        lines.append(f"    :effect {eff})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def format_problem(prob: ProblemDef) -> str:
    lines = [f"(define (problem {prob.name})", f"  (:domain {prob.domain_name})"]
    lines.append(f"  (:objects {_typed(prob.objects)})")
    lines.append("  (:init")
    for a in sorted(prob.init, key=str):
        lines.append(f"    {a}")
    lines.append("  )")
    lines.append(f"  (:goal {format_formula(prob.goal)})")
    if prob.metric:
        lines.append(f"  (:metric {prob.metric})")
    lines.append(")")
    return "\n".join(lines) + "\n"
