"""Lifted domain/problem structures produced by the parser."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

OBJECT = "object"


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"({' '.join((self.pred,) + self.args)})"


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Imply:
    cond: "Formula"
    then: "Formula"


@dataclass(frozen=True)
class Forall:
    params: tuple[tuple[str, str], ...]
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    params: tuple[tuple[str, str], ...]
    body: "Formula"


Formula = Union[Atom, Eq, Not, And, Or, Imply, Forall, Exists]
TRUE = And(())


@dataclass(frozen=True)
class Outcome:
    prob: Fraction
    add: frozenset[Atom] = frozenset()
    dels: frozenset[Atom] = frozenset()


@dataclass(frozen=True)
class ProbabilisticEffect:
    """Flattened effect: mutually exclusive outcomes whose probabilities sum to 1."""

    outcomes: tuple[Outcome, ...]

    @property
    def total(self) -> Fraction:
        return sum((o.prob for o in self.outcomes), Fraction(0))

    @property
    def deterministic(self) -> bool:
        return len(self.outcomes) == 1


@dataclass(frozen=True)
class PredicateDef:
    name: str
    params: tuple[tuple[str, str], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]
    precondition: Formula
    effect: ProbabilisticEffect
    cost: Fraction | None = None


@dataclass
class DomainDef:
    name: str
    requirements: tuple[str, ...] = ()
    # child type -> parent type; "object" is the implicit root
    types: dict[str, str] = field(default_factory=dict)
    constants: list[tuple[str, str]] = field(default_factory=list)
    predicates: list[PredicateDef] = field(default_factory=list)
    action_schemas: list[ActionSchema] = field(default_factory=list)

    def predicate(self, name: str) -> PredicateDef:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def schema(self, name: str) -> ActionSchema:
        for a in self.action_schemas:
            if a.name == name:
                return a
        raise KeyError(name)

    def ancestors(self, t: str) -> list[str]:
        """``t`` and its supertypes, excluding the implicit root."""
        out = []
        seen = set()
        while t != OBJECT and t not in seen:
            seen.add(t)
            out.append(t)
            t = self.types.get(t, OBJECT)
        return out

    def is_subtype(self, t: str, parent: str) -> bool:
        return parent == OBJECT or parent in self.ancestors(t)


@dataclass
class ProblemDef:
    name: str
    domain_name: str
    objects: list[tuple[str, str]]
    init: frozenset[Atom]
    goal: Formula
    metric: str | None = None
