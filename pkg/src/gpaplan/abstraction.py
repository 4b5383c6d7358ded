"""Canonical abstraction of ground states and actions.

An object's *role* is the set of unary predicates it satisfies (its declared
type and supertypes count as unary predicates).  A state abstracts to

* a count per role, capped at 2 ("none", "one", "more than one"), and
* a three-valued truth per (predicate of arity >= 2, tuple of roles): 0 when
  no instance holds, 1 when every combination of objects in those roles
  holds, 0.5 otherwise.

Both maps are stored sparsely: roles with count 0 and relations with value 0
are omitted, so two valuations are equal iff their sparse forms are.
"""

from __future__ import annotations

import math
import re
import weakref
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .ppddl.model import OBJECT
from .ppddl.parser import UnknownObject
from .ssp import GroundAction, GroundSSP, iter_bits

ZERO = 0.0
HALF = 0.5
ONE = 1.0

# carries the 0-ary predicates of a domain
PHANTOM = "*phantom*"

Role = tuple  # sorted tuple of unary predicate / type names


def make_role(names: Iterable[str]) -> Role:
    return tuple(sorted(set(names)))


def cap2(n: int) -> int:
    return min(2, n)


def format_role(role: Role) -> str:
    return "{" + ",".join(role) + "}"


def _fmt_value(v: float) -> str:
    return "0.5" if v == HALF else ("1" if v == ONE else "0")


@dataclass(frozen=True)
class AbstractState:
    """Sparse canonical valuation; see the module docstring."""

    role_counts: tuple[tuple[Role, int], ...]
    relation_values: tuple[tuple[tuple[str, tuple[Role, ...]], float], ...]

    def count(self, role: Iterable[str]) -> int:
        role = make_role(role)
        for r, n in self.role_counts:
            if r == role:
                return n
        return 0

    def relation(self, pred: str, roles: Iterable[Iterable[str]]) -> float:
        key = (pred, tuple(make_role(r) for r in roles))
        for k, v in self.relation_values:
            if k == key:
                return v
        return ZERO

    def dump(self) -> str:
        lines = [f"{format_role(r)}={n}" for r, n in self.role_counts]
        lines += [
            f"{pred}({','.join(format_role(r) for r in roles)})={_fmt_value(v)}"
            for (pred, roles), v in self.relation_values
        ]
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.dump().replace("\n", "; ")


_ROLE_RE = re.compile(r"\{([^{}]*)\}")
_ROLE_TOKEN = re.compile(r"\{[^{}]*\}")


def _parse_role(text: str) -> Role:
    m = _ROLE_RE.fullmatch(text)
    if m is None:
        raise ValueError(f"malformed role {text!r}")
    return make_role(x for x in m.group(1).split(",") if x)


def parse_abstract_state(text: str) -> AbstractState:
    """Inverse of :meth:`AbstractState.dump`."""
    counts = []
    rels = []
    for line in text.splitlines():
        if not line.strip():
            continue
        lhs, _, rhs = line.rpartition("=")
        if lhs.startswith("{"):
            counts.append((_parse_role(lhs), int(rhs)))
            continue
        m = re.fullmatch(r"([^(]+)\((.*)\)", lhs)
        if m is None:
            raise ValueError(f"malformed abstract state line {line!r}")
        roles = tuple(_parse_role(r) for r in _ROLE_TOKEN.findall(m.group(2)))
        rels.append(((m.group(1), roles), {"0": ZERO, "0.5": HALF, "1": ONE}[rhs]))
    return AbstractState(tuple(sorted(counts)), tuple(sorted(rels)))


@dataclass(frozen=True)
class AbstractAction:
    schema: str
    roles: tuple[Role, ...]

    def __str__(self) -> str:
        return f"{self.schema}({','.join(format_role(r) for r in self.roles)})"


def parse_abstract_action(text: str) -> AbstractAction:
    m = re.fullmatch(r"([^(]+)\((.*)\)", text)
    if m is None:
        raise ValueError(f"malformed abstract action {text!r}")
    return AbstractAction(m.group(1), tuple(_parse_role(r) for r in _ROLE_TOKEN.findall(m.group(2))))


class Abstractor:
    """Abstraction functions for one grounded problem, memoized per state."""

    def __init__(self, ssp: GroundSSP):
        self.ssp = ssp
        dom = ssp.domain
        self.objects = list(ssp.objects)
        base: dict[str, frozenset[str]] = {}
        for o in self.objects:
            t = ssp.object_types.get(o, OBJECT)
            names = set(dom.ancestors(t)) if dom is not None else set()
            if t != OBJECT:
                names.add(t)
            base[o] = frozenset(names)
        self.has_phantom = any(len(args) == 0 for _, args in ssp.facts)
        if self.has_phantom:
            self.objects.append(PHANTOM)
            base[PHANTOM] = frozenset()
        self.base_roles = base
        # per fact: (kind, pred, args) with kind 0 = nullary, 1 = unary, 2 = relational
        self.fact_kind = []
        for pred, args in ssp.facts:
            self.fact_kind.append((min(len(args), 2), pred, args))
        self._alpha: dict[int, AbstractState] = {}
        self._roles: dict[int, dict[str, Role]] = {}

    def roles(self, s: int) -> dict[str, Role]:
        got = self._roles.get(s)
        if got is not None:
            return got
        extra: dict[str, set[str]] = {}
        for i in iter_bits(s):
            kind, pred, args = self.fact_kind[i]
            if kind == 1:
                extra.setdefault(args[0], set()).add(pred)
            elif kind == 0:
                extra.setdefault(PHANTOM, set()).add(pred)
        got = {o: make_role(self.base_roles[o] | extra.get(o, set())) for o in self.objects}
        self._roles[s] = got
        return got

    def role_of(self, s: int, o: str) -> Role:
        if o not in self.base_roles:
            raise UnknownObject(f"unknown object {o!r}")
        return self.roles(s)[o]

    def phi_role(self, s: int, role: Iterable[str]) -> set[str]:
        role = make_role(role)
        return {o for o, r in self.roles(s).items() if r == role}

    def phi_relation(self, s: int, pred: str, roles: Iterable[Iterable[str]]) -> set[tuple[str, tuple[str, ...]]]:
        roles = tuple(make_role(r) for r in roles)
        rmap = self.roles(s)
        out = set()
        for i in iter_bits(s):
            kind, p, args = self.fact_kind[i]
            if p == pred and len(args) == len(roles) and all(rmap[a] == r for a, r in zip(args, roles)):
                out.add((p, args))
        return out

    def alpha(self, s: int) -> AbstractState:
        got = self._alpha.get(s)
        if got is not None:
            return got
        rmap = self.roles(s)
        extent = Counter(rmap.values())
        rel: Counter = Counter()
        for i in iter_bits(s):
            kind, pred, args = self.fact_kind[i]
            if kind == 2:
                rel[(pred, tuple(rmap[a] for a in args))] += 1
        values = []
        for key, n in rel.items():
            full = math.prod(extent[r] for r in key[1])
            values.append((key, ONE if n == full else HALF))
        got = AbstractState(
            tuple(sorted((r, cap2(n)) for r, n in extent.items())),
            tuple(sorted(values)),
        )
        self._alpha[s] = got
        return got

    def beta(self, s: int, a: GroundAction) -> AbstractAction:
        rmap = self.roles(s)
        return AbstractAction(a.schema, tuple(rmap[o] for o in a.args))


_ABSTRACTORS: "weakref.WeakKeyDictionary[GroundSSP, Abstractor]" = weakref.WeakKeyDictionary()


def abstractor_for(ssp) -> Abstractor:
    """Shared memoizing abstractor of a grounded problem."""
    ssp = ssp.ground
    got = _ABSTRACTORS.get(ssp)
    if got is None:
        got = Abstractor(ssp)
        _ABSTRACTORS[ssp] = got
    return got


def role_of(ssp, s: int, o: str) -> Role:
    return abstractor_for(ssp).role_of(s, o)


def phi_role(ssp, s: int, role) -> set[str]:
    return abstractor_for(ssp).phi_role(s, role)


def phi_relation(ssp, s: int, pred: str, roles) -> set:
    return abstractor_for(ssp).phi_relation(s, pred, roles)


def alpha(ssp, s: int) -> AbstractState:
    return abstractor_for(ssp).alpha(s)


def beta(ssp, s: int, a: GroundAction) -> AbstractAction:
    return abstractor_for(ssp).beta(s, a)
