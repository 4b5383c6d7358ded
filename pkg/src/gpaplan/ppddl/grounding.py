"""Instantiate a parsed domain/problem pair into a :class:`GroundSSP`."""

from __future__ import annotations

from itertools import product

from ..ssp import GroundAction, GroundGoal, GroundOutcome, GroundSSP
from .model import OBJECT, And, Atom, DomainDef, Eq, Exists, Forall, Imply, Not, Or, ProblemDef
from .parser import UnsupportedConstruct
from .sexpr import PPDDLError

DEFAULT_MAX_FACTS = 200_000
DEFAULT_MAX_ACTIONS = 500_000


class GroundingLimitExceeded(PPDDLError):
    pass


class GroundingError(PPDDLError):
    pass


def _and(parts):
    out = []
    for p in parts:
        if p is True:
            continue
        if p is False:
            return False
        if p[0] == "and":
            out.extend(p[1])
        else:
            out.append(p)
    if not out:
        return True
    return out[0] if len(out) == 1 else ("and", tuple(out))


def _or(parts):
    out = []
    for p in parts:
        if p is False:
            continue
        if p is True:
            return True
        if p[0] == "or":
            out.extend(p[1])
        else:
            out.append(p)
    if not out:
        return False
    return out[0] if len(out) == 1 else ("or", tuple(out))


def _not(p):
    if p is True:
        return False
    if p is False:
        return True
    if p[0] == "not":
        return p[1]
    return ("not", p)


class _Grounder:
    def __init__(self, dom: DomainDef, prob: ProblemDef, max_facts: int, max_actions: int):
        self.dom = dom
        self.prob = prob
        objs = list(dom.constants) + list(prob.objects)
        self.objects = tuple(o for o, _ in objs)
        self.object_types = dict(objs)
        self.max_facts = max_facts
        self.max_actions = max_actions
        self._of_type: dict[str, tuple[str, ...]] = {}
        changing = set()
        for a in dom.action_schemas:
            for o in a.effect.outcomes:
                changing.update(x.pred for x in o.add | o.dels)
        self.static_preds = frozenset(p.name for p in dom.predicates if p.name not in changing)
        self.init_keys = {(a.pred, a.args) for a in prob.init}

    def of_type(self, t: str) -> tuple[str, ...]:
        got = self._of_type.get(t)
        if got is None:
            got = tuple(o for o in self.objects if self.dom.is_subtype(self.object_types[o], t))
            self._of_type[t] = got
        return got

    def build_facts(self):
        facts = []
        for p in self.dom.predicates:
            domains = [self.of_type(t) for _, t in p.params]
            for args in product(*domains):
                facts.append((p.name, args))
                if len(facts) > self.max_facts:
                    raise GroundingLimitExceeded(f"fact universe exceeds {self.max_facts}")
        self.facts = tuple(facts)
        self.fact_ids = {f: i for i, f in enumerate(facts)}

    def fact(self, atom: Atom, sub: dict[str, str]) -> int:
        key = (atom.pred, tuple(sub.get(x, x) for x in atom.args))
        fid = self.fact_ids.get(key)
        if fid is None:
            raise GroundingError(f"atom ({' '.join((key[0],) + key[1])}) violates the typing of {atom.pred!r}")
        return fid

    def formula(self, f, sub: dict[str, str], fold_static: bool):
        if isinstance(f, Atom):
            key = (f.pred, tuple(sub.get(x, x) for x in f.args))
            if fold_static and f.pred in self.static_preds:
                return key in self.init_keys
            fid = self.fact_ids.get(key)
            if fid is None:
                # type-inconsistent instantiation of a typed predicate can never hold
                return False
            return ("fact", fid)
        if isinstance(f, Eq):
            return sub.get(f.left, f.left) == sub.get(f.right, f.right)
        if isinstance(f, Not):
            return _not(self.formula(f.arg, sub, fold_static))
        if isinstance(f, And):
            return _and(self.formula(x, sub, fold_static) for x in f.args)
        if isinstance(f, Or):
            return _or(self.formula(x, sub, fold_static) for x in f.args)
        if isinstance(f, Imply):
            return _or([_not(self.formula(f.cond, sub, fold_static)), self.formula(f.then, sub, fold_static)])
        if isinstance(f, (Forall, Exists)):
            names = [v for v, _ in f.params]
            domains = [self.of_type(t) for _, t in f.params]
            parts = []
            for combo in product(*domains):
                inner = dict(sub)
                inner.update(zip(names, combo))
                parts.append(self.formula(f.body, inner, fold_static))
            return _and(parts) if isinstance(f, Forall) else _or(parts)
        raise TypeError(f)

    def build_actions(self):
        actions = []
        total = 0
        for schema in self.dom.action_schemas:
            n = 1
            for _, t in schema.params:
                n *= len(self.of_type(t))
            total += n
        if total > self.max_actions:
            raise GroundingLimitExceeded(f"{total} ground actions exceed the limit of {self.max_actions}")
        for schema in self.dom.action_schemas:
            names = [v for v, _ in schema.params]
            domains = [self.of_type(t) for _, t in schema.params]
            cost = float(schema.cost) if schema.cost is not None else 1.0
            for combo in product(*domains):
                sub = dict(zip(names, combo))
                actions.append(self._ground_action(len(actions), schema, combo, sub, cost))
        self.actions = tuple(actions)

    def _ground_action(self, aid, schema, combo, sub, cost) -> GroundAction:
        node = self.formula(schema.precondition, sub, fold_static=False)
        pos = neg = 0
        possible = True
        if node is False:
            possible = False
        elif node is not True:
            lits = node[1] if node[0] == "and" else (node,)
            for lit in lits:
                if lit[0] == "fact":
                    pos |= 1 << lit[1]
                elif lit[0] == "not" and lit[1][0] == "fact":
                    neg |= 1 << lit[1][1]
                else:
                    raise UnsupportedConstruct("disjunctive or quantified preconditions", f" in action {schema.name!r}")
        if possible:
            for i in _bits(pos):
                pred, args = self.facts[i]
                if pred in self.static_preds and (pred, args) not in self.init_keys:
                    possible = False
                    break
            for i in _bits(neg):
                pred, args = self.facts[i]
                if pred in self.static_preds and (pred, args) in self.init_keys:
                    possible = False
                    break
        outcomes = []
        for o in schema.effect.outcomes:
            add = dels = 0
            if possible:
                for a in o.add:
                    add |= 1 << self.fact(a, sub)
                for a in o.dels:
                    dels |= 1 << self.fact(a, sub)
            outcomes.append(GroundOutcome(o.prob, add, dels & ~add))
        return GroundAction(aid, schema.name, tuple(combo), pos, neg, tuple(outcomes), cost, possible)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def ground(
    dom: DomainDef,
    prob: ProblemDef,
    max_facts: int = DEFAULT_MAX_FACTS,
    max_actions: int = DEFAULT_MAX_ACTIONS,
) -> GroundSSP:
    if prob.domain_name != dom.name:
        raise GroundingError(f"problem targets domain {prob.domain_name!r}, not {dom.name!r}")
    g = _Grounder(dom, prob, max_facts, max_actions)
    g.build_facts()
    init = 0
    for a in sorted(prob.init, key=str):
        init |= 1 << g.fact(a, {})
    g.build_actions()
    goal = GroundGoal(g.formula(prob.goal, {}, fold_static=True))
    return GroundSSP(
        name=prob.name,
        domain=dom,
        problem=prob,
        objects=g.objects,
        object_types=g.object_types,
        facts=g.facts,
        actions=g.actions,
        init=init,
        goal=goal,
        fact_ids=g.fact_ids,
        static_preds=g.static_preds,
    )


__all__ = ["ground", "GroundingLimitExceeded", "GroundingError", "OBJECT"]
