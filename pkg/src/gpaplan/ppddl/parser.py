"""Parser for the supported PPDDL subset.

Supported: typed STRIPS, negative preconditions, equality, ``probabilistic``
effects (possibly nested inside ``and``), ``(increase (total-cost) n)`` cost
annotations and quantified goals.  Everything else is rejected by name.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .model import (
    OBJECT,
    ActionSchema,
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
    PredicateDef,
    ProbabilisticEffect,
    ProblemDef,
)
from .sexpr import PPDDLError, PPDDLSyntaxError, SList, Sym, read


class UnsupportedConstruct(PPDDLError):
    def __init__(self, construct: str, where: str = ""):
        super().__init__(f"unsupported PPDDL construct: {construct}{where}")
        self.construct = construct


class UnknownPredicate(PPDDLError):
    pass


class UnknownObject(PPDDLError):
    pass


class UnknownType(PPDDLError):
    pass


class ArityMismatch(PPDDLError):
    pass


class DuplicateName(PPDDLError):
    pass


class DomainMismatch(PPDDLError):
    pass


class InvalidProbability(PPDDLError):
    pass


_UNSUPPORTED_SECTIONS = {
    ":derived": "derived predicates",
    ":axiom": "axioms",
    ":durative-action": "durative actions",
    ":process": "processes",
    ":event": "events",
}
_UNSUPPORTED_EFFECTS = {
    "when": "conditional effects",
    "forall": "universal effects",
    "assign": "numeric fluents",
    "scale-up": "numeric fluents",
    "scale-down": "numeric fluents",
    "decrease": "numeric fluents",
}


def _loc(node) -> str:
    line = getattr(node, "line", 0)
    col = getattr(node, "col", 0)
    return f" (line {line}, column {col})" if line else ""


def _expect_list(node, what: str) -> SList:
    if not isinstance(node, SList):
        raise PPDDLSyntaxError(f"expected {what}", getattr(node, "line", 0), getattr(node, "col", 0))
    return node


def _name(node) -> str:
    if not isinstance(node, Sym):
        raise PPDDLSyntaxError("expected a name", getattr(node, "line", 0), getattr(node, "col", 0))
    return node.lower


def parse_typed_list(items) -> list[tuple[str, str]]:
    """``?a ?b - t ?c`` -> [(?a, t), (?b, t), (?c, object)]."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    items = list(items)
    i = 0
    while i < len(items):
        tok = items[i]
        if isinstance(tok, SList):
            if tok.head == "either":
                raise UnsupportedConstruct("either types", _loc(tok))
            raise PPDDLSyntaxError("unexpected list in typed list", tok.line, tok.col)
        if tok.text == "-":
            if i + 1 >= len(items):
                raise PPDDLSyntaxError("dangling '-' in typed list", tok.line, tok.col)
            t = items[i + 1]
            if isinstance(t, SList):
                raise UnsupportedConstruct("either types", _loc(t))
            out.extend((p, t.lower) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(tok.lower)
        i += 1
    out.extend((p, OBJECT) for p in pending)
    return out


def _section_map(root: SList, kind: str) -> tuple[str, dict[str, list]]:
    if root.head != "define" or len(root) < 2:
        raise PPDDLSyntaxError("expected (define ...)", root.line, root.col)
    header = _expect_list(root[1], f"({kind} name)")
    if header.head != kind or len(header) != 2:
        raise PPDDLSyntaxError(f"expected ({kind} name)", header.line, header.col)
    name = _name(header[1])
    sections: dict[str, list] = {}
    for sec in root.items[2:]:
        sec = _expect_list(sec, "a section")
        key = sec.head
        if key is None or not key.startswith(":"):
            raise PPDDLSyntaxError("expected a :section", sec.line, sec.col)
        if key in _UNSUPPORTED_SECTIONS:
            raise UnsupportedConstruct(_UNSUPPORTED_SECTIONS[key], _loc(sec))
        sections.setdefault(key, []).append(sec)
    return name, sections


class _Scope:
    def __init__(self, dom: DomainDef, variables: dict[str, str], constants: dict[str, str]):
        self.dom = dom
        self.variables = variables
        self.constants = constants
        self.arity = {p.name: p.arity for p in dom.predicates}

    def with_vars(self, params) -> "_Scope":
        v = dict(self.variables)
        v.update(params)
        return _Scope(self.dom, v, self.constants)

    def term(self, tok) -> str:
        if not isinstance(tok, Sym):
            raise PPDDLSyntaxError("expected a term", getattr(tok, "line", 0), getattr(tok, "col", 0))
        t = tok.lower
        if t.startswith("?"):
            if t not in self.variables:
                raise PPDDLSyntaxError(f"unbound variable {t}", tok.line, tok.col)
        elif t not in self.constants:
            raise UnknownObject(f"unknown object or constant {t!r}{_loc(tok)}")
        return t

    def atom(self, node: SList) -> Atom:
        pred = node.head
        if pred is None:
            raise PPDDLSyntaxError("expected a predicate name", node.line, node.col)
        if pred not in self.arity:
            raise UnknownPredicate(f"unknown predicate {pred!r}{_loc(node)}")
        args = tuple(self.term(t) for t in node.items[1:])
        if len(args) != self.arity[pred]:
            raise ArityMismatch(
                f"predicate {pred!r} expects {self.arity[pred]} arguments, got {len(args)}{_loc(node)}"
            )
        return Atom(pred, args)

    def formula(self, node) -> Formula:
        node = _expect_list(node, "a formula")
        head = node.head
        if head is None and not node.items:
            return And(())
        if head == "and":
            return And(tuple(self.formula(x) for x in node.items[1:]))
        if head == "or":
            return Or(tuple(self.formula(x) for x in node.items[1:]))
        if head == "not":
            if len(node) != 2:
                raise PPDDLSyntaxError("(not f) takes one argument", node.line, node.col)
            return Not(self.formula(node[1]))
        if head == "imply":
            if len(node) != 3:
                raise PPDDLSyntaxError("(imply a b) takes two arguments", node.line, node.col)
            return Imply(self.formula(node[1]), self.formula(node[2]))
        if head in ("forall", "exists"):
            if len(node) != 3:
                raise PPDDLSyntaxError(f"({head} (vars) f) malformed", node.line, node.col)
            params = tuple(parse_typed_list(_expect_list(node[1], "a variable list")))
            for _, t in params:
                _check_type(self.dom, t, node)
            body = self.with_vars(params).formula(node[2])
            return (Forall if head == "forall" else Exists)(params, body)
        if head == "=":
            if len(node) != 3:
                raise PPDDLSyntaxError("(= a b) takes two arguments", node.line, node.col)
            if isinstance(node[1], SList) or isinstance(node[2], SList):
                raise UnsupportedConstruct("numeric fluents", _loc(node))
            return Eq(self.term(node[1]), self.term(node[2]))
        if head in (">", "<", ">=", "<="):
            raise UnsupportedConstruct("numeric fluents", _loc(node))
        if head == "when":
            raise UnsupportedConstruct("conditional effects", _loc(node))
        return self.atom(node)


def _check_type(dom: DomainDef, t: str, node) -> None:
    if t != OBJECT and t not in dom.types:
        raise UnknownType(f"undeclared type {t!r}{_loc(node)}")


def _parse_prob(tok) -> Fraction:
    if not isinstance(tok, Sym):
        raise PPDDLSyntaxError("expected a probability", getattr(tok, "line", 0), getattr(tok, "col", 0))
    try:
        p = Fraction(tok.text)
    except (ValueError, ZeroDivisionError):
        raise InvalidProbability(f"bad probability {tok.text!r}{_loc(tok)}") from None
    if p < 0 or p > 1:
        raise InvalidProbability(f"probability {tok.text} outside [0, 1]{_loc(tok)}")
    return p


def _combine(a: Outcome, b: Outcome) -> Outcome:
    return Outcome(a.prob * b.prob, a.add | b.add, a.dels | b.dels)


def _flatten_effect(scope: _Scope, node, cost: list) -> list[Outcome]:
    node = _expect_list(node, "an effect")
    head = node.head
    if head is None and not node.items:
        return [Outcome(Fraction(1))]
    if head == "and":
        outs = [Outcome(Fraction(1))]
        for sub in node.items[1:]:
            part = _flatten_effect(scope, sub, cost)
            outs = [_combine(a, b) for a, b in product(outs, part)]
        return outs
    if head == "not":
        if len(node) != 2:
            raise PPDDLSyntaxError("(not atom) takes one argument", node.line, node.col)
        inner = _expect_list(node[1], "an atom")
        if inner.head in _UNSUPPORTED_EFFECTS or inner.head in ("and", "probabilistic"):
            raise PPDDLSyntaxError("negation of a compound effect", inner.line, inner.col)
        return [Outcome(Fraction(1), frozenset(), frozenset({scope.atom(inner)}))]
    if head == "probabilistic":
        rest = node.items[1:]
        if len(rest) % 2:
            raise PPDDLSyntaxError("probabilistic expects probability/effect pairs", node.line, node.col)
        outs: list[Outcome] = []
        total = Fraction(0)
        for i in range(0, len(rest), 2):
            p = _parse_prob(rest[i])
            total += p
            if p == 0:
                continue
            for o in _flatten_effect(scope, rest[i + 1], cost):
                outs.append(Outcome(p * o.prob, o.add, o.dels))
        if total > 1:
            raise InvalidProbability(f"outcome probabilities sum to {total} > 1{_loc(node)}")
        if total < 1:
            outs.append(Outcome(1 - total))
        return outs
    if head == "increase":
        target = node[1] if len(node) == 3 else None
        if not (isinstance(target, SList) and target.head == "total-cost" and len(target) == 1):
            raise UnsupportedConstruct("numeric fluents", _loc(node))
        amount = node[2]
        if not isinstance(amount, Sym):
            raise UnsupportedConstruct("fluent-valued action costs", _loc(node))
        try:
            c = Fraction(amount.text)
        except ValueError:
            raise PPDDLSyntaxError("bad action cost", amount.line, amount.col) from None
        if c < 0:
            raise PPDDLSyntaxError("negative action cost", amount.line, amount.col)
        cost.append(c)
        return [Outcome(Fraction(1))]
    if head in _UNSUPPORTED_EFFECTS:
        raise UnsupportedConstruct(_UNSUPPORTED_EFFECTS[head], _loc(node))
    return [Outcome(Fraction(1), frozenset({scope.atom(node)}), frozenset())]


def _normalize(outs: list[Outcome]) -> tuple[Outcome, ...]:
    # delete-then-add semantics: an atom both added and deleted ends up true
    return tuple(Outcome(o.prob, o.add, o.dels - o.add) for o in outs)


def _parse_action(dom: DomainDef, sec: SList, constants: dict[str, str]) -> ActionSchema:
    if len(sec) < 2:
        raise PPDDLSyntaxError("action needs a name", sec.line, sec.col)
    name = _name(sec[1])
    fields: dict[str, object] = {}
    items = sec.items[2:]
    if len(items) % 2:
        raise PPDDLSyntaxError(f"malformed action {name!r}", sec.line, sec.col)
    for i in range(0, len(items), 2):
        key = items[i]
        if not isinstance(key, Sym) or not key.text.startswith(":"):
            raise PPDDLSyntaxError("expected an action keyword", getattr(key, "line", 0), getattr(key, "col", 0))
        if key.lower not in (":parameters", ":precondition", ":effect"):
            raise UnsupportedConstruct(f"action field {key.lower}", _loc(key))
        fields[key.lower] = items[i + 1]
    params = tuple(parse_typed_list(_expect_list(fields.get(":parameters", SList()), "a parameter list")))
    seen = set()
    for v, t in params:
        if not v.startswith("?"):
            raise PPDDLSyntaxError(f"parameter {v!r} of {name!r} is not a variable", sec.line, sec.col)
        if v in seen:
            raise DuplicateName(f"parameter {v} repeated in action {name!r}")
        seen.add(v)
        _check_type(dom, t, sec)
    scope = _Scope(dom, dict(params), constants)
    pre_node = fields.get(":precondition")
    pre = scope.formula(pre_node) if pre_node is not None else And(())
    cost: list[Fraction] = []
    eff_node = fields.get(":effect")
    outs = _flatten_effect(scope, eff_node, cost) if eff_node is not None else [Outcome(Fraction(1))]
    if len(cost) > 1:
        raise UnsupportedConstruct("multiple cost increments", _loc(sec))
    return ActionSchema(name, params, pre, ProbabilisticEffect(_normalize(outs)), cost[0] if cost else None)


def parse_domain(text: str) -> DomainDef:
    root = read(text)
    name, sections = _section_map(root, "domain")
    dom = DomainDef(name)
    for sec in sections.get(":requirements", []):
        dom.requirements += tuple(_name(x) for x in sec.items[1:])
    for sec in sections.get(":types", []):
        for t, parent in parse_typed_list(sec.items[1:]):
            if t == OBJECT:
                continue
            if t in dom.types and dom.types[t] != parent:
                raise DuplicateName(f"type {t!r} declared twice{_loc(sec)}")
            dom.types[t] = parent
    for t, parent in list(dom.types.items()):
        if parent != OBJECT and parent not in dom.types:
            # implicitly declared parent types hang off the root
            dom.types[parent] = OBJECT
    for t in dom.types:
        cur, steps = dom.types[t], 0
        while cur != OBJECT:
            if cur == t or steps > len(dom.types):
                raise PPDDLSyntaxError(f"cyclic type hierarchy at {t!r}", root.line, root.col)
            cur, steps = dom.types.get(cur, OBJECT), steps + 1
    for sec in sections.get(":constants", []):
        for c, t in parse_typed_list(sec.items[1:]):
            _check_type(dom, t, sec)
            dom.constants.append((c, t))
    pred_names: set[str] = set()
    for sec in sections.get(":predicates", []):
        for p in sec.items[1:]:
            p = _expect_list(p, "a predicate declaration")
            pname = p.head
            if pname is None:
                raise PPDDLSyntaxError("expected a predicate name", p.line, p.col)
            if pname in pred_names:
                raise DuplicateName(f"predicate {pname!r} declared twice{_loc(p)}")
            if pname in dom.types:
                raise DuplicateName(f"predicate {pname!r} clashes with a type name{_loc(p)}")
            params = tuple(parse_typed_list(p.items[1:]))
            for _, t in params:
                _check_type(dom, t, p)
            pred_names.add(pname)
            dom.predicates.append(PredicateDef(pname, params))
    for sec in sections.get(":functions", []):
        for f in sec.items[1:]:
            if isinstance(f, SList) and f.head == "total-cost" and len(f) == 1:
                continue
            if isinstance(f, Sym) and f.text in ("-", "number"):
                continue
            raise UnsupportedConstruct("numeric fluents", _loc(f))
    for sec in sections.get(":rewards", []):
        raise UnsupportedConstruct("reward fluents", _loc(sec))
    constants = dict(dom.constants)
    for sec in sections.get(":action", []):
        schema = _parse_action(dom, sec, constants)
        if any(a.name == schema.name for a in dom.action_schemas):
            raise DuplicateName(f"action {schema.name!r} declared twice{_loc(sec)}")
        dom.action_schemas.append(schema)
    unknown = set(sections) - {":requirements", ":types", ":constants", ":predicates", ":functions", ":action"}
    if unknown:
        raise UnsupportedConstruct(f"domain section {sorted(unknown)[0]}")
    return dom


def parse_problem(text: str, dom: DomainDef) -> ProblemDef:
    root = read(text)
    name, sections = _section_map(root, "problem")
    dom_sec = sections.get(":domain")
    if not dom_sec or len(dom_sec[0]) != 2:
        raise PPDDLSyntaxError("problem is missing (:domain name)", root.line, root.col)
    dname = _name(dom_sec[0][1])
    if dname != dom.name:
        raise DomainMismatch(f"problem is for domain {dname!r}, not {dom.name!r}")
    objects: list[tuple[str, str]] = []
    names = {c for c, _ in dom.constants}
    for sec in sections.get(":objects", []):
        for o, t in parse_typed_list(sec.items[1:]):
            _check_type(dom, t, sec)
            if o in names:
                raise DuplicateName(f"object {o!r} declared twice{_loc(sec)}")
            names.add(o)
            objects.append((o, t))
    constants = dict(dom.constants)
    constants.update(objects)
    scope = _Scope(dom, {}, constants)
    init: set[Atom] = set()
    for sec in sections.get(":init", []):
        for a in sec.items[1:]:
            a = _expect_list(a, "an init atom")
            if a.head == "=":
                # (= (total-cost) 0) and friends
                continue
            if a.head == "not":
                continue
            init.add(scope.atom(a))
    goal_sec = sections.get(":goal")
    if not goal_sec or len(goal_sec[0]) != 2:
        raise PPDDLSyntaxError("problem is missing (:goal f)", root.line, root.col)
    goal = scope.formula(goal_sec[0][1])
    metric = None
    for sec in sections.get(":metric", []):
        metric = " ".join(_render(x) for x in sec.items[1:])
    for key in sections:
        if key == ":goal-reward":
            raise UnsupportedConstruct("reward fluents")
        if key not in (":domain", ":objects", ":init", ":goal", ":metric", ":requirements"):
            raise UnsupportedConstruct(f"problem section {key}")
    return ProblemDef(name, dname, objects, frozenset(init), goal, metric)


def _render(node) -> str:
    if isinstance(node, SList):
        return "(" + " ".join(_render(x) for x in node.items) + ")"
    return node.text

