"""Generalized Policy Automata.

A GPA is a directed hypergraph over abstract states.  Each hyperedge is keyed
by (source abstract state, abstract action) and points to the set of
abstract states that action was observed to reach.  Learning abstracts the
transitions of solved policies and unions destinations per key, so storage
is already in merged form.

A GPA constrains a ground problem by making every transition whose
abstraction is not covered by a hyperedge infinitely expensive.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

from .abstraction import (
    AbstractAction,
    AbstractState,
    abstractor_for,
    format_role,
    parse_abstract_action,
    parse_abstract_state,
)
from .solvers import SolveResult, SolverConfig, SolverStats, get_solver
from .ssp import INFINITE, PolicyIncomplete, is_partial_proper, policy_reachable

GPA_FORMAT = "gpa-plan/gpa"
GPA_VERSION = 1


class VocabularyMismatch(ValueError):
    pass


class MalformedGpa(ValueError):
    pass


def vocabulary_hash(domain) -> str:
    """Digest of the names and arities a GPA's abstractions are built from."""
    parts = [f"domain {domain.name}"]
    parts += sorted(f"type {t}" for t in domain.types)
    parts += sorted(f"pred {p.name}/{p.arity}" for p in domain.predicates)
    parts += sorted(f"action {a.name}/{len(a.params)}" for a in domain.action_schemas)
    return hashlib.blake2b("\n".join(parts).encode(), digest_size=12).hexdigest()


class Gpa:
    def __init__(self, vocabulary: str | None = None):
        self.vocabulary = vocabulary
        self.vertices: set[AbstractState] = set()
        self.edges: dict[tuple[AbstractState, AbstractAction], frozenset[AbstractState]] = {}

    def add_edge(self, src: AbstractState, act: AbstractAction, dests: Iterable[AbstractState]) -> None:
        dests = frozenset(dests)
        if not dests:
            raise ValueError("a hyperedge needs at least one destination")
        self.vertices.add(src)
        self.vertices.update(dests)
        key = (src, act)
        self.edges[key] = self.edges.get(key, frozenset()) | dests

    def is_consistent(self, src: AbstractState, act: AbstractAction, dst: AbstractState) -> bool:
        dests = self.edges.get((src, act))
        return dests is not None and dst in dests

    def copy(self) -> "Gpa":
        g = Gpa(self.vocabulary)
        g.vertices = set(self.vertices)
        g.edges = dict(self.edges)
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, Gpa):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __len__(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return f"<Gpa {len(self.vertices)} vertices, {len(self.edges)} hyperedges>"


@dataclass
class Transitions:
    """Positive-probability (s, pi(s), s') triples of one policy."""

    ssp: object
    triples: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.triples)


def policy_to_transitions(ssp, pi, s0=None) -> Transitions:
    ssp = ssp.ground
    s0 = ssp.init if s0 is None else s0
    states, complete = policy_reachable(ssp, pi, s0)
    if not complete:
        raise PolicyIncomplete("the policy leaves some reachable non-goal state unmapped")
    triples = []
    for s in states:
        if ssp.is_goal(s):
            continue
        a = pi[s]
        for t, p, _ in ssp.successors(s, a):
            if p > 0:
                triples.append((s, a, t))
    return Transitions(ssp, triples)


def _as_list(training) -> list[Transitions]:
    if isinstance(training, Transitions):
        return [training]
    return list(training)


def _absorb(gpa: Gpa, training: list[Transitions]) -> None:
    for tr in training:
        vocab = vocabulary_hash(tr.ssp.domain)
        if gpa.vocabulary is None:
            gpa.vocabulary = vocab
        elif gpa.vocabulary != vocab:
            raise VocabularyMismatch("training data comes from a different domain than the GPA")
        ab = abstractor_for(tr.ssp)
        for s, a, t in tr.triples:
            gpa.add_edge(ab.alpha(s), ab.beta(s, a), (ab.alpha(t),))


def learn_gpa(training) -> Gpa:
    gpa = Gpa()
    _absorb(gpa, _as_list(training))
    return gpa


def merge_into(gpa: Gpa, training) -> Gpa:
    """New GPA equal to learning from everything ``gpa`` saw plus ``training``."""
    out = gpa.copy()
    _absorb(out, _as_list(training))
    return out


def merge_gpas(a: Gpa, b: Gpa) -> Gpa:
    if a.vocabulary and b.vocabulary and a.vocabulary != b.vocabulary:
        raise VocabularyMismatch("cannot merge GPAs of different domains")
    out = a.copy()
    out.vocabulary = a.vocabulary or b.vocabulary
    for (src, act), dests in b.edges.items():
        out.add_edge(src, act, dests)
    out.vertices |= b.vertices
    return out


def is_consistent(gpa: Gpa, src: AbstractState, act: AbstractAction, dst: AbstractState) -> bool:
    return gpa.is_consistent(src, act, dst)


class ConstrainedSSP:
    """A ground problem whose GPA-inconsistent transitions cost INFINITE.

    Probabilities are untouched; costs are decided lazily per (s, a).
    """

    def __init__(self, base, gpa: Gpa):
        self.base = base.ground
        self.gpa = gpa
        self.abstractor = abstractor_for(self.base)
        self._succ: dict = {}

    @property
    def ground(self):
        return self.base

    @property
    def init(self):
        return self.base.init

    def is_goal(self, s) -> bool:
        return self.base.is_goal(s)

    def applicable_actions(self, s):
        return self.base.applicable_actions(s)

    def consistent(self, s, a, t) -> bool:
        ab = self.abstractor
        return self.gpa.is_consistent(ab.alpha(s), ab.beta(s, a), ab.alpha(t))

    def successors(self, s, a):
        key = (s, a.id)
        out = self._succ.get(key)
        if out is None:
            out = self.base.successors(s, a)
            if not self.base.is_goal(s):
                out = [(t, p, c if self.consistent(s, a, t) else INFINITE) for t, p, c in out]
            self._succ[key] = out
        return out


def constrain(ssp, gpa: Gpa) -> ConstrainedSSP:
    return ConstrainedSSP(ssp, gpa)


def policy_is_consistent(model: ConstrainedSSP, pi, s0=None) -> bool:
    """True iff every transition the policy can take has finite constrained cost."""
    s0 = model.init if s0 is None else s0
    states, complete = policy_reachable(model, pi, s0)
    if not complete:
        return False
    for s in states:
        if model.is_goal(s):
            continue
        if any(math.isinf(c) for _, _, c in model.successors(s, pi[s])):
            return False
    return True


def solve_with_gpa(ssp, gpa: Gpa, solver_id: str = "lrtdp", cfg: SolverConfig | None = None,
                   fallback_id: str | None = None, heuristic=None) -> SolveResult:
    """Solve the GPA-constrained problem; if its policy is not partial proper,
    re-solve the original problem seeded with the constrained values.

    Only finite constrained values are passed on; states the constrained
    problem found hopeless start again from the heuristic, since being a dead
    end under the GPA says nothing about the original problem.
    """
    cfg = cfg or SolverConfig()
    base = ssp.ground
    s0 = base.init
    model = constrain(base, gpa)
    first = get_solver(solver_id)(model, cfg, heuristic=heuristic)
    value = first.value
    proper = not math.isinf(value) and is_partial_proper(base, first.policy, s0) \
        and policy_is_consistent(model, first.policy, s0)
    phases = [("constrained", first.stats)]
    if proper:
        first.phases = phases
        return first
    initial = {s: v for s, v in first.value_table.values.items() if not math.isinf(v)}
    second = get_solver(fallback_id or solver_id)(base, cfg, initial=initial, heuristic=heuristic)
    phases.append(("bootstrapped", second.stats))
    second.stats = SolverStats(
        backups=first.stats.backups + second.stats.backups,
        states_expanded=first.stats.states_expanded + second.stats.states_expanded,
        wall_time=first.stats.wall_time + second.stats.wall_time,
        converged=second.stats.converged,
        trials=first.stats.trials + second.stats.trials,
    )
    second.phases = phases
    return second


# -- serialization -----------------------------------------------------------


def gpa_to_dict(gpa: Gpa) -> dict:
    states = sorted(gpa.vertices, key=lambda v: v.dump())
    ids = {v: i for i, v in enumerate(states)}
    roles = set()
    for v in states:
        roles.update(r for r, _ in v.role_counts)
    for _, act in gpa.edges:
        roles.update(act.roles)
    edges = sorted(
        [ids[src], str(act), sorted(ids[d] for d in dests)]
        for (src, act), dests in gpa.edges.items()
    )
    return {
        "format": GPA_FORMAT,
        "version": GPA_VERSION,
        "vocabulary": gpa.vocabulary,
        "roles": sorted(format_role(r) for r in roles),
        "states": [v.dump() for v in states],
        "edges": edges,
    }


def gpa_from_dict(data: dict, domain=None) -> Gpa:
    if not isinstance(data, dict) or data.get("format") != GPA_FORMAT:
        raise MalformedGpa("not a GPA file")
    if data.get("version") != GPA_VERSION:
        raise MalformedGpa(f"unsupported GPA version {data.get('version')!r}")
    vocab = data.get("vocabulary")
    if domain is not None and vocab is not None and vocab != vocabulary_hash(domain):
        raise VocabularyMismatch(f"GPA was learned for a different domain than {domain.name!r}")
    try:
        states = [parse_abstract_state(t) for t in data["states"]]
        gpa = Gpa(vocab)
        gpa.vertices.update(states)
        for src, act, dests in data["edges"]:
            gpa.add_edge(states[src], parse_abstract_action(act), [states[d] for d in dests])
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise MalformedGpa(f"corrupt GPA file: {exc}") from exc
    return gpa


def save_gpa(gpa: Gpa, sink: IO[str] | str) -> None:
    text = json.dumps(gpa_to_dict(gpa), indent=1, sort_keys=True) + "\n"
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sink.write(text)


def load_gpa(source: IO[str] | str, domain=None) -> Gpa:
    try:
        if isinstance(source, str):
            with open(source, encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            data = json.load(source)
    except json.JSONDecodeError as exc:
        raise MalformedGpa(f"GPA file is not JSON: {exc}") from exc
    return gpa_from_dict(data, domain)
