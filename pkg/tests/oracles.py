"""Independent reference implementations used to check the package.

Everything here works on the lifted DomainDef/ProblemDef directly: states
are frozensets of Atom, actions are (schema, binding) pairs evaluated by
substitution.  None of it touches the grounder, the bitset model, or the
solver code paths.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from fractions import Fraction

from gpaplan.ppddl.model import OBJECT, And, Atom, Eq, Exists, Forall, Imply, Not, Or

INF = math.inf


def objects_of(dom, prob, t):
    out = []
    for name, typ in list(dom.constants) + list(prob.objects):
        if t == OBJECT or dom.is_subtype(typ, t):
            out.append(name)
    return sorted(set(out))


def _sub(args, binding):
    return tuple(binding.get(a, a) for a in args)


def holds(f, state, binding, dom, prob):
    if isinstance(f, Atom):
        return Atom(f.pred, _sub(f.args, binding)) in state or _type_atom(f, binding, dom, prob)
    if isinstance(f, Eq):
        return binding.get(f.left, f.left) == binding.get(f.right, f.right)
    if isinstance(f, Not):
        return not holds(f.arg, state, binding, dom, prob)
    if isinstance(f, And):
        return all(holds(x, state, binding, dom, prob) for x in f.args)
    if isinstance(f, Or):
        return any(holds(x, state, binding, dom, prob) for x in f.args)
    if isinstance(f, Imply):
        return not holds(f.cond, state, binding, dom, prob) or holds(f.then, state, binding, dom, prob)
    if isinstance(f, (Forall, Exists)):
        names = [v for v, _ in f.params]
        pools = [objects_of(dom, prob, t) for _, t in f.params]
        test = all if isinstance(f, Forall) else any
        return test(
            holds(f.body, state, {**binding, **dict(zip(names, combo))}, dom, prob)
            for combo in itertools.product(*pools)
        )
    raise TypeError(f)


def _type_atom(f, binding, dom, prob):
    # typed domains may use a type name as a unary predicate
    if len(f.args) != 1 or f.pred not in dom.types:
        return False
    o = binding.get(f.args[0], f.args[0])
    return o in objects_of(dom, prob, f.pred)


class LiftedModel:
    """Reference SSP built from the lifted definitions."""

    def __init__(self, dom, prob):
        self.dom = dom
        self.prob = prob
        self.init = frozenset(prob.init)
        self.actions = []
        for schema in dom.action_schemas:
            pools = [objects_of(dom, prob, t) for _, t in schema.params]
            names = [v for v, _ in schema.params]
            for combo in itertools.product(*pools):
                self.actions.append((schema, dict(zip(names, combo))))

    def is_goal(self, s):
        return holds(self.prob.goal, s, {}, self.dom, self.prob)

    def applicable(self, s):
        return [(sc, b) for sc, b in self.actions if holds(sc.precondition, s, b, self.dom, self.prob)]

    def successors(self, s, act):
        schema, b = act
        if self.is_goal(s):
            return [(s, Fraction(1), 0.0)]
        cost = float(schema.cost) if schema.cost is not None else 1.0
        merged = {}
        for o in schema.effect.outcomes:
            dels = {Atom(a.pred, _sub(a.args, b)) for a in o.dels}
            adds = {Atom(a.pred, _sub(a.args, b)) for a in o.add}
            t = frozenset((s - dels) | adds)
            merged[t] = merged.get(t, Fraction(0)) + o.prob
        return [(t, p, cost) for t, p in merged.items()]


def action_name(act):
    schema, b = act
    return f"{schema.name}({','.join(b[v] for v, _ in schema.params)})"


def count_ground_actions(dom, prob):
    """Type-consistent instantiation count, by explicit enumeration."""
    n = 0
    for schema in dom.action_schemas:
        pools = [objects_of(dom, prob, t) for _, t in schema.params]
        n += sum(1 for _ in itertools.product(*pools))
    return n


def enumerate_states(model, limit=200_000):
    seen = {model.init}
    queue = deque([model.init])
    while queue:
        s = queue.popleft()
        if model.is_goal(s):
            continue
        for a in model.applicable(s):
            for t, _, _ in model.successors(s, a):
                if t not in seen:
                    if len(seen) >= limit:
                        raise RuntimeError("state space too large for the oracle")
                    seen.add(t)
                    queue.append(t)
    return seen


def prob1_states(model, states):
    """States from which some policy reaches the goal with probability 1.

    Greatest fixpoint: keep R, drop actions that can leave R, then keep only
    the states that can still reach the goal through the remaining actions.
    """
    R = set(states)
    while True:
        good = {}
        for s in R:
            if model.is_goal(s):
                continue
            good[s] = [a for a in model.applicable(s) if all(t in R for t, _, _ in model.successors(s, a))]
        reach = {s for s in R if model.is_goal(s)}
        changed = True
        while changed:
            changed = False
            for s, acts in good.items():
                if s in reach:
                    continue
                if any(any(t in reach for t, _, _ in model.successors(s, a)) for a in acts):
                    reach.add(s)
                    changed = True
        if reach == R:
            return R
        R = reach


def brute_vi(model, tol=1e-12, max_sweeps=1_000_000):
    """Synchronous full-sweep VI over every reachable state; returns V."""
    states = enumerate_states(model)
    ok = prob1_states(model, states)
    V = {s: (0.0 if s in ok else INF) for s in states}
    live = [s for s in ok if not model.is_goal(s)]
    acts = {
        s: [model.successors(s, a) for a in model.applicable(s)
            if all(t in ok for t, _, _ in model.successors(s, a))]
        for s in live
    }
    for _ in range(max_sweeps):
        new = dict(V)
        delta = 0.0
        for s in live:
            best = min(sum(float(p) * (c + V[t]) for t, p, c in succ) for succ in acts[s])
            delta = max(delta, abs(best - V[s]))
            new[s] = best
        V = new
        if delta < tol:
            return V
    raise RuntimeError("oracle VI did not converge")


def lifted_state(ssp, s):
    """Package bitset state -> oracle frozenset of atoms."""
    out = set()
    i = 0
    while s:
        if s & 1:
            pred, args = ssp.facts[i]
            out.add(Atom(pred, tuple(args)))
        s >>= 1
        i += 1
    return frozenset(out)


def brute_is_proper(model, policy, s0):
    """Probability-1 goal reachability of a fixed policy (dict state -> action name)."""
    by_name = {action_name(a): a for a in model.actions}
    reach = {s0}
    queue = deque([s0])
    edges = {}
    while queue:
        s = queue.popleft()
        if model.is_goal(s):
            continue
        name = policy.get(s)
        if name is None:
            return False
        succ = [t for t, p, _ in model.successors(s, by_name[name]) if p > 0]
        edges[s] = succ
        for t in succ:
            if t not in reach:
                reach.add(t)
                queue.append(t)
    # every reachable state must reach the goal along policy edges
    good = {s for s in reach if model.is_goal(s)}
    changed = True
    while changed:
        changed = False
        for s, succ in edges.items():
            if s not in good and any(t in good for t in succ):
                good.add(s)
                changed = True
    return good == reach


def brute_policy_value(model, policy, s0, tol=1e-12):
    """Iterative evaluation of a fixed policy from s0 (dict state -> action name)."""
    by_name = {action_name(a): a for a in model.actions}
    reach = [s0]
    seen = {s0}
    i = 0
    while i < len(reach):
        s = reach[i]
        i += 1
        if model.is_goal(s):
            continue
        for t, _, _ in model.successors(s, by_name[policy[s]]):
            if t not in seen:
                seen.add(t)
                reach.append(t)
    V = {s: 0.0 for s in reach}
    for _ in range(1_000_000):
        delta = 0.0
        for s in reach:
            if model.is_goal(s):
                continue
            v = sum(float(p) * (c + V[t]) for t, p, c in model.successors(s, by_name[policy[s]]))
            delta = max(delta, abs(v - V[s]))
            V[s] = v
        if delta < tol:
            return V[s0]
    return INF


def package_policy_to_lifted(ssp, pi):
    return {lifted_state(ssp, s): a.name for s, a in pi.items()}


class FiniteView:
    """Wraps a package model, hiding actions with any infinite-cost outcome,
    so ``brute_vi`` solves the constrained problem directly."""

    def __init__(self, model):
        self.model = model
        self.init = model.init

    def is_goal(self, s):
        return self.model.is_goal(s)

    def applicable(self, s):
        return [a for a in self.model.applicable_actions(s)
                if all(c != INF for _, _, c in self.model.successors(s, a))]

    def successors(self, s, a):
        return self.model.successors(s, a)
