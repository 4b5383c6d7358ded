"""Grounded SSP model and the Bellman machinery shared by every solver.

States are Python ints used as bitsets over dense fact ids, so equal fact
sets are equal (and hash equal) by construction.  Probabilities are kept as
exact fractions on the ground actions and converted to floats once, when
successors are generated.
"""

from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, NamedTuple

import numpy as np

INFINITE = math.inf

GroundState = int


class NotApplicable(ValueError):
    pass


class UndefinedValue(RuntimeError):
    pass


class PolicyIncomplete(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundOutcome:
    prob: Fraction
    add: int
    dels: int


@dataclass(frozen=True, eq=False)
class GroundAction:
    id: int
    schema: str
    args: tuple[str, ...]
    pre_pos: int
    pre_neg: int
    outcomes: tuple[GroundOutcome, ...]
    cost: float = 1.0
    # False when an equality or static literal makes the action inapplicable everywhere
    possible: bool = True

    @property
    def name(self) -> str:
        return f"{self.schema}({','.join(self.args)})"

    def applicable(self, s: GroundState) -> bool:
        return self.possible and (s & self.pre_pos) == self.pre_pos and not (s & self.pre_neg)

    def __repr__(self) -> str:
        return f"<GroundAction {self.id} {self.name}>"


class GroundGoal:
    """Goal formula over fact ids.

    ``node`` is a nested tuple tree: ``("fact", i)``, ``("not", x)``,
    ``("and", xs)``, ``("or", xs)`` or the constants True/False.  When the goal
    is a conjunction of literals the masks give a fast test.
    """

    def __init__(self, node):
        self.node = node
        lits = _literals(node)
        self.conjunctive = lits is not None
        self.pos = 0
        self.neg = 0
        if lits is not None:
            for sign, i in lits:
                if sign:
                    self.pos |= 1 << i
                else:
                    self.neg |= 1 << i

    def holds(self, s: GroundState) -> bool:
        if self.conjunctive:
            return (s & self.pos) == self.pos and not (s & self.neg)
        return _eval(self.node, s)


def _literals(node):
    if node is True:
        return []
    if node is False:
        return None
    kind = node[0]
    if kind == "fact":
        return [(True, node[1])]
    if kind == "not" and node[1] is not True and node[1] is not False and node[1][0] == "fact":
        return [(False, node[1][1])]
    if kind == "and":
        out = []
        for x in node[1]:
            sub = _literals(x)
            if sub is None:
                return None
            out.extend(sub)
        return out
    return None


def _eval(node, s: int) -> bool:
    if node is True or node is False:
        return node
    kind = node[0]
    if kind == "fact":
        return bool(s >> node[1] & 1)
    if kind == "not":
        return not _eval(node[1], s)
    if kind == "and":
        return all(_eval(x, s) for x in node[1])
    if kind == "or":
        return any(_eval(x, s) for x in node[1])
    raise ValueError(node)


@dataclass(eq=False)
class GroundSSP:
    """A grounded problem: objects, fact universe, actions, s0 and goal."""

    name: str
    domain: object
    problem: object
    objects: tuple[str, ...]
    object_types: dict[str, str]
    facts: tuple[tuple[str, tuple[str, ...]], ...]
    actions: tuple[GroundAction, ...]
    init: GroundState
    goal: GroundGoal
    fact_ids: dict = field(default_factory=dict)
    static_preds: frozenset = frozenset()
    _app_cache: dict = field(default_factory=dict, repr=False)
    _succ_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.fact_ids:
            self.fact_ids = {f: i for i, f in enumerate(self.facts)}
        self._candidates = [a for a in self.actions if a.possible]
        self._by_name = {a.name: a for a in self.actions}

    # the solver-facing model interface --------------------------------
    @property
    def ground(self) -> "GroundSSP":
        return self

    def is_goal(self, s: GroundState) -> bool:
        return self.goal.holds(s)

    def applicable_actions(self, s: GroundState) -> list[GroundAction]:
        acts = self._app_cache.get(s)
        if acts is None:
            acts = [a for a in self._candidates if (s & a.pre_pos) == a.pre_pos and not (s & a.pre_neg)]
            self._app_cache[s] = acts
        return acts

    def successors(self, s: GroundState, a: GroundAction) -> list[tuple[GroundState, float, float]]:
        key = (s, a.id)
        out = self._succ_cache.get(key)
        if out is not None:
            return out
        if not a.applicable(s):
            raise NotApplicable(f"{a.name} is not applicable in {self.format_state(s)}")
        if self.is_goal(s):
            out = [(s, 1.0, 0.0)]
        else:
            merged: dict[int, Fraction] = {}
            for o in a.outcomes:
                t = (s & ~o.dels) | o.add
                merged[t] = merged.get(t, Fraction(0)) + o.prob
            out = [(t, float(p), a.cost) for t, p in merged.items()]
        self._succ_cache[key] = out
        return out

    # helpers -----------------------------------------------------------
    def action(self, name: str) -> GroundAction:
        return self._by_name[name]

    def fact_name(self, i: int) -> str:
        pred, args = self.facts[i]
        return f"({' '.join((pred,) + args)})"

    def state_facts(self, s: GroundState) -> list[int]:
        return list(iter_bits(s))

    def format_state(self, s: GroundState) -> str:
        return "{" + ", ".join(self.fact_name(i) for i in iter_bits(s)) + "}"

    def state_from_atoms(self, atoms: Iterable) -> GroundState:
        s = 0
        for a in atoms:
            key = (a.pred, tuple(a.args)) if hasattr(a, "pred") else (a[0], tuple(a[1]))
            s |= 1 << self.fact_ids[key]
        return s

    def clear_caches(self) -> None:
        self._app_cache.clear()
        self._succ_cache.clear()


def iter_bits(s: int) -> Iterator[int]:
    while s:
        low = s & -s
        yield low.bit_length() - 1
        s ^= low


def state_hash(ssp: GroundSSP, s: GroundState) -> str:
    """Stable, name-based digest of a state (independent of fact numbering)."""
    text = "\n".join(sorted(ssp.fact_name(i) for i in iter_bits(s)))
    return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()


# -- module-level operations -------------------------------------------------


def applicable_actions(ssp, s: GroundState) -> list[GroundAction]:
    return ssp.applicable_actions(s)


def successors(ssp, s: GroundState, a: GroundAction) -> list[tuple[GroundState, float, float]]:
    return ssp.successors(s, a)


class ValueTable:
    """State values with lazily filled heuristic defaults and solved labels."""

    def __init__(self, model, heuristic: Callable[[GroundState], float] | None = None, initial=None):
        self.model = model
        self.heuristic = heuristic
        self.values: dict[GroundState, float] = {}
        self.solved: set[GroundState] = set()
        self.initial = initial

    def __getitem__(self, s: GroundState) -> float:
        v = self.values.get(s)
        if v is not None:
            return v
        if self.model.is_goal(s):
            v = 0.0
        else:
            v = None
            if self.initial is not None:
                v = self.initial.get(s)
            if v is None:
                if self.heuristic is None:
                    raise UndefinedValue(f"no value for state {s}")
                v = self.heuristic(s)
            v = max(v, 0.0)
        self.values[s] = v
        return v

    def __setitem__(self, s: GroundState, v: float) -> None:
        self.values[s] = max(v, 0.0)

    def __contains__(self, s: GroundState) -> bool:
        return s in self.values

    def __len__(self) -> int:
        return len(self.values)

    def get(self, s, default=None):
        return self.values.get(s, default)


def q_value(model, s: GroundState, a: GroundAction, V) -> float:
    q = 0.0
    for t, p, c in model.successors(s, a):
        q += p * (c + V[t])
    return q


def bellman_backup(model, s: GroundState, V) -> tuple[float, GroundAction | None, float]:
    """One application of the Bellman optimality operator at ``s``.

    Returns ``(new_value, greedy_action, residual)``; ties go to the lowest
    action id, and a state without any finite-valued action gets INFINITE.
    """
    old = V.get(s)
    if model.is_goal(s):
        return 0.0, None, residual(old or 0.0, 0.0)
    best = INFINITE
    best_a = None
    for a in model.applicable_actions(s):
        q = q_value(model, s, a, V)
        if q < best:
            best, best_a = q, a
    if old is None:
        old = V[s]
    return best, best_a, residual(old, best)


def residual(old: float, new: float) -> float:
    if old == new:
        return 0.0
    return abs(new - old)


def greedy_action(model, s: GroundState, V) -> GroundAction | None:
    return bellman_backup(model, s, V)[1]


@dataclass
class Policy:
    """Partial deterministic policy: state -> ground action."""

    actions: dict[GroundState, GroundAction] = field(default_factory=dict)

    def __getitem__(self, s):
        return self.actions[s]

    def __setitem__(self, s, a):
        self.actions[s] = a

    def __contains__(self, s):
        return s in self.actions

    def __len__(self):
        return len(self.actions)

    def get(self, s, default=None):
        return self.actions.get(s, default)

    def items(self):
        return self.actions.items()


def extract_policy(model, V, s0: GroundState) -> Policy:
    """Greedy policy w.r.t. ``V`` over its own reachable closure from ``s0``."""
    pi = Policy()
    seen = {s0}
    queue = deque([s0])
    while queue:
        s = queue.popleft()
        if model.is_goal(s):
            continue
        _, a, _ = bellman_backup(model, s, V)
        if a is None:
            continue
        pi[s] = a
        for t, _, _ in model.successors(s, a):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return pi


def policy_reachable(model, pi: Policy, s0: GroundState) -> tuple[list[GroundState], bool]:
    """States reachable under ``pi`` from ``s0``; flag is False if some
    reachable non-goal state has no (applicable) action."""
    order = [s0]
    seen = {s0}
    complete = True
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        if model.is_goal(s):
            continue
        a = pi.get(s)
        if a is None or not a.applicable(s):
            complete = False
            continue
        for t, p, _ in model.successors(s, a):
            if p > 0 and t not in seen:
                seen.add(t)
                order.append(t)
    return order, complete


def is_partial_proper(model, pi: Policy, s0: GroundState) -> bool:
    """True iff under ``pi`` the goal is reached with probability 1 from ``s0``."""
    states, complete = policy_reachable(model, pi, s0)
    if not complete:
        return False
    preds: dict[GroundState, list[GroundState]] = {s: [] for s in states}
    frontier = []
    for s in states:
        if model.is_goal(s):
            frontier.append(s)
            continue
        for t, p, _ in model.successors(s, pi[s]):
            if p > 0:
                preds[t].append(s)
    removed = set(frontier)
    while frontier:
        t = frontier.pop()
        for s in preds[t]:
            if s not in removed:
                removed.add(s)
                frontier.append(s)
    return len(removed) == len(states)


def policy_value(model, pi: Policy, s0: GroundState) -> float:
    """Exact expected cost of ``pi`` from ``s0`` (linear solve), INFINITE if improper."""
    if model.is_goal(s0):
        return 0.0
    if not is_partial_proper(model, pi, s0):
        return INFINITE
    states, _ = policy_reachable(model, pi, s0)
    inner = [s for s in states if not model.is_goal(s)]
    index = {s: i for i, s in enumerate(inner)}
    n = len(inner)
    A = np.eye(n)
    b = np.zeros(n)
    for s in inner:
        i = index[s]
        for t, p, c in model.successors(s, pi[s]):
            if math.isinf(c):
                return INFINITE
            b[i] += p * c
            j = index.get(t)
            if j is not None:
                A[i, j] -= p
    v = np.linalg.solve(A, b)
    return float(v[index[s0]])


class PolicyEvaluation(NamedTuple):
    mean_cost: float
    std_dev: float
    goal_rate: float


def simulate_policy(model, pi: Policy, trials: int, horizon: int, seed: int) -> tuple[list[float], list[bool]]:
    """Raw per-trial costs and goal flags of Monte-Carlo rollouts.

    A trial that reaches a state the policy does not cover is charged one unit
    per remaining step up to the horizon.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    costs: list[float] = []
    reached: list[bool] = []
    s0 = model.ground.init
    for _ in range(trials):
        s = s0
        total = 0.0
        goal = False
        for step in range(horizon):
            if model.is_goal(s):
                goal = True
                break
            a = pi.get(s)
            if a is None:
                total += horizon - step
                break
            succ = model.successors(s, a)
            u = rng.random()
            acc = 0.0
            nxt = succ[-1]
            for item in succ:
                acc += item[1]
                if u < acc:
                    nxt = item
                    break
            s = nxt[0]
            total += nxt[2]
        else:
            goal = model.is_goal(s)
        costs.append(total)
        reached.append(goal)
    return costs, reached


def summarize(costs: list[float], reached: list[bool]) -> PolicyEvaluation:
    arr = np.asarray(costs, dtype=float)
    if arr.size == 0:
        return PolicyEvaluation(0.0, 0.0, 0.0)
    return PolicyEvaluation(float(arr.mean()), float(arr.std()), float(np.mean(reached)))


def evaluate_policy(model, pi: Policy, trials: int = 100, horizon: int = 100, seed: int = 0) -> PolicyEvaluation:
    return summarize(*simulate_policy(model, pi, trials, horizon, seed))


def reachable_states(model, s0: GroundState, limit: int | None = None) -> list[GroundState]:
    """All states reachable from ``s0`` under any actions (goal states absorbing)."""
    order = [s0]
    seen = {s0}
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        if model.is_goal(s):
            continue
        for a in model.applicable_actions(s):
            for t, _, _ in model.successors(s, a):
                if t not in seen:
                    seen.add(t)
                    order.append(t)
                    if limit is not None and len(order) > limit:
                        raise StateSpaceLimitExceeded(f"more than {limit} reachable states")
    return order


class StateSpaceLimitExceeded(RuntimeError):
    pass


def usable_actions(model, s: GroundState) -> list[GroundAction]:
    """Applicable actions none of whose outcomes carries an infinite cost."""
    return [a for a in model.applicable_actions(s) if all(not math.isinf(c) for _, _, c in model.successors(s, a))]


def proper_states(model, states: Iterable[GroundState]) -> set[GroundState]:
    """Subset of a successor-closed ``states`` set from which some policy
    reaches the goal with probability 1 (greatest fixpoint)."""
    alive = set(states)
    acts = {s: usable_actions(model, s) for s in alive if not model.is_goal(s)}
    succ = {(s, a.id): [t for t, p, _ in model.successors(s, a) if p > 0] for s, al in acts.items() for a in al}
    while True:
        preds: dict[GroundState, list[GroundState]] = {}
        for s, al in acts.items():
            if s not in alive:
                continue
            for a in al:
                ts = succ[(s, a.id)]
                if all(t in alive for t in ts):
                    for t in ts:
                        preds.setdefault(t, []).append(s)
        good = {s for s in alive if model.is_goal(s)}
        stack = list(good)
        while stack:
            t = stack.pop()
            for s in preds.get(t, ()):
                if s not in good:
                    good.add(s)
                    stack.append(s)
        if good == alive:
            return alive
        alive = good


def prove_dead_ends(model, roots: Iterable[GroundState], limit: int = 200_000) -> set[GroundState]:
    """States provably without a proper policy, found by exhaustively exploring
    what is reachable from ``roots`` through finite-cost actions.

    Returns an empty set when the exploration exceeds ``limit`` states.
    """
    order = list(dict.fromkeys(roots))
    seen = set(order)
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        if model.is_goal(s):
            continue
        for a in usable_actions(model, s):
            for t, p, _ in model.successors(s, a):
                if p > 0 and t not in seen:
                    seen.add(t)
                    order.append(t)
                    if len(order) > limit:
                        return set()
    return seen - proper_states(model, seen)
