"""Delete-relaxation heuristics over the all-outcomes determinization."""

from __future__ import annotations

import heapq
import math
from typing import Callable

from .ssp import INFINITE, GroundSSP, iter_bits


class RelaxedTask:
    """All-outcomes determinization of a GroundSSP with deletes dropped.

    Every (action, outcome) pair with a non-empty add list becomes one
    relaxed operator carrying the parent's cost; negative preconditions are
    ignored.  Operators are kept in (action id, outcome index) order, which is
    the tie-breaking order used for supporter selection.
    """

    def __init__(self, ssp: GroundSSP):
        self.ssp = ssp
        nfacts = len(ssp.facts)
        self.pre: list[list[int]] = []
        self.add: list[list[int]] = []
        self.cost: list[float] = []
        self.parent: list[int] = []
        self.by_pre: list[list[int]] = [[] for _ in range(nfacts)]
        self.no_pre: list[int] = []
        for a in ssp.actions:
            if not a.possible:
                continue
            pre = list(iter_bits(a.pre_pos))
            for o in a.outcomes:
                if not o.add:
                    continue
                op = len(self.pre)
                self.pre.append(pre)
                self.add.append(list(iter_bits(o.add)))
                self.cost.append(a.cost)
                self.parent.append(a.id)
                if pre:
                    for f in pre:
                        self.by_pre[f].append(op)
                else:
                    self.no_pre.append(op)
        goal = ssp.goal
        if goal.conjunctive:
            self.goal_facts = list(iter_bits(goal.pos))
        else:
            # only the positive conjunctive part of a complex goal is relaxed
            self.goal_facts = _positive_conjuncts(goal.node)

    def h_add_costs(self, s: int) -> tuple[dict[int, float], list[float]]:
        """Dijkstra-style additive costs; returns (fact cost, operator cost)."""
        fact_cost: dict[int, float] = {f: 0.0 for f in iter_bits(s)}
        op_cost = [INFINITE] * len(self.pre)
        missing = [len(p) for p in self.pre]
        acc = [0.0] * len(self.pre)
        heap: list[tuple[float, int]] = [(0.0, f) for f in fact_cost]

        def fire(op: int) -> None:
            c = acc[op] + self.cost[op]
            op_cost[op] = c
            for f in self.add[op]:
                if c < fact_cost.get(f, INFINITE):
                    fact_cost[f] = c
                    heapq.heappush(heap, (c, f))

        for op in self.no_pre:
            fire(op)
        done = set()
        while heap:
            c, f = heapq.heappop(heap)
            if f in done or c > fact_cost[f]:
                continue
            done.add(f)
            for op in self.by_pre[f]:
                missing[op] -= 1
                acc[op] += c
                if missing[op] == 0:
                    fire(op)
        return fact_cost, op_cost


def _positive_conjuncts(node) -> list[int]:
    if node is True or node is False:
        return []
    if node[0] == "fact":
        return [node[1]]
    if node[0] == "and":
        out: list[int] = []
        for x in node[1]:
            out.extend(_positive_conjuncts(x))
        return out
    return []


class HeuristicEvaluator:
    """Per-instance evaluator; holds scratch state, so one per solver run."""

    def __init__(self, ssp: GroundSSP, kind: str = "ff"):
        if kind not in HEURISTICS:
            raise ValueError(f"unknown heuristic {kind!r}; choose from {sorted(HEURISTICS)}")
        self.ssp = ssp
        self.kind = kind
        self.task = RelaxedTask(ssp) if kind in ("ff", "hadd") else None
        self.floor = min((a.cost for a in ssp.actions if a.possible and a.cost > 0), default=1.0)

    def __call__(self, s: int) -> float:
        if self.ssp.is_goal(s):
            return 0.0
        if self.kind == "zero":
            return 0.0
        if self.kind == "hadd":
            return self._hadd(s)
        return self._hff(s)

    def _hadd(self, s: int) -> float:
        fact_cost, _ = self.task.h_add_costs(s)
        total = 0.0
        for g in self.task.goal_facts:
            c = fact_cost.get(g, INFINITE)
            if math.isinf(c):
                return INFINITE
            total += c
        # a non-goal state always needs at least one action
        return total if total > 0 else self.floor

    def _hff(self, s: int) -> float:
        task = self.task
        fact_cost, op_cost = task.h_add_costs(s)
        for g in task.goal_facts:
            if math.isinf(fact_cost.get(g, INFINITE)):
                return INFINITE
        # best supporter per fact: min h_add operator cost, ties by operator order
        best: dict[int, int] = {}
        for op, c in enumerate(op_cost):
            if math.isinf(c):
                continue
            for f in task.add[op]:
                cur = best.get(f)
                if cur is None or c < op_cost[cur]:
                    best[f] = op
        plan: set[int] = set()
        stack = [g for g in task.goal_facts if fact_cost.get(g, 0.0) > 0.0]
        marked = set(stack)
        while stack:
            f = stack.pop()
            op = best[f]
            if op in plan:
                continue
            plan.add(op)
            for p in task.pre[op]:
                if fact_cost.get(p, 0.0) > 0.0 and p not in marked:
                    marked.add(p)
                    stack.append(p)
        total = sum(task.cost[op] for op in plan)
        return total if total > 0 else self.floor


def h_ff(ssp: GroundSSP, s: int) -> float:
    return HeuristicEvaluator(ssp, "ff")(s)


def h_add(ssp: GroundSSP, s: int) -> float:
    return HeuristicEvaluator(ssp, "hadd")(s)


def h_zero(ssp: GroundSSP, s: int) -> float:
    return 0.0


HEURISTICS = ("ff", "hadd", "zero")


def make_heuristic(ssp: GroundSSP, kind: str) -> Callable[[int], float]:
    return HeuristicEvaluator(ssp, kind)
