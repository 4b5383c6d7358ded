"""Improved LAO*: depth-first expansion of the best partial solution graph
with post-order Bellman backups."""

from __future__ import annotations

from ..ssp import INFINITE, extract_policy, prove_dead_ends
from .base import Backups, Clock, SolveResult, SolverConfig, SolverStats, value_table

# tipless passes that fail to converge before dead ends are searched for
DEAD_END_CHECK_EVERY = 100


def lao_star(model, cfg: SolverConfig | None = None, initial=None, heuristic=None) -> SolveResult:
    cfg = cfg or SolverConfig()
    clock = Clock(cfg.time_limit)
    s0 = model.ground.init
    V = value_table(model, cfg, heuristic, initial)
    B = Backups(model, V)
    best: dict = {}
    expanded: set = set()
    stats = SolverStats()
    stale = 0
    converged = False
    V[s0]
    while True:
        tips = 0
        worst = 0.0
        # a switched best action exposes a subgraph this pass has not checked
        switched = False
        visited = {s0}
        graph = []
        stack = [(s0, None)]
        # iterative DFS; a frame's iterator is None until its state is entered
        while stack:
            s, it = stack[-1]
            if it is None:
                if model.is_goal(s):
                    stack.pop()
                    continue
                if s not in expanded:
                    expanded.add(s)
                    tips += 1
                    _, best[s], res = B.update(s)
                    stack.pop()
                    continue
                a = best.get(s)
                if a is None:
                    stack.pop()
                    graph.append(s)
                    continue
                it = iter([t for t, _, _ in model.successors(s, a)])
                stack[-1] = (s, it)
            nxt = next(it, None)
            while nxt is not None and nxt in visited:
                nxt = next(it, None)
            if nxt is not None:
                visited.add(nxt)
                stack.append((nxt, None))
                continue
            stack.pop()
            graph.append(s)
            prev = best[s]
            _, best[s], res = B.update(s)
            switched = switched or best[s] is not prev
            worst = max(worst, res)
        stats.trials += 1
        if tips == 0 and not switched and worst < cfg.epsilon:
            converged = True
            break
        if clock.expired():
            break
        if tips == 0:
            stale += 1
            if stale % DEAD_END_CHECK_EVERY == 0:
                for d in prove_dead_ends(model, graph):
                    V[d] = INFINITE
                    best[d] = None
                    expanded.add(d)
        else:
            stale = 0
    stats.backups = B.count
    stats.states_expanded = len(expanded)
    stats.converged = converged
    stats.wall_time = clock.elapsed
    if converged:
        V.solved.update(visited)
    return SolveResult(extract_policy(model, V, s0), V, stats)
