"""Synchronous value iteration over the full reachable state space."""

from __future__ import annotations

from ..ssp import INFINITE, ValueTable, bellman_backup, extract_policy, proper_states, reachable_states
from .base import Clock, SolveResult, SolverConfig, SolverStats


def value_iteration(model, cfg: SolverConfig | None = None, initial=None, heuristic=None) -> SolveResult:
    """Reference solver: enumerate, discard improper states, then sweep.

    Every sweep computes the new values from the previous sweep's values
    only.  States from which no policy reaches the goal get INFINITE up
    front; all others start at 0 (or at ``initial`` when given).
    """
    cfg = cfg or SolverConfig()
    clock = Clock(cfg.time_limit)
    s0 = model.ground.init
    states = reachable_states(model, s0, limit=cfg.max_states)
    alive = proper_states(model, states)
    values = {}
    for s in states:
        if model.is_goal(s):
            values[s] = 0.0
        elif s not in alive:
            values[s] = INFINITE
        else:
            v = initial.get(s) if initial is not None else None
            values[s] = max(v, 0.0) if v is not None and v != INFINITE else 0.0
    live = [s for s in states if s in alive and not model.is_goal(s)]
    stats = SolverStats(states_expanded=len(states))
    converged = False
    while True:
        V = ValueTable(model)
        V.values = values
        new = dict(values)
        worst = 0.0
        for s in live:
            v, _, res = bellman_backup(model, s, V)
            new[s] = v
            worst = max(worst, res)
        stats.backups += len(live)
        values = new
        if worst < cfg.epsilon:
            converged = True
            break
        if clock.expired():
            break
    V = ValueTable(model)
    V.values = values
    V.solved = set(values) if converged else set()
    stats.converged = converged
    stats.wall_time = clock.elapsed
    return SolveResult(extract_policy(model, V, s0), V, stats)
