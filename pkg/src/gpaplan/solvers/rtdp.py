"""Trial-based solvers: labelled RTDP and Soft-FLARES.

Both run greedy trials from s0 with sampled outcomes and label states whose
greedy envelope is epsilon-consistent.  LRTDP labels only when the whole
envelope below a state is consistent.  Soft-FLARES looks ahead a bounded
depth; when that look-ahead is consistent but not closed it labels the
checked states at random, more readily the closer they are to the root.
"""

from __future__ import annotations

from ..ssp import INFINITE, bellman_backup, extract_policy, prove_dead_ends
from .base import (
    Backups,
    Clock,
    SolveResult,
    SolverConfig,
    SolverStats,
    logistic_label_probability,
    sample_successor,
    uniform,
    value_table,
)

# a single trial never runs longer than this many times the known states
DEPTH_FACTOR = 10
MIN_DEPTH_BASE = 100


class _TrialSolver:
    def __init__(self, model, cfg: SolverConfig, initial, heuristic, soft: bool):
        self.model = model
        self.cfg = cfg
        self.V = value_table(model, cfg, heuristic, initial)
        self.B = Backups(model, self.V)
        self.soft = soft and cfg.t_horizon > 0
        # exact labels live in V.solved; soft labels only stop trials
        self.soft_solved: set = set()
        self.clock = Clock(cfg.time_limit)
        self.stats = SolverStats()
        self.touched: set = set()

    def labelled(self, s) -> bool:
        return s in self.V.solved or s in self.soft_solved

    def run(self) -> SolveResult:
        s0 = self.model.ground.init
        cfg = self.cfg
        V = self.V
        if self.model.is_goal(s0):
            V.solved.add(s0)
        trial = 0
        while not self.labelled(s0):
            if cfg.max_trials is not None and trial >= cfg.max_trials:
                break
            if self.clock.expired():
                break
            self.trial(s0, trial)
            trial += 1
        self.stats.trials = trial
        self.stats.backups = self.B.count
        self.stats.states_expanded = len(self.touched)
        self.stats.converged = s0 in V.solved or (self.labelled(s0) and self.envelope_consistent(s0))
        self.stats.wall_time = self.clock.elapsed
        return SolveResult(extract_policy(self.model, V, s0), V, self.stats)

    def trial(self, s0, trial: int) -> None:
        model = self.model
        V = self.V
        visited = []
        s = s0
        cap = DEPTH_FACTOR * max(len(V), MIN_DEPTH_BASE)
        truncated = False
        depth = 0
        while not self.labelled(s):
            visited.append(s)
            if model.is_goal(s):
                break
            value, a, _ = self.B.update(s)
            self.touched.add(s)
            if a is None or value == INFINITE:
                break
            if depth >= cap:
                truncated = True
                break
            s = sample_successor(model.successors(s, a), uniform(self.cfg.seed, trial, depth))[0]
            depth += 1
        if truncated:
            # long trials usually circle inside a region that cannot reach the goal
            for d in prove_dead_ends(model, [visited[-1]]):
                V[d] = INFINITE
                V.solved.add(d)
            return
        while visited:
            s = visited.pop()
            if not self.check(s):
                break

    def envelope_consistent(self, s0) -> bool:
        """Uncounted final check that a soft-labelled greedy envelope is
        epsilon-consistent everywhere, so ``converged`` is never a guess."""
        model = self.model
        V = self.V
        seen = {s0}
        stack = [s0]
        while stack:
            x = stack.pop()
            if model.is_goal(x) or x in V.solved:
                continue
            _, a, res = bellman_backup(model, x, V)
            if res > self.cfg.epsilon or a is None:
                return False
            for t, _, _ in model.successors(x, a):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return True

    def check(self, s) -> bool:
        if self.soft:
            return self.check_soft(s)
        return self.check_solved(s)

    def check_solved(self, s) -> bool:
        """Exact labelling of the greedy envelope below ``s``."""
        model = self.model
        V = self.V
        ok = True
        open_ = [] if s in V.solved else [s]
        seen = set(open_)
        closed = []
        while open_:
            x = open_.pop()
            closed.append(x)
            if model.is_goal(x):
                continue
            _, a, res = self.B.evaluate(x)
            if res > self.cfg.epsilon:
                ok = False
                continue
            if a is None:
                continue
            for t, _, _ in model.successors(x, a):
                if t not in V.solved and t not in seen:
                    seen.add(t)
                    open_.append(t)
        if ok:
            V.solved.update(closed)
        else:
            for x in reversed(closed):
                if not model.is_goal(x):
                    self.B.update(x)
        return ok

    def check_soft(self, s) -> bool:
        """Bounded look-ahead labelling (depth 2t below ``s``)."""
        model = self.model
        V = self.V
        t_h = self.cfg.t_horizon
        limit = 2 * t_h
        if s in V.solved:
            return True
        ok = True
        closed_graph = True
        open_ = [(s, 0)]
        seen = {s}
        closed = []
        while open_:
            x, d = open_.pop()
            closed.append((x, d))
            if model.is_goal(x):
                continue
            _, a, res = self.B.evaluate(x)
            if res > self.cfg.epsilon:
                ok = False
                continue
            if a is None:
                continue
            for t, _, _ in model.successors(x, a):
                if t in V.solved or t in seen:
                    continue
                if d + 1 > limit:
                    closed_graph = False
                    continue
                seen.add(t)
                open_.append((t, d + 1))
        if not ok:
            for x, _ in reversed(closed):
                if not model.is_goal(x):
                    self.B.update(x)
            return False
        if closed_graph:
            V.solved.update(x for x, _ in closed)
            return True
        key = len(self.soft_solved) + 1
        labelled_root = False
        for i, (x, d) in enumerate(closed):
            p = logistic_label_probability(d, t_h, self.cfg.alpha, self.cfg.beta)
            if uniform(self.cfg.seed, -key, i) < p:
                self.soft_solved.add(x)
                labelled_root = labelled_root or x == s
        return labelled_root


def lrtdp(model, cfg: SolverConfig | None = None, initial=None, heuristic=None) -> SolveResult:
    return _TrialSolver(model, cfg or SolverConfig(), initial, heuristic, soft=False).run()


def soft_flares(model, cfg: SolverConfig | None = None, initial=None, heuristic=None) -> SolveResult:
    """Soft-FLARES; ``t_horizon=0`` falls back to exact labelling."""
    return _TrialSolver(model, cfg or SolverConfig(), initial, heuristic, soft=True).run()


__all__ = ["lrtdp", "soft_flares"]
