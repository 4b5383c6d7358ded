"""Configuration, results and shared helpers for the SSP solvers."""

from __future__ import annotations

import hashlib
import math
import struct
import time
from dataclasses import dataclass, field

from ..heuristics import HEURISTICS, make_heuristic
from ..ssp import INFINITE, Policy, ValueTable, bellman_backup


class TimeLimitExceeded(RuntimeError):
    pass


@dataclass
class SolverConfig:
    epsilon: float = 1e-5
    max_trials: int | None = None
    time_limit: float | None = None
    seed: int = 0
    heuristic: str = "ff"
    # Soft-FLARES: look-ahead depth and logistic labelling curve
    t_horizon: int = 4
    alpha: float = 0.1
    beta: float = 0.9
    max_states: int = 1_000_000

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 <= self.alpha <= self.beta <= 1:
            raise ValueError("need 0 <= alpha <= beta <= 1")
        if self.t_horizon < 0:
            raise ValueError("t_horizon must be non-negative")
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.max_trials is not None and self.max_trials < 0:
            raise ValueError("max_trials must be non-negative")


@dataclass
class SolverStats:
    backups: int = 0
    states_expanded: int = 0
    wall_time: float = 0.0
    converged: bool = False
    trials: int = 0


@dataclass
class SolveResult:
    policy: Policy
    value_table: ValueTable
    stats: SolverStats = field(default_factory=SolverStats)
    # Alg.-style phase record filled by the GPA driver; empty for plain solves
    phases: list = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.value_table[self.value_table.model.ground.init]


class Backups:
    """Counts every Bellman backup evaluated by a solver run."""

    def __init__(self, model, V: ValueTable):
        self.model = model
        self.V = V
        self.count = 0

    def evaluate(self, s):
        self.count += 1
        return bellman_backup(self.model, s, self.V)

    def update(self, s):
        value, a, res = self.evaluate(s)
        self.V[s] = value
        return value, a, res


class Clock:
    def __init__(self, limit: float | None):
        self.start = time.perf_counter()
        self.limit = limit

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def expired(self) -> bool:
        return self.limit is not None and self.elapsed > self.limit


def uniform(seed: int, trial: int, depth: int) -> float:
    """Counter-based uniform draw in [0, 1) keyed by (seed, trial, depth)."""
    key = struct.pack("<qqq", seed, trial, depth)
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little") / 2.0**64


def sample_successor(succ, u: float):
    acc = 0.0
    for item in succ:
        acc += item[1]
        if u < acc:
            return item
    return succ[-1]


def logistic_label_probability(d: float, t: int, alpha: float, beta: float, delta: float = 1e-3) -> float:
    """Probability of soft-labelling a state whose consistency was checked
    ``d`` steps below the root of a depth-``t`` look-ahead.

    A logistic curve centred at t/2, scaled so p(0) = beta - delta and
    p(t) = alpha + delta.
    """
    span = beta - alpha
    if t <= 0 or span <= 2 * delta:
        return beta if d <= 0 else alpha
    q = 1.0 - delta / span
    k = 2.0 * math.log(q / (1.0 - q))
    x = k * (t / 2.0 - d) / t
    return alpha + span / (1.0 + math.exp(-x))


def value_table(model, cfg: SolverConfig, heuristic=None, initial=None) -> ValueTable:
    h = heuristic if heuristic is not None else make_heuristic(model.ground, cfg.heuristic)
    return ValueTable(model, h, initial)


def is_dead(v: float) -> bool:
    return v == INFINITE
