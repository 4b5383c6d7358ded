"""Experiment harness: train a GPA, solve test instances with and without
it, simulate both policies and write one CSV row per (instance, run, mode)."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..gpa import Gpa, learn_gpa, load_gpa, policy_to_transitions, save_gpa, solve_with_gpa
from ..ppddl import ground, load
from ..solvers import SolverConfig, get_solver
from ..ssp import simulate_policy, summarize
from .generators import GENERATORS, InvalidParam

CSV_COLUMNS = ["id", "theta", "solver", "gpa", "run_seed", "time_s", "backups", "converged",
               "cost_mean", "cost_sd", "goal_rate"]


class InvalidSpec(ValueError):
    pass


@dataclass
class ExperimentSpec:
    family: str | None = None
    train_instances: list = field(default_factory=list)
    test_instances: list = field(default_factory=list)
    solver: str = "lrtdp"
    train_solver: str = "lao"
    heuristic: str = "ff"
    epsilon: float = 1e-5
    time_limit: float | None = None
    gpa_path: str | None = None
    gpa_out: str | None = None
    trials: int = 100
    horizon: int = 100
    runs: int = 1
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        for name in ("trials", "horizon", "runs"):
            if getattr(self, name) < 1:
                raise InvalidSpec(f"{name} must be at least 1")
        get_solver(self.solver)
        get_solver(self.train_solver)
        if self.family is not None and self.family not in GENERATORS:
            raise InvalidSpec(f"unknown family {self.family!r}; choose from {sorted(GENERATORS)}")

    def config(self, seed: int) -> SolverConfig:
        return SolverConfig(epsilon=self.epsilon, time_limit=self.time_limit, seed=seed, heuristic=self.heuristic)


def load_spec(path: str) -> ExperimentSpec:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    base = Path(path).parent
    known = set(ExperimentSpec.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise InvalidSpec(f"unknown spec keys: {', '.join(sorted(unknown))}")
    spec = ExperimentSpec(**data)
    # fixture paths in a spec are relative to the spec file
    for inst in spec.test_instances + spec.train_instances:
        if isinstance(inst, dict):
            for k in ("domain", "problem"):
                if k in inst and not Path(inst[k]).is_absolute():
                    inst[k] = str(base / inst[k])
    if spec.gpa_path and not Path(spec.gpa_path).is_absolute():
        spec.gpa_path = str(base / spec.gpa_path)
    return spec


@dataclass
class ResultRow:
    id: str
    theta: str
    solver: str
    gpa: str
    run_seed: int
    time_s: float
    backups: int
    converged: bool
    cost_mean: float
    cost_sd: float
    goal_rate: float
    # raw per-trial costs and goal flags; not written to CSV
    trial_costs: list = field(default_factory=list, repr=False)
    trial_goals: list = field(default_factory=list, repr=False)
    policy: object = field(default=None, repr=False, compare=False)
    ssp: object = field(default=None, repr=False, compare=False)

    def csv_values(self) -> list[str]:
        return [self.id, self.theta, self.solver, self.gpa, str(self.run_seed), f"{self.time_s:.6f}",
                str(self.backups), str(self.converged).lower(), repr(self.cost_mean), repr(self.cost_sd),
                repr(self.goal_rate)]


def instantiate(family: str | None, inst):
    """Returns ``(id, theta, ssp)`` for generator parameters or a fixture."""
    if isinstance(inst, dict):
        ssp = load(inst["domain"], inst["problem"])
        return inst.get("id", Path(inst["problem"]).stem), inst.get("theta", ""), ssp
    params = list(inst) if isinstance(inst, (list, tuple)) else [inst]
    if family is None:
        raise InvalidSpec("generator parameters need a family")
    try:
        dom, prob = GENERATORS[family](*params)
    except TypeError as exc:
        raise InvalidParam(f"bad parameters {params!r} for {family}: {exc}") from exc
    theta = "-".join(str(p) for p in params)
    return f"{family}-{theta}", theta, ground(dom, prob)


def train_gpa(spec: ExperimentSpec) -> Gpa | None:
    if spec.gpa_path:
        return load_gpa(spec.gpa_path)
    if not spec.train_instances:
        return None
    solver = get_solver(spec.train_solver)
    data = []
    for inst in spec.train_instances:
        _, _, ssp = instantiate(spec.family, inst)
        res = solver(ssp, spec.config(spec.seed))
        data.append(policy_to_transitions(ssp, res.policy))
    gpa = learn_gpa(data)
    if spec.gpa_out:
        save_gpa(gpa, spec.gpa_out)
    return gpa


def _row(pid, theta, spec, label, seed, result, elapsed, ssp) -> ResultRow:
    costs, goals = simulate_policy(ssp, result.policy, spec.trials, spec.horizon, seed)
    ev = summarize(costs, goals)
    return ResultRow(pid, theta, spec.solver, label, seed, elapsed, result.stats.backups,
                     result.stats.converged, ev.mean_cost, ev.std_dev, ev.goal_rate, costs, goals,
                     result.policy, ssp)


def run_experiment(spec: ExperimentSpec, gpa: Gpa | None = None) -> list[ResultRow]:
    if gpa is None:
        gpa = train_gpa(spec)
    label = Path(spec.gpa_path).stem if spec.gpa_path else "learned"
    solver = get_solver(spec.solver)
    rows = []
    for inst in spec.test_instances:
        pid, theta, ssp = instantiate(spec.family, inst)
        for run in range(spec.runs):
            seed = spec.seed + run
            cfg = spec.config(seed)
            t = time.perf_counter()
            res = solver(ssp, cfg)
            rows.append(_row(pid, theta, spec, "none", seed, res, time.perf_counter() - t, ssp))
            if gpa is not None:
                t = time.perf_counter()
                res = solve_with_gpa(ssp, gpa, spec.solver, cfg)
                rows.append(_row(pid, theta, spec, label, seed, res, time.perf_counter() - t, ssp))
    if spec.output:
        write_csv(rows, spec.output)
    return rows


def rows_to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_values())
    return buf.getvalue()


def write_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path_or_text: str) -> list[dict]:
    text = path_or_text
    if "\n" not in path_or_text:
        text = Path(path_or_text).read_text(encoding="utf-8")
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        rec["run_seed"] = int(rec["run_seed"])
        rec["time_s"] = float(rec["time_s"])
        rec["backups"] = int(rec["backups"])
        rec["converged"] = rec["converged"] == "true"
        for k in ("cost_mean", "cost_sd", "goal_rate"):
            rec[k] = float(rec[k])
        out.append(rec)
    return out


__all__ = [
    "CSV_COLUMNS",
    "ExperimentSpec",
    "InvalidSpec",
    "ResultRow",
    "load_spec",
    "read_csv",
    "rows_to_csv",
    "run_experiment",
    "train_gpa",
    "write_csv",
]
