"""``gpa-plan`` command line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .gpa import learn_gpa, load_gpa, policy_to_transitions, save_gpa, solve_with_gpa
from .heuristics import HEURISTICS
from .ppddl import PPDDLError, ground, load_text, parse_domain, parse_problem
from .policy_io import load_policy, save_policy
from .solvers import SOLVERS, SolverConfig
from .ssp import evaluate_policy

log = logging.getLogger("gpaplan")


def _solver_args(p: argparse.ArgumentParser, default_solver: str) -> None:
    p.add_argument("--solver", choices=sorted(SOLVERS), default=default_solver)
    p.add_argument("--heuristic", choices=HEURISTICS, default="ff")
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=None, help="seconds per solver phase")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("-o", "--output", help="write the policy here")


def _config(args) -> SolverConfig:
    return SolverConfig(epsilon=args.epsilon, seed=args.seed, heuristic=args.heuristic, time_limit=args.time_limit)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _report(result, extra: dict | None = None) -> None:
    info = {
        "value": None if math.isinf(result.value) else result.value,
        "backups": result.stats.backups,
        "states_expanded": result.stats.states_expanded,
        "converged": result.stats.converged,
        "wall_time": round(result.stats.wall_time, 6),
    }
    if result.phases:
        info["phases"] = [name for name, _ in result.phases]
    if extra:
        info.update(extra)
    print(json.dumps(info, sort_keys=True))


def cmd_plan(args) -> int:
    dtext, ptext = _read(args.domain), _read(args.problem)
    ssp = load_text(dtext, ptext)
    res = SOLVERS[args.solver](ssp, _config(args))
    if args.output:
        save_policy(args.output, ssp, res.policy, res.value, domain_text=dtext, problem_text=ptext,
                    extra={"solver": args.solver, "seed": args.seed})
    _report(res)
    return 0


def cmd_accel_plan(args) -> int:
    dtext, ptext = _read(args.domain), _read(args.problem)
    ssp = load_text(dtext, ptext)
    gpa = load_gpa(args.gpa, ssp.domain)
    res = solve_with_gpa(ssp, gpa, args.solver, _config(args))
    if args.output:
        save_policy(args.output, ssp, res.policy, res.value, domain_text=dtext, problem_text=ptext,
                    extra={"solver": args.solver, "seed": args.seed, "gpa": Path(args.gpa).name})
    _report(res)
    return 0


def cmd_learn_gpa(args) -> int:
    data = []
    for path in args.policies:
        ssp, pi, _ = load_policy(path)
        data.append(policy_to_transitions(ssp, pi))
    gpa = learn_gpa(data)
    save_gpa(gpa, args.output)
    print(json.dumps({"vertices": len(gpa.vertices), "hyperedges": len(gpa.edges), "vocabulary": gpa.vocabulary}))
    return 0


def cmd_eval(args) -> int:
    target = None
    if args.problem:
        header = json.loads(_read(args.policy).partition("\n")[0])
        dom = parse_domain(header["domain"])
        target = ground(dom, parse_problem(_read(args.problem), dom))
    ssp, pi, _ = load_policy(args.policy, target)
    ev = evaluate_policy(ssp, pi, args.trials, args.horizon, args.seed)
    print(json.dumps({"cost_mean": ev.mean_cost, "cost_sd": ev.std_dev, "goal_rate": ev.goal_rate,
                      "problem": ssp.name}, sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    from .bench.harness import load_spec, run_experiment, rows_to_csv

    spec = load_spec(args.spec)
    if args.output:
        spec.output = args.output
    rows = run_experiment(spec)
    if not spec.output:
        sys.stdout.write(rows_to_csv(rows))
    else:
        log.info("wrote %d rows to %s", len(rows), spec.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpa-plan", description="Solve PPDDL SSPs and learn GPAs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve a problem and optionally save the policy")
    _solver_args(p, "lrtdp")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("accel-plan", help="solve a problem with a GPA")
    p.add_argument("--gpa", required=True)
    _solver_args(p, "lrtdp")
    p.set_defaults(func=cmd_accel_plan)

    p = sub.add_parser("learn-gpa", help="learn a GPA from saved policies")
    p.add_argument("--policies", nargs="+", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_learn_gpa)

    p = sub.add_parser("eval", help="simulate a saved policy")
    p.add_argument("--policy", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--horizon", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("problem", nargs="?", help="problem file (default: the one stored with the policy)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run an experiment spec")
    p.add_argument("--spec", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (PPDDLError, ValueError, OSError) as exc:
        print(f"gpa-plan: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
