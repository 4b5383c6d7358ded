from .base import SolveResult, SolverConfig, SolverStats, TimeLimitExceeded, logistic_label_probability, uniform
from .lao import lao_star
from .rtdp import lrtdp, soft_flares
from .vi import value_iteration

SOLVERS = {
    "vi": value_iteration,
    "lao": lao_star,
    "lrtdp": lrtdp,
    "soft-flares": soft_flares,
}


def get_solver(name: str):
    try:
        return SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None


__all__ = [
    "SOLVERS",
    "SolveResult",
    "SolverConfig",
    "SolverStats",
    "TimeLimitExceeded",
    "get_solver",
    "lao_star",
    "logistic_label_probability",
    "lrtdp",
    "soft_flares",
    "uniform",
    "value_iteration",
]
