from pathlib import Path

from .generators import (
    InvalidParam,
    gen_gripper,
    gen_rover,
    gripper,
    gripper_text,
    rover,
    rover_text,
)
from .harness import (
    CSV_COLUMNS,
    ExperimentSpec,
    InvalidSpec,
    ResultRow,
    load_spec,
    read_csv,
    rows_to_csv,
    run_experiment,
    train_gpa,
    write_csv,
)

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name: str) -> tuple[Path, Path]:
    """Domain and first problem path of a bundled fixture, e.g. ``"keva"``."""
    return FIXTURES / f"{name}-domain.ppddl", FIXTURES / f"{name}-p01.ppddl"


__all__ = [
    "CSV_COLUMNS",
    "ExperimentSpec",
    "FIXTURES",
    "InvalidParam",
    "InvalidSpec",
    "ResultRow",
    "fixture",
    "gen_gripper",
    "gen_rover",
    "gripper",
    "gripper_text",
    "load_spec",
    "read_csv",
    "rover",
    "rover_text",
    "rows_to_csv",
    "run_experiment",
    "train_gpa",
    "write_csv",
]
