import json

import pytest

from gpaplan.bench import fixture, gripper_text, read_csv
from gpaplan.cli import main


@pytest.fixture
def gripper_files(tmp_path):
    dom, _ = gripper_text(1)
    (tmp_path / "domain.ppddl").write_text(dom)
    for b in (1, 2, 3):
        (tmp_path / f"p{b}.ppddl").write_text(gripper_text(b)[1])
    return tmp_path


def _json_out(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_plan_writes_policy_and_report(gripper_files, capsys):
    d = gripper_files
    out = d / "p1.policy"
    assert main(["plan", "--solver", "vi", str(d / "domain.ppddl"), str(d / "p1.ppddl"), "-o", str(out)]) == 0
    report = _json_out(capsys)
    assert report["value"] == pytest.approx(3.25, abs=1e-4)
    assert report["converged"] is True
    header = json.loads(out.read_text().splitlines()[0])
    assert header["solver"] == "vi" and header["seed"] == 0


def test_full_pipeline(gripper_files, capsys):
    d = gripper_files
    dom = str(d / "domain.ppddl")
    for b in (1, 2):
        assert main(["plan", "--solver", "lao", dom, str(d / f"p{b}.ppddl"), "-o", str(d / f"p{b}.policy")]) == 0
    capsys.readouterr()
    assert main(["learn-gpa", "--policies", str(d / "p1.policy"), str(d / "p2.policy"), "-o", str(d / "g.json")]) == 0
    info = _json_out(capsys)
    assert info["vertices"] > 0 and info["hyperedges"] > 0
    assert main(["accel-plan", "--gpa", str(d / "g.json"), dom, str(d / "p3.ppddl"), "-o", str(d / "p3.policy")]) == 0
    report = _json_out(capsys)
    assert report["phases"][0] == "constrained"
    assert main(["eval", "--policy", str(d / "p3.policy"), "--trials", "500"]) == 0
    ev = _json_out(capsys)
    assert ev["goal_rate"] == 1.0
    assert ev["cost_mean"] == pytest.approx(report["value"], rel=0.1)


def test_eval_against_explicit_problem(gripper_files, capsys):
    d = gripper_files
    main(["plan", str(d / "domain.ppddl"), str(d / "p1.ppddl"), "-o", str(d / "p1.policy")])
    capsys.readouterr()
    assert main(["eval", "--policy", str(d / "p1.policy"), str(d / "p1.ppddl")]) == 0
    assert _json_out(capsys)["goal_rate"] == 1.0


def test_errors_exit_with_two(tmp_path, capsys):
    bad = tmp_path / "bad.ppddl"
    bad.write_text("(define (domain broken")
    d, p = fixture("keva")
    assert main(["plan", str(bad), str(p)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["plan", str(d), str(tmp_path / "missing.ppddl")]) == 2
    assert main(["eval", "--policy", str(bad)]) == 2
    assert main(["learn-gpa", "--policies", str(bad), "-o", str(tmp_path / "g.json")]) == 2
    with pytest.raises(SystemExit):
        main(["plan", "--solver", "uct", str(d), str(p)])


SPEC = """family = "gripper"
train_instances = [1, 2]
test_instances = [3, 4]
solver = "soft-flares"
trials = 30
runs = 2
seed = 4
"""


def _without_time(path):
    rows = read_csv(str(path))
    for r in rows:
        del r["time_s"]
    return rows


def test_bench_writes_csv(tmp_path, capsys):
    spec = tmp_path / "exp.toml"
    spec.write_text(SPEC)
    assert main(["bench", "--spec", str(spec), "-o", str(tmp_path / "out.csv")]) == 0
    rows = _without_time(tmp_path / "out.csv")
    assert len(rows) == 8
    assert {r["gpa"] for r in rows} == {"none", "learned"}
    assert main(["bench", "--spec", str(spec)]) == 0
    assert capsys.readouterr().out.startswith("id,theta,solver,gpa,")


def test_repeated_commands_are_byte_identical(gripper_files, capsys):
    d = gripper_files
    dom = str(d / "domain.ppddl")
    for run in ("a", "b"):
        out = d / run
        out.mkdir()
        main(["plan", "--solver", "soft-flares", "--seed", "7", dom, str(d / "p2.ppddl"), "-o", str(out / "p2.policy")])
        main(["learn-gpa", "--policies", str(out / "p2.policy"), "-o", str(out / "g.json")])
        main(["accel-plan", "--gpa", str(out / "g.json"), dom, str(d / "p3.ppddl"), "-o", str(out / "p3.policy")])
    for name in ("p2.policy", "g.json", "p3.policy"):
        assert (d / "a" / name).read_bytes() == (d / "b" / name).read_bytes()
    spec = d / "exp.toml"
    spec.write_text(SPEC)
    main(["bench", "--spec", str(spec), "-o", str(d / "r1.csv")])
    main(["bench", "--spec", str(spec), "-o", str(d / "r2.csv")])
    assert _without_time(d / "r1.csv") == _without_time(d / "r2.csv")
