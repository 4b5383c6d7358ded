import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpaplan.bench import fixture, gen_gripper, gen_rover, gripper
from gpaplan.ppddl import ground, load, load_text
from gpaplan.solvers import value_iteration
from gpaplan.ssp import (
    INFINITE,
    NotApplicable,
    Policy,
    UndefinedValue,
    ValueTable,
    applicable_actions,
    bellman_backup,
    evaluate_policy,
    extract_policy,
    is_partial_proper,
    policy_value,
    reachable_states,
    state_hash,
    successors,
)

import oracles

SAME_EFFECT = """
(define (domain twin)
  (:predicates (done) (started))
  (:action go :parameters () :precondition (not (done))
    :effect (probabilistic 0.5 (done) 0.5 (done)))
  (:action idle :parameters () :effect (started)))
"""
TWIN_PROBLEM = "(define (problem t) (:domain twin) (:init) (:goal (done)))"
DONE_PROBLEM = "(define (problem t) (:domain twin) (:init (done)) (:goal (done)))"


def _atoms(ssp, *names):
    return ssp.state_from_atoms(names)


def _carry_in_b(ssp):
    return _atoms(ssp, ("at-robby", ("roomb",)), ("carry", ("ball1", "left")), ("free", ("right",)),
                  ("room", ("rooma",)), ("room", ("roomb",)), ("ball", ("ball1",)),
                  ("gripper", ("left",)), ("gripper", ("right",)))


def test_gripper1_applicable_at_init_matches_brute_force():
    dom, prob = gen_gripper(1)
    ssp = ground(dom, prob)
    got = [a.name for a in applicable_actions(ssp, ssp.init)]
    model = oracles.LiftedModel(dom, prob)
    want = {oracles.action_name(a) for a in model.applicable(model.init)}
    assert set(got) == want
    assert set(got) == {"pick(ball1,rooma,left)", "pick(ball1,rooma,right)", "move(rooma,roomb)"}
    ids = [a.id for a in applicable_actions(ssp, ssp.init)]
    assert ids == sorted(ids)


def test_negative_precondition_excludes_action():
    ssp = ground(*gen_rover(1, 2, 1, 1))
    img = [a for a in ssp.actions if a.schema == "take-image" and a.args[2] == "w0"][0]
    assert img in applicable_actions(ssp, ssp.init)
    (after, _, _), = successors(ssp, ssp.init, img)
    assert img not in applicable_actions(ssp, after)


def test_pick_outcomes():
    ssp = gripper(1)
    pick = ssp.action("pick(ball1,rooma,left)")
    out = dict((t, (p, c)) for t, p, c in successors(ssp, ssp.init, pick))
    assert out[ssp.init] == (pytest.approx(0.2), 1.0)
    carrying = [t for t in out if t != ssp.init][0]
    assert out[carrying] == (pytest.approx(0.8), 1.0)
    assert "(carry ball1 left)" in ssp.format_state(carrying)


def test_move_is_deterministic():
    ssp = gripper(1)
    (t, p, c), = successors(ssp, ssp.init, ssp.action("move(rooma,roomb)"))
    assert p == 1.0 and c == 1.0


def test_same_effect_outcomes_merge():
    ssp = load_text(SAME_EFFECT, TWIN_PROBLEM)
    (t, p, _), = successors(ssp, ssp.init, ssp.action("go()"))
    assert p == 1.0 and ssp.is_goal(t)


def test_not_applicable():
    ssp = gripper(1)
    with pytest.raises(NotApplicable):
        successors(ssp, ssp.init, ssp.action("drop(ball1,rooma,left)"))


def test_goal_is_absorbing_with_zero_cost():
    ssp = load_text(SAME_EFFECT, DONE_PROBLEM)
    assert ssp.is_goal(ssp.init)
    acts = applicable_actions(ssp, ssp.init)
    assert acts
    for a in acts:
        assert successors(ssp, ssp.init, a) == [(ssp.init, 1.0, 0.0)]


def _walk_states(ssp, n):
    return reachable_states(ssp, ssp.init)[:n]


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["g2", "g3", "r", "keva", "delicate-can", "schedule"]), st.data())
def test_successor_probabilities_sum_to_one(name, data):
    ssp = _instance(name)
    states = _walk_states(ssp, 400)
    s = data.draw(st.sampled_from(states))
    for a in applicable_actions(ssp, s):
        succ = successors(ssp, s, a)
        assert abs(sum(p for _, p, _ in succ) - 1.0) <= 1e-12
        assert len({t for t, _, _ in succ}) == len(succ)
        cost_zero = all(c == 0 for _, _, c in succ)
        assert cost_zero == ssp.is_goal(s)


_CACHE = {}


def _instance(name):
    if name not in _CACHE:
        if name == "g2":
            _CACHE[name] = gripper(2)
        elif name == "g3":
            _CACHE[name] = gripper(3)
        elif name == "r":
            _CACHE[name] = ground(*gen_rover(1, 3, 2, 2))
        else:
            _CACHE[name] = load(*fixture(name))
    return _CACHE[name]


def test_bellman_backup_hand_example():
    ssp = gripper(1)
    V = value_iteration(ssp).value_table
    s = _carry_in_b(ssp)
    v, a, _ = bellman_backup(ssp, s, V)
    assert v == pytest.approx(1.0, abs=1e-6)
    assert a.name == "drop(ball1,roomb,left)"


def test_bellman_backup_goal_and_dead_end():
    ssp = load(*fixture("delicate-can"))
    V = ValueTable(ssp, heuristic=lambda s: INFINITE)
    goal = ssp.state_from_atoms([("near", ()), ("holding", ()), ("intact", ())])
    assert ssp.is_goal(goal)
    assert bellman_backup(ssp, goal, V)[:2] == (0.0, None)
    v, a, res = bellman_backup(ssp, ssp.init, V)
    assert v == INFINITE and a is None and res == 0.0


def test_dead_end_state_has_no_finite_value():
    ssp = load(*fixture("delicate-can"))
    crushed = ssp.state_from_atoms([("near", ())])
    V = value_iteration(ssp).value_table
    assert bellman_backup(ssp, crushed, V)[0] == INFINITE


def test_extract_policy_without_values_raises():
    ssp = gripper(1)
    with pytest.raises(UndefinedValue):
        extract_policy(ssp, ValueTable(ssp), ssp.init)


def test_optimal_policy_is_partial_proper_and_agrees_with_oracle():
    dom, prob = gen_gripper(1)
    ssp = ground(dom, prob)
    res = value_iteration(ssp)
    assert is_partial_proper(ssp, res.policy, ssp.init)
    model = oracles.LiftedModel(dom, prob)
    assert oracles.brute_is_proper(model, oracles.package_policy_to_lifted(ssp, res.policy), model.init)


def test_noop_loop_policy_is_not_proper():
    ssp = load_text(SAME_EFFECT, TWIN_PROBLEM)
    started = ssp.state_from_atoms([("started", ())])
    pi = Policy({ssp.init: ssp.action("idle()"), started: ssp.action("idle()")})
    assert not is_partial_proper(ssp, pi, ssp.init)
    assert policy_value(ssp, pi, ssp.init) == INFINITE


def test_empty_policy_on_solved_start():
    ssp = load_text(SAME_EFFECT, DONE_PROBLEM)
    assert is_partial_proper(ssp, Policy(), ssp.init)
    assert evaluate_policy(ssp, Policy(), 10, 10, 0).mean_cost == 0.0


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["gripper", "delicate-can", "rover-simple", "keva"]), st.randoms(use_true_random=False))
def test_is_partial_proper_matches_fixpoint_oracle(name, rnd):
    dom, prob = _lifted(name)
    ssp = ground(dom, prob)
    model = oracles.LiftedModel(dom, prob)
    pi = Policy()
    for s in reachable_states(ssp, ssp.init):
        acts = applicable_actions(ssp, s)
        if acts and not ssp.is_goal(s) and rnd.random() < 0.97:
            pi[s] = rnd.choice(acts)
    lifted = oracles.package_policy_to_lifted(ssp, pi)
    assert is_partial_proper(ssp, pi, ssp.init) == oracles.brute_is_proper(model, lifted, model.init)


_LIFTED = {}


def _lifted(name):
    if name not in _LIFTED:
        if name == "gripper":
            _LIFTED[name] = gen_gripper(1)
        else:
            from gpaplan.ppddl import parse_domain, parse_problem

            d, p = fixture(name)
            dom = parse_domain(d.read_text())
            _LIFTED[name] = (dom, parse_problem(p.read_text(), dom))
    return _LIFTED[name]


@pytest.mark.parametrize("name", ["gripper", "keva", "schedule", "rover-simple"])
def test_policy_value_matches_iterative_evaluation(name):
    dom, prob = _lifted(name)
    ssp = ground(dom, prob)
    res = value_iteration(ssp)
    model = oracles.LiftedModel(dom, prob)
    want = oracles.brute_policy_value(model, oracles.package_policy_to_lifted(ssp, res.policy), model.init)
    assert policy_value(ssp, res.policy, ssp.init) == pytest.approx(want, abs=1e-8)


def test_gripper1_simulated_cost():
    ssp = gripper(1)
    pi = value_iteration(ssp).policy
    ev = evaluate_policy(ssp, pi, trials=10_000, horizon=100, seed=7)
    assert abs(ev.mean_cost - 3.25) <= 0.1
    assert ev.goal_rate == 1.0


def test_simulation_is_deterministic():
    ssp = gripper(2)
    pi = value_iteration(ssp).policy
    assert evaluate_policy(ssp, pi, 200, 100, 3) == evaluate_policy(ssp, pi, 200, 100, 3)
    assert evaluate_policy(ssp, pi, 200, 100, 3) != evaluate_policy(ssp, pi, 200, 100, 4)


def test_uncovered_state_charged_to_horizon():
    ssp = gripper(1)
    ev = evaluate_policy(ssp, Policy(), trials=5, horizon=30, seed=0)
    assert ev.mean_cost == 30 and ev.goal_rate == 0.0


def test_state_hash_ignores_fact_numbering():
    a = gripper(2)
    b = gripper(2)
    assert state_hash(a, a.init) == state_hash(b, b.init)
    assert state_hash(a, a.init) != state_hash(a, reachable_states(a, a.init)[1])


def test_value_table_keeps_goals_at_zero_and_clamps():
    ssp = load_text(SAME_EFFECT, DONE_PROBLEM)
    V = ValueTable(ssp, heuristic=lambda s: 5.0)
    assert V[ssp.init] == 0.0
    V[123] = -4.0
    assert V[123] == 0.0
    assert math.isinf(ValueTable(ssp, heuristic=lambda s: INFINITE)[0])
