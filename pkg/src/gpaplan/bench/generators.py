"""PPDDL text generators for the Gripper and Rover families.

Generators only emit text; instances are always built by parsing it, so the
parser is the single path from a description to a :class:`GroundSSP`.
"""

from __future__ import annotations

import random

from ..ppddl import ground, parse_domain, parse_problem


class InvalidParam(ValueError):
    pass


GRIPPER_DOMAIN = """\
(define (domain gripper)
  (:requirements :strips :equality :probabilistic-effects)
  (:predicates (room ?r) (ball ?b) (gripper ?g)
               (at-robby ?r) (at ?b ?r) (free ?g) (carry ?b ?g))
  (:action move
    :parameters (?from ?to)
    :precondition (and (room ?from) (room ?to) (at-robby ?from) (not (= ?from ?to)))
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  ; a pick fails one time in five and leaves the state unchanged
  (:action pick
    :parameters (?b ?r ?g)
    :precondition (and (ball ?b) (room ?r) (gripper ?g) (at ?b ?r) (at-robby ?r) (free ?g))
    :effect (probabilistic 0.8 (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g)))))
  (:action drop
    :parameters (?b ?r ?g)
    :precondition (and (ball ?b) (room ?r) (gripper ?g) (carry ?b ?g) (at-robby ?r))
    :effect (and (at ?b ?r) (free ?g) (not (carry ?b ?g))))
)
"""


def gripper_text(b: int) -> tuple[str, str]:
    """Domain and problem text for ``b`` balls starting in rooma."""
    if not isinstance(b, int) or b < 1:
        raise InvalidParam(f"gripper needs at least one ball, got {b!r}")
    balls = [f"ball{i}" for i in range(1, b + 1)]
    init = ["(room rooma)", "(room roomb)", "(gripper left)", "(gripper right)",
            "(at-robby rooma)", "(free left)", "(free right)"]
    for x in balls:
        init += [f"(ball {x})", f"(at {x} rooma)"]
    goal = " ".join(f"(at {x} roomb)" for x in balls)
    problem = (
        f"(define (problem gripper-{b})\n"
        "  (:domain gripper)\n"
        f"  (:objects rooma roomb {' '.join(balls)} left right)\n"
        "  (:init\n    " + "\n    ".join(init) + ")\n"
        f"  (:goal (and {goal}))\n"
        ")\n"
    )
    return GRIPPER_DOMAIN, problem


ROVER_DOMAIN = """\
(define (domain rover)
  (:requirements :typing :negative-preconditions :probabilistic-effects)
  (:types rover waypoint sample objective)
  (:predicates (at ?r - rover ?w - waypoint)
               (connected ?x - waypoint ?y - waypoint)
               (base ?w - waypoint)
               (sample-at ?s - sample ?w - waypoint)
               (empty ?r - rover)
               (have ?r - rover ?s - sample)
               (stored ?s - sample)
               (visible ?o - objective ?w - waypoint)
               (imaged ?o - objective))
  (:action move
    :parameters (?r - rover ?from - waypoint ?to - waypoint)
    :precondition (and (at ?r ?from) (connected ?from ?to))
    :effect (and (at ?r ?to) (not (at ?r ?from))))
  ; sampling fails with probability 0.4 and can be retried
  (:action take-sample
    :parameters (?r - rover ?s - sample ?w - waypoint)
    :precondition (and (at ?r ?w) (sample-at ?s ?w) (empty ?r))
    :effect (probabilistic 0.6 (and (have ?r ?s) (not (sample-at ?s ?w)) (not (empty ?r)))))
  (:action drop
    :parameters (?r - rover ?s - sample ?w - waypoint)
    :precondition (and (at ?r ?w) (base ?w) (have ?r ?s))
    :effect (and (stored ?s) (empty ?r) (not (have ?r ?s))))
  (:action take-image
    :parameters (?r - rover ?o - objective ?w - waypoint)
    :precondition (and (at ?r ?w) (visible ?o ?w) (not (imaged ?o)))
    :effect (imaged ?o))
)
"""


def rover_text(r: int, w: int, s: int, o: int, seed: int = 0) -> tuple[str, str]:
    """Domain and problem text for ``r`` rovers, ``w`` waypoints, ``s`` samples
    and ``o`` objectives.

    Waypoint ``w0`` is the base and every waypoint is connected to every other.
    Samples sit on non-base waypoints; each objective is visible from the base
    and from one more waypoint.  Placement is drawn from ``random.Random(seed)``.
    """
    for name, val, low in (("r", r, 1), ("w", w, 2), ("s", s, 1), ("o", o, 0)):
        if not isinstance(val, int) or val < low:
            raise InvalidParam(f"rover parameter {name} must be an integer >= {low}, got {val!r}")
    rng = random.Random(seed)
    rovers = [f"rover{i}" for i in range(1, r + 1)]
    wps = [f"w{i}" for i in range(w)]
    samples = [f"s{i}" for i in range(1, s + 1)]
    objectives = [f"o{i}" for i in range(1, o + 1)]
    init = ["(base w0)"]
    init += [f"(connected {x} {y})" for x in wps for y in wps if x != y]
    for rv in rovers:
        init += [f"(at {rv} w0)", f"(empty {rv})"]
    for sm in samples:
        init.append(f"(sample-at {sm} {rng.choice(wps[1:])})")
    for ob in objectives:
        init.append(f"(visible {ob} w0)")
        extra = rng.choice(wps)
        if extra != "w0":
            init.append(f"(visible {ob} {extra})")
    goal = [f"(stored {sm})" for sm in samples] + [f"(imaged {ob})" for ob in objectives]
    objects = []
    for names, t in ((rovers, "rover"), (wps, "waypoint"), (samples, "sample"), (objectives, "objective")):
        if names:
            objects.append(f"{' '.join(names)} - {t}")
    problem = (
        f"(define (problem rover-{r}-{w}-{s}-{o}-{seed})\n"
        "  (:domain rover)\n"
        f"  (:objects {' '.join(objects)})\n"
        "  (:init\n    " + "\n    ".join(init) + ")\n"
        f"  (:goal (and {' '.join(goal)}))\n"
        ")\n"
    )
    return ROVER_DOMAIN, problem


def _parse(texts: tuple[str, str]):
    dom = parse_domain(texts[0])
    return dom, parse_problem(texts[1], dom)


def gen_gripper(b: int):
    return _parse(gripper_text(b))


def gen_rover(r: int, w: int, s: int, o: int, seed: int = 0):
    return _parse(rover_text(r, w, s, o, seed))


def gripper(b: int):
    """Grounded Gripper instance."""
    return ground(*gen_gripper(b))


def rover(r: int, w: int, s: int, o: int, seed: int = 0):
    """Grounded Rover instance."""
    return ground(*gen_rover(r, w, s, o, seed))


GENERATORS = {"gripper": gen_gripper, "rover": gen_rover}
TEXT_GENERATORS = {"gripper": gripper_text, "rover": rover_text}
