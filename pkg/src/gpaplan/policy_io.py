"""Policy files.

The first line is a JSON header carrying the problem id, V(s0) and the full
domain and problem text, so a policy file is self-contained.  Every further
line is ``<state hash>\\t<action name>``, sorted by hash.
"""

from __future__ import annotations

import json
import math
from collections import deque

from .ppddl import format_domain, format_problem, load_text
from .ssp import Policy, policy_reachable, state_hash

POLICY_FORMAT = "gpa-plan/policy"


class MalformedPolicy(ValueError):
    pass


def _num(v: float):
    return None if math.isinf(v) else v


def policy_to_text(ssp, pi: Policy, value: float | None = None, extra: dict | None = None,
                   domain_text: str | None = None, problem_text: str | None = None) -> str:
    ssp = ssp.ground
    states, _ = policy_reachable(ssp, pi, ssp.init)
    lines = sorted(f"{state_hash(ssp, s)}\t{pi[s].name}" for s in states if s in pi)
    header = {
        "format": POLICY_FORMAT,
        "version": 1,
        "problem": ssp.name,
        "value": _num(value) if value is not None else None,
        "domain": domain_text if domain_text is not None else format_domain(ssp.domain),
        "problem_text": problem_text if problem_text is not None else format_problem(ssp.problem),
    }
    if extra:
        header.update(extra)
    return json.dumps(header, sort_keys=True) + "\n" + "".join(line + "\n" for line in lines)


def save_policy(path: str, ssp, pi: Policy, value: float | None = None, **kw) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(policy_to_text(ssp, pi, value, **kw))


def policy_from_text(text: str, ssp=None):
    """Returns ``(ssp, policy, header)``; the problem is rebuilt from the
    header unless ``ssp`` is given."""
    first, _, rest = text.partition("\n")
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise MalformedPolicy(f"bad policy header: {exc}") from exc
    if header.get("format") != POLICY_FORMAT:
        raise MalformedPolicy("not a policy file")
    if ssp is None:
        ssp = load_text(header["domain"], header["problem_text"])
    ssp = ssp.ground
    table = {}
    for line in rest.splitlines():
        if not line:
            continue
        h, sep, name = line.partition("\t")
        if not sep:
            raise MalformedPolicy(f"bad policy line {line!r}")
        table[h] = name
    pi = Policy()
    seen = {ssp.init}
    queue = deque([ssp.init])
    while queue:
        s = queue.popleft()
        if ssp.is_goal(s):
            continue
        name = table.get(state_hash(ssp, s))
        if name is None:
            continue
        try:
            a = ssp.action(name)
        except KeyError:
            raise MalformedPolicy(f"unknown action {name!r}") from None
        if not a.applicable(s):
            raise MalformedPolicy(f"{name} is not applicable where the policy uses it")
        pi[s] = a
        for t, _, _ in ssp.successors(s, a):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return ssp, pi, header


def load_policy(path: str, ssp=None):
    with open(path, encoding="utf-8") as fh:
        return policy_from_text(fh.read(), ssp)
