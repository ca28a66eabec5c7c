"""Policy serialization.

The on-disk form is a JSON document::

    {"fluent_order": [...names...],
     "entries": [{"state": "0101...", "action": "name obj1 obj2"}],
     "class": "strong-cyclic"}

Entries are sorted by state bitstring and the document is dumped with a
fixed key order and separators, so identical policies serialize to
identical bytes.
"""

from __future__ import annotations

import json

from clinicbot.pddl.ground import GroundedTask
from clinicbot.planning.policy import Policy, SolutionClass


def policy_to_json(policy: Policy) -> dict:
    task = policy.task
    entries = [
        {"state": task.bitstring(state), "action": task.actions[idx].name}
        for state, idx in policy.mapping.items()
    ]
    entries.sort(key=lambda e: e["state"])
    return {
        "fluent_order": task.fluent_names,
        "entries": entries,
        "class": policy.solution_class.value,
    }


def dumps_policy(policy: Policy) -> str:
    return json.dumps(policy_to_json(policy), indent=2, sort_keys=True) + "\n"


def policy_from_json(doc: dict, task: GroundedTask) -> Policy:
    """Rebuild a Policy against ``task``; the fluent order must match."""
    if doc.get("fluent_order") != task.fluent_names:
        raise ValueError("policy fluent order does not match the task")
    mapping: dict[int, int] = {}
    for entry in doc.get("entries", []):
        state = task.state_from_bitstring(entry["state"])
        mapping[state] = task.action_index(entry["action"])
    cls = SolutionClass(doc.get("class", "invalid"))
    return Policy(task=task, mapping=mapping, solution_class=cls)


def loads_policy(text: str, task: GroundedTask) -> Policy:
    return policy_from_json(json.loads(text), task)
