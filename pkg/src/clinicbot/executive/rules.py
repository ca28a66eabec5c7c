"""Reconciliation rule engine.

Rules are data: a guard over world fluents and fixups over modelled
fluents.  A guard binding fires only when every guard literal holds in the
post-observation state and at least one guard literal's fluent is among
the fluents the observation actually changed, so a rule reacts to reports,
not to standing facts.  Guards touch only world fluents and fixups only
modelled ones, so firings cannot enable or disable each other; they apply
in priority order for a deterministic combined effect.
"""

from __future__ import annotations

from clinicbot.executive.config import ReconciliationRule, parse_fluent
from clinicbot.pddl.ground import GroundedTask
from clinicbot.pddl.model import Atom


def _match_candidates(
    task: GroundedTask, pattern: Atom, binding: dict[str, str], state: int, value: bool
) -> list[tuple[int, dict[str, str]]]:
    out = []
    for idx, fluent in enumerate(task.fluents):
        if fluent.pred != pattern.pred or len(fluent.args) != len(pattern.args):
            continue
        if bool(state >> idx & 1) != value:
            continue
        extended = dict(binding)
        ok = True
        for p, a in zip(pattern.args, fluent.args):
            if p.startswith("?"):
                if extended.get(p, a) != a:
                    ok = False
                    break
                extended[p] = a
            elif p != a:
                ok = False
                break
        if ok:
            out.append((idx, extended))
    return out


def rule_firings(
    task: GroundedTask, rule: ReconciliationRule, state: int, changed: set[int]
) -> list[tuple[dict[str, str], list[int]]]:
    """All (binding, guard fluent indices) with a guard touching a change."""
    patterns = [(parse_fluent(f), v) for f, v in rule.when]
    results: list[tuple[dict[str, str], list[int]]] = []

    def extend(i: int, binding: dict[str, str], used: list[int]) -> None:
        if i == len(patterns):
            results.append((binding, list(used)))
            return
        pattern, value = patterns[i]
        for idx, extended in _match_candidates(task, pattern, binding, state, value):
            used.append(idx)
            extend(i + 1, extended, used)
            used.pop()

    extend(0, {}, [])
    return [
        (binding, used)
        for binding, used in results
        if any(idx in changed for idx in used)
    ]


def apply_rules(
    task: GroundedTask,
    rules: tuple[ReconciliationRule, ...],
    state: int,
    changed: set[int],
) -> tuple[int, list[dict]]:
    """Fire matching rules in priority order; returns (state, fired log)."""
    fired: list[dict] = []
    new_state = state
    for rule in sorted(rules, key=lambda r: r.priority):
        for binding, _ in rule_firings(task, rule, state, changed):
            fixes = []
            for pattern, value in rule.fixups:
                atom = parse_fluent(pattern).substitute(binding)
                if not task.has_fluent(atom):
                    continue
                idx = task.fluent_index(atom)
                bit = 1 << idx
                new_state = (new_state | bit) if value else (new_state & ~bit)
                fixes.append([str(atom), value])
            fired.append({"rule": rule.name, "binding": binding, "set": fixes})
    return new_state, fired
