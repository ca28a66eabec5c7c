"""Brute-force planning oracles for the test suite.

Deliberately naive and independent of the package's search code: states are
frozensets of atom names, applicability is recomputed from literal sets,
and every question is answered by exhaustive fixpoint iteration over the
full reachable space.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NaiveAction:
    name: str
    pre_pos: frozenset[str]
    pre_neg: frozenset[str]
    outcomes: tuple[tuple[frozenset[str], frozenset[str]], ...]  # (adds, dels)


@dataclass(frozen=True)
class NaiveTask:
    fluents: tuple[str, ...]
    init: frozenset[str]
    goal_pos: frozenset[str]
    goal_neg: frozenset[str]
    actions: tuple[NaiveAction, ...]


def naive_view(task) -> NaiveTask:
    """Re-express a GroundedTask with sets; no mask arithmetic shared."""
    names = task.fluent_names

    def atoms(mask: int) -> frozenset[str]:
        return frozenset(names[i] for i in range(len(names)) if mask >> i & 1)

    actions = tuple(
        NaiveAction(
            name=a.name,
            pre_pos=atoms(a.pre_pos),
            pre_neg=atoms(a.pre_neg),
            outcomes=tuple((atoms(add), atoms(dl)) for add, dl in a.outcomes),
        )
        for a in task.actions
    )
    return NaiveTask(
        fluents=tuple(names),
        init=atoms(task.init),
        goal_pos=atoms(task.goal_pos),
        goal_neg=atoms(task.goal_neg),
        actions=actions,
    )


def applicable(action: NaiveAction, state: frozenset[str]) -> bool:
    return action.pre_pos <= state and not (action.pre_neg & state)


def successor(state: frozenset[str], adds: frozenset[str], dels: frozenset[str]):
    return frozenset((state - dels) | adds)


def is_goal(task: NaiveTask, state: frozenset[str]) -> bool:
    return task.goal_pos <= state and not (task.goal_neg & state)


def reachable(task: NaiveTask) -> set[frozenset[str]]:
    seen = {task.init}
    frontier = [task.init]
    while frontier:
        state = frontier.pop()
        for action in task.actions:
            if not applicable(action, state):
                continue
            for adds, dels in action.outcomes:
                nxt = successor(state, adds, dels)
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return seen


def weak_solvable(task: NaiveTask) -> bool:
    """Can some outcome path reach the goal (planner picks outcomes)."""
    seen = {task.init}
    frontier = [task.init]
    while frontier:
        state = frontier.pop()
        if is_goal(task, state):
            return True
        for action in task.actions:
            if not applicable(action, state):
                continue
            for adds, dels in action.outcomes:
                nxt = successor(state, adds, dels)
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return False


def strong_solvable(task: NaiveTask) -> bool:
    """Backward fixpoint: wins if some action sends all outcomes to wins."""
    space = reachable(task)
    won = {s for s in space if is_goal(task, s)}
    changed = True
    while changed:
        changed = False
        for state in space:
            if state in won:
                continue
            for action in task.actions:
                if not applicable(action, state):
                    continue
                if all(
                    successor(state, adds, dels) in won
                    for adds, dels in action.outcomes
                ):
                    won.add(state)
                    changed = True
                    break
    return task.init in won


def strong_cyclic_solvable(task: NaiveTask) -> bool:
    """Greatest fixpoint of 'can reach goal while staying inside the set'."""
    safe = reachable(task)
    while True:
        reach = {s for s in safe if is_goal(task, s)}
        changed = True
        while changed:
            changed = False
            for state in safe:
                if state in reach:
                    continue
                for action in task.actions:
                    if not applicable(action, state):
                        continue
                    succs = [
                        successor(state, adds, dels) for adds, dels in action.outcomes
                    ]
                    if all(s in safe for s in succs) and any(s in reach for s in succs):
                        reach.add(state)
                        changed = True
                        break
        if reach == safe:
            return task.init in safe
        safe = reach
