"""Policy synthesis for non-deterministic tasks.

Two routes, matching the two solution semantics:

- strong-cyclic: an incremental determinize-and-replan loop.  Classical
  plans from the initial state are folded into a policy; states produced by
  unhandled outcomes are replanned from; states with no plan are marked
  dead and action choices that can reach them are avoided; policies whose
  graph traps execution away from the goal are repaired by banning the
  trapping choices.  When the loop gives up and the reachable space is
  small enough to enumerate, an exact fixpoint decides the instance, so
  "unsolvable" answers are never an artifact of the incremental bans.
- strong: exact backward fixpoint over the enumerated reachable space
  (the acyclic winning set), which doubles as the fallback machinery.

All iteration orders are canonical, so two runs on the same input produce
identical policies.
"""

from __future__ import annotations

from collections import defaultdict

from clinicbot.pddl.ground import GroundedTask
from clinicbot.planning.classical import AdditiveHeuristic, plan
from clinicbot.planning.determinize import Determinization, determinize
from clinicbot.planning.policy import (
    Budget,
    Policy,
    ResourceLimit,
    SolutionClass,
    Unsolvable,
)
from clinicbot.planning.verify import verify_policy

DEFAULT_NODE_BUDGET = 1_000_000
DEFAULT_EXPLICIT_BOUND = 200_000
_PRP_MAX_ROUNDS = 10_000


class _TooBig(Exception):
    pass


def enumerate_reachable(task: GroundedTask, bound: int, budget: Budget) -> list[int]:
    """All states reachable from init under any action/outcome, BFS order."""
    order = [task.init]
    seen = {task.init}
    i = 0
    while i < len(order):
        state = order[i]
        i += 1
        budget.spend()
        for action in task.actions:
            if not action.applicable(state):
                continue
            for k in range(len(action.outcomes)):
                succ = action.apply(state, k)
                if succ not in seen:
                    seen.add(succ)
                    order.append(succ)
                    if len(order) > bound:
                        raise _TooBig
    return order


def _strong_fixpoint(task: GroundedTask, states: list[int]) -> dict[int, int] | None:
    """Acyclic winning set: s wins if some action sends every outcome to a win."""
    won: dict[int, int | None] = {s: None for s in states if task.is_goal(s)}
    changed = True
    while changed:
        changed = False
        for state in states:
            if state in won:
                continue
            for idx, action in enumerate(task.actions):
                if not action.applicable(state):
                    continue
                if all(action.apply(state, k) in won for k in range(len(action.outcomes))):
                    won[state] = idx
                    changed = True
                    break
    if task.init not in won:
        return None
    return {s: a for s, a in won.items() if a is not None}


def _strong_cyclic_fixpoint(task: GroundedTask, states: list[int]) -> dict[int, int] | None:
    """Greatest set of states that can keep reaching the goal.

    Iteratively shrinks the candidate set to states that can reach the goal
    through actions whose every outcome stays inside the set, then extracts
    a policy by backward distance sweeps inside the final set.
    """
    safe = set(states)
    while True:
        reach = {s for s in safe if task.is_goal(s)}
        grew = True
        while grew:
            grew = False
            for state in states:
                if state not in safe or state in reach:
                    continue
                for action in task.actions:
                    if not action.applicable(state):
                        continue
                    succs = [action.apply(state, k) for k in range(len(action.outcomes))]
                    if all(s in safe for s in succs) and any(s in reach for s in succs):
                        reach.add(state)
                        grew = True
                        break
        if reach == safe:
            break
        safe = reach
    if task.init not in safe:
        return None

    dist: dict[int, int] = {s: 0 for s in safe if task.is_goal(s)}
    mapping: dict[int, int] = {}
    frontier = True
    level = 0
    while frontier:
        frontier = False
        level += 1
        for state in states:
            if state not in safe or state in dist:
                continue
            for idx, action in enumerate(task.actions):
                if not action.applicable(state):
                    continue
                succs = [action.apply(state, k) for k in range(len(action.outcomes))]
                if all(s in safe for s in succs) and any(
                    dist.get(s, level) < level for s in succs
                ):
                    dist[state] = level
                    mapping[state] = idx
                    frontier = True
                    break
    return mapping


def _policy_reachable(task: GroundedTask, mapping: dict[int, int]) -> list[int]:
    order = [task.init]
    seen = {task.init}
    i = 0
    while i < len(order):
        state = order[i]
        i += 1
        if task.is_goal(state) or state not in mapping:
            continue
        action = task.actions[mapping[state]]
        for k in range(len(action.outcomes)):
            succ = action.apply(state, k)
            if succ not in seen:
                seen.add(succ)
                order.append(succ)
    return order


def _trim(task: GroundedTask, mapping: dict[int, int]) -> dict[int, int]:
    reachable = set(_policy_reachable(task, mapping))
    return {s: a for s, a in mapping.items() if s in reachable}


class _PrpGiveUp(Exception):
    def __init__(self, exact_unsolvable: bool):
        self.exact_unsolvable = exact_unsolvable


def _prp_strong_cyclic(
    task: GroundedTask, det: Determinization, budget: Budget
) -> dict[int, int]:
    """Incremental replanning loop; raises _PrpGiveUp when inconclusive."""
    heuristic = AdditiveHeuristic(det)
    dead: set[int] = set()
    banned: dict[int, set[int]] = defaultdict(set)
    mapping: dict[int, int] = {}

    def forbidden(state: int, action_idx: int) -> bool:
        if action_idx in banned.get(state, ()):
            return True
        action = task.actions[action_idx]
        return any(
            action.apply(state, k) in dead for k in range(len(action.outcomes))
        )

    for _ in range(_PRP_MAX_ROUNDS):
        # walk the policy graph from init, dropping entries that became
        # inapplicable or forbidden, and collecting unhandled states
        order = [task.init]
        seen = {task.init}
        open_states: list[int] = []
        i = 0
        while i < len(order):
            state = order[i]
            i += 1
            if task.is_goal(state):
                continue
            idx = mapping.get(state)
            if idx is None or not task.actions[idx].applicable(state) or forbidden(state, idx):
                mapping.pop(state, None)
                open_states.append(state)
                continue
            action = task.actions[idx]
            for k in range(len(action.outcomes)):
                succ = action.apply(state, k)
                if succ not in seen:
                    seen.add(succ)
                    order.append(succ)

        if not open_states:
            trapped = _trapped_states(task, mapping, order)
            if not trapped:
                return mapping
            for state in sorted(trapped):
                banned[state].add(mapping[state])
                del mapping[state]
            continue

        for state in sorted(open_states):
            if state in mapping or state in dead or task.is_goal(state):
                continue
            steps = plan(det, state, budget, forbidden, heuristic)
            if steps is None:
                dead.add(state)
            else:
                for plan_state, variant in steps:
                    if task.is_goal(plan_state) or plan_state in mapping:
                        continue
                    mapping[plan_state] = det.tags[variant][0]
        if task.init in dead:
            raise _PrpGiveUp(exact_unsolvable=not any(banned.values()))
    raise _PrpGiveUp(exact_unsolvable=False)


def _trapped_states(
    task: GroundedTask, mapping: dict[int, int], reachable: list[int]
) -> list[int]:
    """Mapped reachable states that cannot reach a goal via the policy."""
    can_reach = {s for s in reachable if task.is_goal(s)}
    grew = True
    while grew:
        grew = False
        for state in reachable:
            if state in can_reach or state not in mapping:
                continue
            action = task.actions[mapping[state]]
            if any(
                action.apply(state, k) in can_reach
                for k in range(len(action.outcomes))
            ):
                can_reach.add(state)
                grew = True
    return [s for s in reachable if s in mapping and s not in can_reach]


def solve(
    task: GroundedTask,
    semantics: str = "strong-cyclic",
    node_budget: int = DEFAULT_NODE_BUDGET,
    explicit_bound: int = DEFAULT_EXPLICIT_BOUND,
) -> Policy:
    """Produce a policy of the requested class, or raise Unsolvable.

    ``semantics`` is "strong" or "strong-cyclic".  The returned policy is
    trimmed to its reachable entries and carries the class assigned by the
    independent verifier (which may be stronger than requested).
    """
    if semantics not in ("strong", "strong-cyclic"):
        raise ValueError(f"unknown semantics {semantics!r}")
    budget = Budget(node_budget)

    if semantics == "strong":
        try:
            states = enumerate_reachable(task, explicit_bound, budget)
        except _TooBig:
            raise ResourceLimit("reachable state", explicit_bound) from None
        mapping = _strong_fixpoint(task, states)
        if mapping is None:
            raise Unsolvable("no strong policy exists")
    else:
        mapping = None
        give_up: _PrpGiveUp | None = None
        try:
            mapping = _prp_strong_cyclic(task, determinize(task), budget)
        except _PrpGiveUp as exc:
            give_up = exc
        if mapping is None:
            if give_up is not None and give_up.exact_unsolvable:
                raise Unsolvable("no strong-cyclic policy exists")
            try:
                states = enumerate_reachable(task, explicit_bound, budget)
            except _TooBig:
                raise ResourceLimit("reachable state", explicit_bound) from None
            mapping = _strong_cyclic_fixpoint(task, states)
            if mapping is None:
                raise Unsolvable("no strong-cyclic policy exists")

    mapping = _trim(task, mapping)
    policy = Policy(task, mapping)
    policy.solution_class = verify_policy(task, policy)
    requested = (
        SolutionClass.STRONG if semantics == "strong" else SolutionClass.STRONG_CYCLIC
    )
    if not policy.solution_class.at_least(requested):
        # incremental route produced something weaker than promised: fall
        # back to the exact fixpoint rather than hand back a bad policy
        try:
            states = enumerate_reachable(task, explicit_bound, budget)
        except _TooBig:
            raise ResourceLimit("reachable state", explicit_bound) from None
        exact = (
            _strong_fixpoint(task, states)
            if semantics == "strong"
            else _strong_cyclic_fixpoint(task, states)
        )
        if exact is None:
            raise Unsolvable(f"no {semantics} policy exists")
        policy = Policy(task, _trim(task, exact))
        policy.solution_class = verify_policy(task, policy)
    return policy
