"""Classical forward search over a determinized task.

Uniform-cost search guided by an additive delete-relaxation heuristic.
The heuristic ignores negative preconditions (standard for the relaxation)
and is used only for ordering, so plans are first-found-valid rather than
optimal.  Tie-breaks are insertion-ordered, which keeps search runs
deterministic for identical inputs.
"""

from __future__ import annotations

import heapq
from typing import Callable

from clinicbot.planning.determinize import Determinization
from clinicbot.planning.policy import Budget

_INF = float("inf")


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class AdditiveHeuristic:
    """h_add: summed relaxed-reachability costs of the goal atoms."""

    def __init__(self, det: Determinization):
        task = det.task
        self.n_fluents = len(task.fluents)
        self.goal = list(_bits(task.goal_pos))
        self.pre: list[list[int]] = []
        self.add: list[list[int]] = []
        for action in task.actions:
            self.pre.append(list(_bits(action.pre_pos)))
            self.add.append(list(_bits(action.outcomes[0][0])))

    def __call__(self, state: int) -> float:
        cost = [0.0 if state >> i & 1 else _INF for i in range(self.n_fluents)]
        changed = True
        while changed:
            changed = False
            for pre, add in zip(self.pre, self.add):
                total = 1.0
                for p in pre:
                    c = cost[p]
                    if c == _INF:
                        total = _INF
                        break
                    total += c
                if total == _INF:
                    continue
                for a in add:
                    if total < cost[a]:
                        cost[a] = total
                        changed = True
        return sum(cost[g] for g in self.goal)


def plan(
    det: Determinization,
    start: int,
    budget: Budget,
    forbidden: Callable[[int, int], bool] | None = None,
    heuristic: AdditiveHeuristic | None = None,
) -> list[tuple[int, int]] | None:
    """Search for a variant sequence from ``start`` to the goal.

    Returns [(state, variant_index), ...] along the plan, or None when no
    plan exists.  ``forbidden(state, original_action_index)`` vetoes every
    variant of that action at that state.
    """
    task = det.task
    if task.is_goal(start):
        return []
    h_raw = heuristic if heuristic is not None else AdditiveHeuristic(det)
    h_memo: dict[int, float] = {}

    def h(state: int) -> float:
        val = h_memo.get(state)
        if val is None:
            val = h_raw(state)
            h_memo[state] = val
        return val

    h0 = h(start)
    if h0 == _INF:
        return None
    open_heap: list[tuple[float, int, int, int]] = [(h0, 0, 0, start)]
    g_cost = {start: 0}
    parent: dict[int, tuple[int, int]] = {}
    seq = 0
    while open_heap:
        _, _, g, state = heapq.heappop(open_heap)
        if g > g_cost.get(state, _INF):
            continue  # superseded entry
        budget.spend()
        if task.is_goal(state):
            steps: list[tuple[int, int]] = []
            cur = state
            while cur in parent:
                prev, variant = parent[cur]
                steps.append((prev, variant))
                cur = prev
            steps.reverse()
            return steps
        for vidx, action in enumerate(task.actions):
            if not action.applicable(state):
                continue
            if forbidden is not None and forbidden(state, det.tags[vidx][0]):
                continue
            succ = action.apply(state, 0)
            new_g = g + 1
            if g_cost.get(succ, _INF) <= new_g:
                continue
            hv = h(succ)
            if hv == _INF:
                continue
            g_cost[succ] = new_g
            parent[succ] = (state, vidx)
            seq += 1
            heapq.heappush(open_heap, (new_g + hv, seq, new_g, succ))
    return None
