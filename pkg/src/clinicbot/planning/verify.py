"""Independent policy classification by fixpoint analysis.

This module deliberately shares no code with the solver: it walks the
policy-reachable graph directly and classifies by definition:

- strong: every reachable non-goal state is mapped and the graph is acyclic
  (so every outcome path terminates in a goal state);
- strong-cyclic: every reachable non-goal state is mapped and every
  reachable state can still reach a goal state through the policy;
- weak: some outcome path from the initial state reaches a goal state;
- invalid: anything else, including a mapped state whose action
  precondition fails and a mapped goal state.
"""

from __future__ import annotations

from clinicbot.pddl.ground import GroundedTask
from clinicbot.planning.policy import Policy, SolutionClass


def verify_policy(task: GroundedTask, policy: Policy) -> SolutionClass:
    mapping = policy.mapping
    for state, idx in mapping.items():
        if task.is_goal(state):
            return SolutionClass.INVALID
        if idx < 0 or idx >= len(task.actions):
            return SolutionClass.INVALID
        if not task.actions[idx].applicable(state):
            return SolutionClass.INVALID

    # policy-reachable graph from init
    order = [task.init]
    seen = {task.init}
    edges: dict[int, list[int]] = {}
    i = 0
    while i < len(order):
        state = order[i]
        i += 1
        if task.is_goal(state) or state not in mapping:
            continue
        action = task.actions[mapping[state]]
        succs = [action.apply(state, k) for k in range(len(action.outcomes))]
        edges[state] = succs
        for succ in succs:
            if succ not in seen:
                seen.add(succ)
                order.append(succ)

    closed = all(task.is_goal(s) or s in mapping for s in order)

    # which reachable states can reach a goal state along policy edges
    can_reach = {s for s in order if task.is_goal(s)}
    grew = True
    while grew:
        grew = False
        for state, succs in edges.items():
            if state not in can_reach and any(s in can_reach for s in succs):
                can_reach.add(state)
                grew = True

    if closed and all(s in can_reach for s in order):
        if _acyclic(edges):
            return SolutionClass.STRONG
        return SolutionClass.STRONG_CYCLIC
    if task.init in can_reach:
        return SolutionClass.WEAK
    return SolutionClass.INVALID


def _acyclic(edges: dict[int, list[int]]) -> bool:
    WHITE, GREY, BLACK = 0, 1, 2
    colour: dict[int, int] = {}
    for root in edges:
        if colour.get(root, WHITE) != WHITE:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        colour[root] = GREY
        while stack:
            node, child = stack[-1]
            succs = edges.get(node, [])
            if child < len(succs):
                stack[-1] = (node, child + 1)
                nxt = succs[child]
                c = colour.get(nxt, WHITE)
                if c == GREY:
                    return False
                if c == WHITE and nxt in edges:
                    colour[nxt] = GREY
                    stack.append((nxt, 0))
            else:
                colour[node] = BLACK
                stack.pop()
    return True
