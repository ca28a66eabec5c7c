"""Unfolding a policy into a branched plan tree.

The tree is rooted at the initial state, with one child edge per action
outcome.  Revisiting a state that is already on the path from the root is
rendered as a back-edge (cyclic retry), so the unfolding always terminates;
DepthExceeded fires only when an acyclic path outgrows the depth limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from clinicbot.pddl.ground import GroundedTask
from clinicbot.planning.policy import Policy


class DepthExceeded(Exception):
    def __init__(self, limit: int):
        super().__init__(f"acyclic unfolding exceeds depth limit {limit}")
        self.limit = limit


@dataclass
class PlanEdge:
    outcome: int
    target: int  # node id
    back: bool = False


@dataclass
class PlanNode:
    id: int
    state: int
    action: int | None  # index into task.actions; None at leaves
    goal: bool
    depth: int
    children: list[PlanEdge] = field(default_factory=list)


@dataclass
class BranchedPlan:
    task: GroundedTask
    root: int
    nodes: list[PlanNode]

    def node(self, node_id: int) -> PlanNode:
        return self.nodes[node_id]

    def branch_nodes(self) -> list[PlanNode]:
        """Nodes whose action has more than one outcome."""
        return [n for n in self.nodes if n.action is not None and len(n.children) > 1]


def unfold(task: GroundedTask, policy: Policy, depth_limit: int = 200) -> BranchedPlan:
    """Unfold ``policy`` from the task's initial state into a tree."""
    nodes: list[PlanNode] = []

    def new_node(state: int, depth: int) -> PlanNode:
        if depth > depth_limit:
            raise DepthExceeded(depth_limit)
        node = PlanNode(
            id=len(nodes),
            state=state,
            action=None,
            goal=task.is_goal(state),
            depth=depth,
        )
        nodes.append(node)
        return node

    root = new_node(task.init, 0)
    # (node, path) stack; path maps ancestor states to their node ids
    stack: list[tuple[PlanNode, dict[int, int]]] = [(root, {task.init: root.id})]
    while stack:
        node, path = stack.pop()
        if node.goal:
            continue
        idx = policy.mapping.get(node.state)
        if idx is None:
            continue  # open leaf (weak policies)
        node.action = idx
        action = task.actions[idx]
        for k in range(len(action.outcomes)):
            succ = action.apply(node.state, k)
            if succ in path:
                node.children.append(PlanEdge(outcome=k, target=path[succ], back=True))
                continue
            child = new_node(succ, node.depth + 1)
            node.children.append(PlanEdge(outcome=k, target=child.id))
            stack.append((child, {**path, succ: child.id}))
    return BranchedPlan(task=task, root=root.id, nodes=nodes)


def _outcome_label(task: GroundedTask, action_idx: int, outcome: int) -> str:
    action = task.actions[action_idx]
    add, delete = action.outcomes[outcome]
    parts = [str(a) for a in task.true_atoms(add)]
    parts += [f"(not {a})" for a in task.true_atoms(delete)]
    return " ".join(parts) if parts else "(no change)"


def plan_to_json(plan: BranchedPlan) -> dict:
    """Node/edge list for the operator console's plan view."""
    task = plan.task
    nodes = []
    for node in plan.nodes:
        action_name = None if node.action is None else task.actions[node.action].name
        nodes.append(
            {
                "id": node.id,
                "state": task.bitstring(node.state),
                "action": action_name,
                "goal": node.goal,
                "depth": node.depth,
                "children": [
                    {
                        "outcome": edge.outcome,
                        "to": edge.target,
                        "back": edge.back,
                        "label": (
                            _outcome_label(task, node.action, edge.outcome)
                            if node.action is not None
                            else ""
                        ),
                    }
                    for edge in node.children
                ],
            }
        )
    return {"root": plan.root, "nodes": nodes}
