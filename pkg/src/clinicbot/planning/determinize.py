"""All-outcomes determinization.

Each k-outcome action becomes k deterministic variants tagged with the
original action index and the outcome index, so classical plans over the
variants translate directly back to policy entries.
"""

from __future__ import annotations

from dataclasses import dataclass

from clinicbot.pddl.ground import GroundAction, GroundedTask


@dataclass(frozen=True)
class Determinization:
    task: GroundedTask
    tags: tuple[tuple[int, int], ...]  # variant index -> (action index, outcome index)

    def variant_name(self, variant: int) -> str:
        return self.task.actions[variant].name

    def original(self, variant: int) -> tuple[int, int]:
        return self.tags[variant]


def determinize(task: GroundedTask) -> Determinization:
    """Split every outcome into its own deterministic action."""
    variants: list[GroundAction] = []
    tags: list[tuple[int, int]] = []
    for idx, action in enumerate(task.actions):
        for k, outcome in enumerate(action.outcomes):
            name = action.name if action.deterministic else f"{action.name} #{k}"
            variants.append(
                GroundAction(
                    name=name,
                    schema_name=action.schema_name,
                    binding=action.binding,
                    pre_pos=action.pre_pos,
                    pre_neg=action.pre_neg,
                    outcomes=(outcome,),
                    group=action.group,
                    param_names=action.param_names,
                )
            )
            tags.append((idx, k))
    det_task = GroundedTask(
        fluents=task.fluents,
        init=task.init,
        goal_pos=task.goal_pos,
        goal_neg=task.goal_neg,
        actions=tuple(variants),
        domain_name=task.domain_name,
        problem_name=task.problem_name,
        objects=task.objects,
    )
    return Determinization(det_task, tuple(tags))
