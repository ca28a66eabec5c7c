"""Policy and solution-class types shared across the planning stack."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from clinicbot.pddl.ground import GroundedTask


class SolutionClass(enum.Enum):
    """Standard containment order: strong < strong-cyclic < weak < invalid."""

    STRONG = "strong"
    STRONG_CYCLIC = "strong-cyclic"
    WEAK = "weak"
    INVALID = "invalid"

    @property
    def rank(self) -> int:
        return _RANKS[self]

    def at_least(self, other: "SolutionClass") -> bool:
        """True when self is at least as strong as ``other``."""
        return self.rank <= other.rank


_RANKS = {
    SolutionClass.STRONG: 0,
    SolutionClass.STRONG_CYCLIC: 1,
    SolutionClass.WEAK: 2,
    SolutionClass.INVALID: 3,
}


class PlanningError(Exception):
    pass


class Unsolvable(PlanningError):
    """No policy of the requested class exists."""


class ResourceLimit(PlanningError):
    """State/node budget exceeded; carries the budget that was exhausted."""

    def __init__(self, what: str, budget: int):
        super().__init__(f"{what} budget of {budget} exceeded")
        self.what = what
        self.budget = budget


@dataclass
class Policy:
    """A state-to-action mapping over a grounded task.

    Keys are canonical state masks, values indices into ``task.actions``.
    Goal states are never mapped.
    """

    task: GroundedTask
    mapping: dict[int, int] = field(default_factory=dict)
    solution_class: SolutionClass = SolutionClass.INVALID

    def action_at(self, state: int):
        idx = self.mapping.get(state)
        return None if idx is None else self.task.actions[idx]

    def __len__(self) -> int:
        return len(self.mapping)


class Budget:
    """Mutable expansion counter shared across one solve call."""

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, amount: int = 1) -> None:
        self.used += amount
        if self.used > self.limit:
            raise ResourceLimit("node expansion", self.limit)
