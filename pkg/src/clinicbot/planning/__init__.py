"""Non-deterministic planning: solve, verify, unfold, serialize."""

from clinicbot.planning.determinize import Determinization, determinize
from clinicbot.planning.plan_tree import BranchedPlan, DepthExceeded, plan_to_json, unfold
from clinicbot.planning.policy import (
    Budget,
    PlanningError,
    Policy,
    ResourceLimit,
    SolutionClass,
    Unsolvable,
)
from clinicbot.planning.serialize import (
    dumps_policy,
    loads_policy,
    policy_from_json,
    policy_to_json,
)
from clinicbot.planning.solver import solve
from clinicbot.planning.verify import verify_policy

__all__ = [
    "BranchedPlan",
    "Budget",
    "Determinization",
    "DepthExceeded",
    "PlanningError",
    "Policy",
    "ResourceLimit",
    "SolutionClass",
    "Unsolvable",
    "determinize",
    "dumps_policy",
    "loads_policy",
    "plan_to_json",
    "policy_from_json",
    "policy_to_json",
    "solve",
    "unfold",
    "verify_policy",
]
