"""Typed-STRIPS frontend: parsing, canonical printing, grounding."""

from clinicbot.pddl.model import (
    ActionGroup,
    ActionSchema,
    Atom,
    DomainModel,
    Literal,
    MismatchedDomainError,
    PddlError,
    PddlSemanticError,
    PddlSyntaxError,
    Predicate,
    ProblemModel,
)
from clinicbot.pddl.parser import parse_domain, parse_problem
from clinicbot.pddl.printer import print_domain, print_problem
from clinicbot.pddl.ground import GroundAction, GroundedTask, ground

__all__ = [
    "ActionGroup",
    "ActionSchema",
    "Atom",
    "DomainModel",
    "GroundAction",
    "GroundedTask",
    "Literal",
    "MismatchedDomainError",
    "PddlError",
    "PddlSemanticError",
    "PddlSyntaxError",
    "Predicate",
    "ProblemModel",
    "ground",
    "parse_domain",
    "parse_problem",
    "print_domain",
    "print_problem",
]
