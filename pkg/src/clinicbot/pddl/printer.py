"""Canonical pretty-printer; output reparses to a structurally equal model.

The format is stable: one predicate/action section per line group, literals
in declaration order, group annotations always emitted.  ``print(parse(t))``
is a fixpoint, which the round-trip tests rely on.
"""

from __future__ import annotations

from clinicbot.pddl.model import (
    ActionSchema,
    DomainModel,
    Literal,
    ProblemModel,
)


def _typed_list(pairs: tuple[tuple[str, str], ...]) -> str:
    return " ".join(f"{name} - {typ}" for name, typ in pairs)


def _conjunction(literals: tuple[Literal, ...]) -> str:
    if not literals:
        return "(and)"
    return "(and " + " ".join(str(lit) for lit in literals) + ")"


def _effect(outcomes: tuple[tuple[Literal, ...], ...]) -> str:
    if len(outcomes) == 1:
        return _conjunction(outcomes[0])
    return "(oneof " + " ".join(_conjunction(o) for o in outcomes) + ")"


def _action(schema: ActionSchema) -> str:
    lines = [
        f"  ;; @group: {schema.group.value}",
        f"  (:action {schema.name}",
        f"    :parameters ({_typed_list(schema.params)})",
        f"    :precondition {_conjunction(schema.precondition)}",
        f"    :effect {_effect(schema.outcomes)})",
    ]
    return "\n".join(lines)


def print_domain(domain: DomainModel) -> str:
    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append(f"  (:requirements {' '.join(domain.requirements)})")
    declared = [(t, p) for t, p in domain.types if t != "object"]
    if declared:
        lines.append(f"  (:types {_typed_list([(t, p or 'object') for t, p in declared])})")
    if domain.predicates:
        lines.append("  (:predicates")
        for pred in domain.predicates:
            sig = f" {_typed_list(pred.params)}" if pred.params else ""
            lines.append(f"    ({pred.name}{sig})")
        lines[-1] += ")"
    for schema in domain.actions:
        lines.append(_action(schema))
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_problem(problem: ProblemModel) -> str:
    lines = [
        f"(define (problem {problem.name})",
        f"  (:domain {problem.domain_name})",
    ]
    if problem.objects:
        lines.append(f"  (:objects {_typed_list(problem.objects)})")
    if problem.init:
        lines.append("  (:init " + " ".join(str(a) for a in problem.init) + ")")
    else:
        lines.append("  (:init)")
    lines.append(f"  (:goal {_conjunction(problem.goal)})")
    lines.append(")")
    return "\n".join(lines) + "\n"
