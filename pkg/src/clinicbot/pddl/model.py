"""Abstract domain/problem model for the planning dialect.

The dialect is typed STRIPS with negative preconditions plus a ``oneof``
effect construct for non-deterministic actions.  Identifiers are
case-insensitive and normalised to lower case.  Conditional effects,
quantifiers and numeric fluents are rejected at parse time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class PddlError(Exception):
    """Base class for frontend errors."""


class PddlSyntaxError(PddlError):
    """Malformed input text; carries the source position and expectation."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class PddlSemanticError(PddlError):
    """Well-formed text violating a static rule (types, arities, scopes)."""


class MismatchedDomainError(PddlError):
    """Problem names a domain other than the one it is grounded against."""


class ActionGroup(enum.Enum):
    """Interaction role of an action; set via a ``;; @group:`` annotation."""

    ROBOT_BEHAVIOUR = "robot-behaviour"
    PROCEDURE_UPDATE = "procedure-update"
    IMPLICIT_SIGNAL = "implicit-signal"
    EXPLICIT_QUERY = "explicit-query"


DEFAULT_GROUP = ActionGroup.ROBOT_BEHAVIOUR


@dataclass(frozen=True, order=True)
class Atom:
    """A predicate applied to terms (variables start with ``?``)."""

    pred: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return f"({self.pred})"
        return f"({self.pred} {' '.join(self.args)})"

    @property
    def is_ground(self) -> bool:
        return not any(a.startswith("?") for a in self.args)

    def substitute(self, binding: dict[str, str]) -> "Atom":
        return Atom(self.pred, tuple(binding.get(a, a) for a in self.args))


@dataclass(frozen=True, order=True)
class Literal:
    """An atom or its negation."""

    atom: Atom
    negated: bool = False

    def __str__(self) -> str:
        return f"(not {self.atom})" if self.negated else str(self.atom)

    def substitute(self, binding: dict[str, str]) -> "Literal":
        return Literal(self.atom.substitute(binding), self.negated)


@dataclass(frozen=True)
class Predicate:
    name: str
    params: tuple[tuple[str, str], ...]  # (variable, type) pairs

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionSchema:
    """A lifted action: precondition plus one effect set per outcome.

    A single outcome means the action is deterministic; ``oneof`` effects
    contribute one outcome per alternative, in declaration order.
    """

    name: str
    params: tuple[tuple[str, str], ...]
    precondition: tuple[Literal, ...]
    outcomes: tuple[tuple[Literal, ...], ...]
    group: ActionGroup = DEFAULT_GROUP

    @property
    def deterministic(self) -> bool:
        return len(self.outcomes) == 1


@dataclass(frozen=True)
class DomainModel:
    name: str
    types: tuple[tuple[str, str | None], ...]  # (type, parent); object has None
    predicates: tuple[Predicate, ...]
    actions: tuple[ActionSchema, ...]
    requirements: tuple[str, ...] = ()

    def predicate(self, name: str) -> Predicate | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None

    def type_names(self) -> set[str]:
        return {t for t, _ in self.types}

    def ancestors(self, typ: str) -> list[str]:
        """The type itself followed by its chain of parents up to object."""
        parents = dict(self.types)
        chain = [typ]
        while parents.get(chain[-1]) is not None:
            chain.append(parents[chain[-1]])  # type: ignore[arg-type]
        return chain


@dataclass(frozen=True)
class ProblemModel:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]  # (object, type), declaration order
    init: tuple[Atom, ...]  # deduplicated, declaration order
    goal: tuple[Literal, ...]

    def objects_of(self, domain: DomainModel, typ: str) -> list[str]:
        """Objects whose declared type is ``typ`` or a descendant of it."""
        return [o for o, t in self.objects if typ in domain.ancestors(t)]


def check_domain(domain: DomainModel) -> None:
    """Raise PddlSemanticError on a model violating the static invariants."""
    declared = {"object": None}
    for typ, parent in domain.types:
        if typ in declared and typ != "object":
            raise PddlSemanticError(f"type {typ!r} declared twice")
        declared[typ] = parent
    for typ, parent in domain.types:
        if parent is not None and parent not in declared:
            raise PddlSemanticError(f"type {typ!r} has undeclared parent {parent!r}")
    # the hierarchy must be a forest rooted at object
    for typ in declared:
        seen = set()
        cur: str | None = typ
        while cur is not None:
            if cur in seen:
                raise PddlSemanticError(f"type hierarchy cycle through {typ!r}")
            seen.add(cur)
            cur = declared.get(cur)
        if "object" not in seen:
            raise PddlSemanticError(f"type {typ!r} does not descend from object")

    preds: dict[str, Predicate] = {}
    for pred in domain.predicates:
        if pred.name in preds:
            raise PddlSemanticError(f"predicate {pred.name!r} declared twice")
        for _, typ in pred.params:
            if typ not in declared:
                raise PddlSemanticError(
                    f"predicate {pred.name!r} uses undeclared type {typ!r}"
                )
        preds[pred.name] = pred

    names = set()
    for action in domain.actions:
        if action.name in names:
            raise PddlSemanticError(f"action {action.name!r} declared twice")
        names.add(action.name)
        scope = {}
        for var, typ in action.params:
            if not var.startswith("?"):
                raise PddlSemanticError(f"{action.name}: parameter {var!r} is not a variable")
            if var in scope:
                raise PddlSemanticError(f"{action.name}: duplicate parameter {var!r}")
            if typ not in declared:
                raise PddlSemanticError(f"{action.name}: undeclared type {typ!r}")
            scope[var] = typ
        for lit in action.precondition:
            _check_literal(domain, action.name, lit, preds, scope)
        if not action.outcomes:
            raise PddlSemanticError(f"{action.name}: action has no outcomes")
        for outcome in action.outcomes:
            for lit in outcome:
                _check_literal(domain, action.name, lit, preds, scope)


def _check_literal(
    domain: DomainModel,
    owner: str,
    lit: Literal,
    preds: dict[str, Predicate],
    scope: dict[str, str],
) -> None:
    atom = lit.atom
    if atom.pred not in preds:
        raise PddlSemanticError(f"{owner}: undeclared predicate {atom.pred!r}")
    if len(atom.args) != preds[atom.pred].arity:
        raise PddlSemanticError(
            f"{owner}: {atom.pred!r} expects {preds[atom.pred].arity} arguments,"
            f" got {len(atom.args)}"
        )
    for arg, (_, want) in zip(atom.args, preds[atom.pred].params):
        if not arg.startswith("?"):
            continue  # domain constants are not part of the dialect
        if arg not in scope:
            raise PddlSemanticError(f"{owner}: unbound variable {arg!r}")
        if want not in domain.ancestors(scope[arg]):
            raise PddlSemanticError(
                f"{owner}: variable {arg!r} of type {scope[arg]!r}"
                f" where {atom.pred!r} expects {want!r}"
            )


def check_problem(problem: ProblemModel, domain: DomainModel) -> None:
    """Static checks that need the domain: object types, init/goal atoms."""
    declared = domain.type_names() | {"object"}
    obj_types: dict[str, str] = {}
    for obj, typ in problem.objects:
        if typ not in declared:
            raise PddlSemanticError(f"object {obj!r} has undeclared type {typ!r}")
        if obj in obj_types:
            raise PddlSemanticError(f"object {obj!r} declared twice")
        obj_types[obj] = typ

    def check_ground_atom(atom: Atom, where: str) -> None:
        pred = domain.predicate(atom.pred)
        if pred is None:
            raise PddlSemanticError(f"{where}: undeclared predicate {atom.pred!r}")
        if len(atom.args) != pred.arity:
            raise PddlSemanticError(
                f"{where}: {atom.pred!r} expects {pred.arity} arguments,"
                f" got {len(atom.args)}"
            )
        for arg, (_, typ) in zip(atom.args, pred.params):
            if arg not in obj_types:
                raise PddlSemanticError(f"{where}: unknown object {arg!r}")
            if typ not in domain.ancestors(obj_types[arg]):
                raise PddlSemanticError(
                    f"{where}: object {arg!r} of type {obj_types[arg]!r}"
                    f" is not a {typ!r}"
                )

    for atom in problem.init:
        if not atom.is_ground:
            raise PddlSemanticError(f"init atom {atom} is not ground")
        check_ground_atom(atom, "init")
    for lit in problem.goal:
        if not lit.atom.is_ground:
            raise PddlSemanticError(f"goal literal {lit} is not ground")
        check_ground_atom(lit.atom, "goal")
