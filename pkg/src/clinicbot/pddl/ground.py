"""Grounding: instantiate schemas over all type-consistent object bindings.

States are integer bitmasks over a fixed fluent ordering (predicates in
declaration order, bindings in object declaration order), which keeps every
downstream artifact byte-stable across runs.  No reachability pruning is
applied: the fluent universe and action list are the full enumerations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from clinicbot.pddl.model import (
    ActionGroup,
    Atom,
    DomainModel,
    Literal,
    MismatchedDomainError,
    ProblemModel,
    check_problem,
)


@dataclass(frozen=True)
class GroundAction:
    """An instantiated schema: masks over the task's fluent universe."""

    name: str  # canonical "schema obj1 obj2 ..."
    schema_name: str
    binding: tuple[str, ...]
    pre_pos: int
    pre_neg: int
    outcomes: tuple[tuple[int, int], ...]  # (add_mask, del_mask) per outcome
    group: ActionGroup
    param_names: tuple[str, ...] = ()

    def substitution(self) -> dict[str, str]:
        """Schema variable to bound object, e.g. {"?p": "prep"}."""
        return dict(zip(self.param_names, self.binding))

    @property
    def deterministic(self) -> bool:
        return len(self.outcomes) == 1

    def applicable(self, state: int) -> bool:
        return (state & self.pre_pos) == self.pre_pos and not (state & self.pre_neg)

    def apply(self, state: int, outcome: int) -> int:
        add, delete = self.outcomes[outcome]
        return (state & ~delete) | add

    def touched_mask(self) -> int:
        mask = 0
        for add, delete in self.outcomes:
            mask |= add | delete
        return mask


@dataclass(frozen=True)
class GroundedTask:
    """The finite task: fluent universe, full init, partial goal, actions."""

    fluents: tuple[Atom, ...]
    init: int
    goal_pos: int
    goal_neg: int
    actions: tuple[GroundAction, ...]
    domain_name: str
    problem_name: str
    objects: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {atom: i for i, atom in enumerate(self.fluents)}
        )
        object.__setattr__(
            self, "_by_name", {a.name: i for i, a in enumerate(self.actions)}
        )

    # -- fluent lookups ------------------------------------------------

    @property
    def fluent_names(self) -> list[str]:
        return [str(atom) for atom in self.fluents]

    def fluent_index(self, atom: Atom) -> int:
        try:
            return self._index[atom]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"unknown fluent {atom}") from None

    def has_fluent(self, atom: Atom) -> bool:
        return atom in self._index  # type: ignore[attr-defined]

    def action_index(self, name: str) -> int:
        try:
            return self._by_name[name]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"unknown ground action {name!r}") from None

    # -- state helpers ---------------------------------------------------

    def is_goal(self, state: int) -> bool:
        return (state & self.goal_pos) == self.goal_pos and not (state & self.goal_neg)

    def bitstring(self, state: int) -> str:
        return "".join("1" if state >> i & 1 else "0" for i in range(len(self.fluents)))

    def state_from_bitstring(self, bits: str) -> int:
        if len(bits) != len(self.fluents) or set(bits) - {"0", "1"}:
            raise ValueError("bitstring does not match the fluent universe")
        return sum(1 << i for i, b in enumerate(bits) if b == "1")

    def true_atoms(self, state: int) -> list[Atom]:
        return [a for i, a in enumerate(self.fluents) if state >> i & 1]

    def mask_of(self, atoms: list[Atom]) -> int:
        mask = 0
        for atom in atoms:
            mask |= 1 << self.fluent_index(atom)
        return mask


def _objects_by_type(domain: DomainModel, problem: ProblemModel) -> dict[str, list[str]]:
    by_type: dict[str, list[str]] = {t: [] for t, _ in domain.types}
    by_type.setdefault("object", [])
    for obj, typ in problem.objects:
        for ancestor in domain.ancestors(typ):
            by_type.setdefault(ancestor, []).append(obj)
    return by_type


def _literal_masks(
    literals: tuple[Literal, ...],
    binding: dict[str, str],
    index: dict[Atom, int],
) -> tuple[int, int]:
    pos = neg = 0
    for lit in literals:
        bit = 1 << index[lit.atom.substitute(binding)]
        if lit.negated:
            neg |= bit
        else:
            pos |= bit
    return pos, neg


def ground(domain: DomainModel, problem: ProblemModel) -> GroundedTask:
    """Ground a domain/problem pair into a :class:`GroundedTask`.

    Raises MismatchedDomainError when the problem names another domain,
    and PddlSemanticError for init/goal atoms outside the universe.
    """
    if problem.domain_name != domain.name:
        raise MismatchedDomainError(
            f"problem {problem.name!r} is for domain {problem.domain_name!r},"
            f" not {domain.name!r}"
        )
    check_problem(problem, domain)
    by_type = _objects_by_type(domain, problem)

    fluents: list[Atom] = []
    for pred in domain.predicates:
        pools = [by_type.get(typ, []) for _, typ in pred.params]
        for combo in product(*pools):
            fluents.append(Atom(pred.name, combo))
    index = {atom: i for i, atom in enumerate(fluents)}

    init = 0
    for atom in problem.init:
        init |= 1 << index[atom]
    goal_pos = goal_neg = 0
    for lit in problem.goal:
        bit = 1 << index[lit.atom]
        if lit.negated:
            goal_neg |= bit
        else:
            goal_pos |= bit

    actions: list[GroundAction] = []
    for schema in domain.actions:
        pools = [by_type.get(typ, []) for _, typ in schema.params]
        names = [var for var, _ in schema.params]
        for combo in product(*pools):
            binding = dict(zip(names, combo))
            pre_pos, pre_neg = _literal_masks(schema.precondition, binding, index)
            outcomes = []
            for outcome in schema.outcomes:
                add, delete = _literal_masks(outcome, binding, index)
                # a binding may collapse an add and a delete onto one atom;
                # the add wins, keeping the outcome internally consistent
                outcomes.append((add, delete & ~add))
            name = " ".join([schema.name, *combo])
            actions.append(
                GroundAction(
                    name=name,
                    schema_name=schema.name,
                    binding=combo,
                    pre_pos=pre_pos,
                    pre_neg=pre_neg,
                    outcomes=tuple(outcomes),
                    group=schema.group,
                    param_names=tuple(names),
                )
            )

    return GroundedTask(
        fluents=tuple(fluents),
        init=init,
        goal_pos=goal_pos,
        goal_neg=goal_neg,
        actions=tuple(actions),
        domain_name=domain.name,
        problem_name=problem.name,
        objects=problem.objects,
    )
