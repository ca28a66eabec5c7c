"""Recursive-descent parser for the planning dialect.

Grammar (EBNF sketch)::

    domain   := "(define (domain NAME)" requirements? types? predicates? action* ")"
    action   := "(:action NAME :parameters (typed-vars)
                          :precondition PRE :effect EFF)"
    PRE      := "(and lit*)" | lit
    EFF      := "(and lit*)" | "(oneof EFF EFF+)" | lit
    lit      := atom | "(not atom)"
    problem  := "(define (problem NAME) (:domain NAME)
                          (:objects typed-consts) (:init atom*) (:goal PRE))"

Comments run from ``;`` to end of line.  A structured comment of the form
``;; @group: robot-behaviour`` immediately before an action assigns its
interaction group; the default group is robot-behaviour.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from clinicbot.pddl.model import (
    ActionGroup,
    ActionSchema,
    Atom,
    DEFAULT_GROUP,
    DomainModel,
    Literal,
    PddlSemanticError,
    PddlSyntaxError,
    Predicate,
    ProblemModel,
    check_domain,
    check_problem,
)

_GROUP_RE = re.compile(r"@group:\s*([a-z-]+)")


@dataclass(frozen=True)
class _Token:
    text: str  # "(", ")", or a symbol (lower-cased)
    line: int
    col: int


@dataclass
class _Node:
    """S-expression node: either a symbol leaf or a list, with position."""

    line: int
    col: int
    symbol: str | None = None
    items: list["_Node"] | None = None
    group_hint: ActionGroup | None = None  # annotation attached to a list node

    @property
    def is_list(self) -> bool:
        return self.items is not None


def _tokenize(text: str) -> tuple[list[_Token], dict[int, ActionGroup]]:
    """Tokens plus a map from token index to a preceding @group annotation."""
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    pending_group: ActionGroup | None = None
    group_slots: dict[int, ActionGroup] = {}
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            end = text.find("\n", i)
            comment = text[i:] if end < 0 else text[i:end]
            m = _GROUP_RE.search(comment)
            if m:
                try:
                    pending_group = ActionGroup(m.group(1))
                except ValueError:
                    raise PddlSemanticError(
                        f"unknown action group {m.group(1)!r} at line {line}"
                    ) from None
            i = n if end < 0 else end
        elif ch in "()":
            if pending_group is not None and ch == "(":
                group_slots[len(tokens)] = pending_group
                pending_group = None
            tokens.append(_Token(ch, line, col))
            col += 1
            i += 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            tokens.append(_Token(text[i:j].lower(), line, col))
            col += j - i
            i = j
    tokens.append(_Token("", line, col))  # end marker
    return tokens, group_slots


class _Reader:
    def __init__(self, text: str):
        self.tokens, self.group_slots = _tokenize(text)
        self.pos = 0

    def _peek(self) -> _Token:
        return self.tokens[self.pos]

    def read(self) -> _Node:
        tok = self._peek()
        if tok.text == "":
            raise PddlSyntaxError("unexpected end of input", tok.line, tok.col)
        if tok.text == ")":
            raise PddlSyntaxError("unexpected ')'", tok.line, tok.col)
        if tok.text == "(":
            group = self.group_slots.get(self.pos)
            self.pos += 1
            items: list[_Node] = []
            while True:
                nxt = self._peek()
                if nxt.text == "":
                    raise PddlSyntaxError(
                        "unexpected end of input, expected ')'", nxt.line, nxt.col
                    )
                if nxt.text == ")":
                    self.pos += 1
                    break
                items.append(self.read())
            node = _Node(tok.line, tok.col, items=items)
            node.group_hint = group
            return node
        self.pos += 1
        return _Node(tok.line, tok.col, symbol=tok.text)

    def expect_end(self) -> None:
        tok = self._peek()
        if tok.text != "":
            raise PddlSyntaxError(
                f"trailing content {tok.text!r} after top-level form", tok.line, tok.col
            )


def _err(node: _Node, message: str) -> PddlSyntaxError:
    return PddlSyntaxError(message, node.line, node.col)


def _head(node: _Node) -> str:
    if not node.is_list or not node.items or node.items[0].symbol is None:
        return ""
    return node.items[0].symbol


def _symbol(node: _Node, what: str) -> str:
    if node.symbol is None:
        raise _err(node, f"expected {what}")
    return node.symbol


def _parse_typed_list(nodes: list[_Node], what: str) -> list[tuple[str, str]]:
    """Parse ``a b - t c - u d`` into (name, type) pairs; untyped -> object."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(nodes):
        sym = _symbol(nodes[i], f"{what} name")
        if sym == "-":
            if not pending:
                raise _err(nodes[i], f"dangling '-' in {what} list")
            if i + 1 >= len(nodes):
                raise _err(nodes[i], f"missing type after '-' in {what} list")
            typ = _symbol(nodes[i + 1], "type name")
            out.extend((name, typ) for name in pending)
            pending = []
            i += 2
        else:
            pending.append(sym)
            i += 1
    out.extend((name, "object") for name in pending)
    return out


def _parse_atom(node: _Node) -> Atom:
    if not node.is_list or not node.items:
        raise _err(node, "expected an atom")
    pred = _symbol(node.items[0], "predicate name")
    if pred in ("and", "or", "not", "oneof", "forall", "exists", "when", "="):
        raise _err(node, f"expected an atom, found {pred!r}")
    args = tuple(_symbol(a, "term") for a in node.items[1:])
    return Atom(pred, args)


def _parse_literal(node: _Node) -> Literal:
    if _head(node) == "not":
        if len(node.items) != 2:  # type: ignore[arg-type]
            raise _err(node, "'not' takes exactly one atom")
        return Literal(_parse_atom(node.items[1]), negated=True)  # type: ignore[index]
    return Literal(_parse_atom(node))


def _parse_literal_conjunction(node: _Node) -> tuple[Literal, ...]:
    if _head(node) == "and":
        return tuple(_parse_literal(item) for item in node.items[1:])  # type: ignore[index]
    return (_parse_literal(node),)


def _parse_effect(node: _Node) -> tuple[tuple[Literal, ...], ...]:
    """Flatten an effect into its outcome list (one literal set each)."""
    head = _head(node)
    if head == "oneof":
        alts = node.items[1:]  # type: ignore[index]
        if len(alts) < 2:
            raise _err(node, "'oneof' needs at least two alternatives")
        outcomes: list[tuple[Literal, ...]] = []
        for alt in alts:
            outcomes.extend(_parse_effect(alt))
        return tuple(outcomes)
    if head in ("when", "forall", "exists"):
        raise _err(node, f"{head!r} effects are not supported")
    if head == "and":
        for item in node.items[1:]:  # type: ignore[index]
            if _head(item) in ("oneof", "when", "forall", "exists"):
                raise _err(item, f"{_head(item)!r} is not allowed inside 'and'")
        return (_parse_literal_conjunction(node),)
    return ((_parse_literal(node),),)


def _parse_action(node: _Node) -> ActionSchema:
    items = node.items or []
    if len(items) < 2 or items[1].symbol is None:
        raise _err(node, "expected action name after :action")
    name = items[1].symbol
    sections: dict[str, _Node] = {}
    i = 2
    while i < len(items):
        key = items[i].symbol
        if key is None or not key.startswith(":"):
            raise _err(items[i], "expected :parameters, :precondition or :effect")
        if i + 1 >= len(items):
            raise _err(items[i], f"missing value after {key}")
        if key not in (":parameters", ":precondition", ":effect"):
            raise _err(items[i], f"unsupported action section {key!r}")
        if key in sections:
            raise _err(items[i], f"duplicate section {key!r}")
        sections[key] = items[i + 1]
        i += 2
    for required in (":parameters", ":precondition", ":effect"):
        if required not in sections:
            raise _err(node, f"action {name!r} is missing {required}")
    pnode = sections[":parameters"]
    if not pnode.is_list:
        raise _err(pnode, "expected a parameter list")
    params = tuple(_parse_typed_list(pnode.items or [], "parameter"))
    precondition = _parse_literal_conjunction(sections[":precondition"])
    outcomes = _parse_effect(sections[":effect"])
    group = node.group_hint or DEFAULT_GROUP
    return ActionSchema(name, params, precondition, outcomes, group)


def parse_domain(text: str) -> DomainModel:
    """Parse domain text into a checked :class:`DomainModel`."""
    reader = _Reader(text)
    root = reader.read()
    reader.expect_end()
    items = root.items or []
    if _head(root) != "define" or len(items) < 2 or _head(items[1]) != "domain":
        raise _err(root, "expected (define (domain NAME) ...)")
    dom_decl = items[1].items or []
    if len(dom_decl) != 2 or dom_decl[1].symbol is None:
        raise _err(items[1], "expected (domain NAME)")
    name = dom_decl[1].symbol

    requirements: tuple[str, ...] = ()
    types: list[tuple[str, str | None]] = [("object", None)]
    predicates: list[Predicate] = []
    actions: list[ActionSchema] = []
    for section in items[2:]:
        head = _head(section)
        if head == ":requirements":
            requirements = tuple(
                _symbol(it, "requirement") for it in section.items[1:]  # type: ignore[index]
            )
        elif head == ":types":
            for typ, parent in _parse_typed_list(section.items[1:], "type"):  # type: ignore[index]
                if typ != "object":
                    types.append((typ, parent))
        elif head == ":predicates":
            for pnode in section.items[1:]:  # type: ignore[index]
                if not pnode.is_list or not pnode.items:
                    raise _err(pnode, "expected a predicate declaration")
                pname = _symbol(pnode.items[0], "predicate name")
                pparams = tuple(_parse_typed_list(pnode.items[1:], "parameter"))
                predicates.append(Predicate(pname, pparams))
        elif head == ":action":
            actions.append(_parse_action(section))
        else:
            raise _err(section, f"unsupported domain section {head or '(...)'!r}")

    model = DomainModel(name, tuple(types), tuple(predicates), tuple(actions), requirements)
    check_domain(model)
    return model


def parse_problem(text: str) -> ProblemModel:
    """Parse problem text into a :class:`ProblemModel`.

    Domain-dependent checks (object types, init/goal atoms) run at
    grounding time, once the domain is known.
    """
    reader = _Reader(text)
    root = reader.read()
    reader.expect_end()
    items = root.items or []
    if _head(root) != "define" or len(items) < 2 or _head(items[1]) != "problem":
        raise _err(root, "expected (define (problem NAME) ...)")
    decl = items[1].items or []
    if len(decl) != 2 or decl[1].symbol is None:
        raise _err(items[1], "expected (problem NAME)")
    name = decl[1].symbol

    domain_name: str | None = None
    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    seen_init: set[Atom] = set()
    goal: tuple[Literal, ...] = ()
    for section in items[2:]:
        head = _head(section)
        if head == ":domain":
            if len(section.items) != 2:  # type: ignore[arg-type]
                raise _err(section, "expected (:domain NAME)")
            domain_name = _symbol(section.items[1], "domain name")  # type: ignore[index]
        elif head == ":objects":
            objects = _parse_typed_list(section.items[1:], "object")  # type: ignore[index]
        elif head == ":init":
            for atom_node in section.items[1:]:  # type: ignore[index]
                atom = _parse_atom(atom_node)
                if atom not in seen_init:
                    seen_init.add(atom)
                    init.append(atom)
        elif head == ":goal":
            if len(section.items) != 2:  # type: ignore[arg-type]
                raise _err(section, "expected (:goal FORM)")
            goal = _parse_literal_conjunction(section.items[1])  # type: ignore[index]
        else:
            raise _err(section, f"unsupported problem section {head or '(...)'!r}")
    if domain_name is None:
        raise _err(root, "problem is missing (:domain NAME)")
    return ProblemModel(name, domain_name, tuple(objects), tuple(init), goal)


__all__ = ["parse_domain", "parse_problem", "check_problem", "PddlSyntaxError"]
