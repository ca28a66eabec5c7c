"""Seeded random generators: small FOND tasks and typed PDDL domains."""

from __future__ import annotations

from random import Random

from clinicbot.pddl.ground import GroundAction, GroundedTask
from clinicbot.pddl.model import ActionGroup, Atom

GROUPS = list(ActionGroup)


def random_ground_task(rng: Random, max_fluents: int = 9) -> GroundedTask:
    """A random nullary-fluent task; state space is at most 2^max_fluents."""
    n = rng.randint(4, max_fluents)
    fluents = tuple(Atom(f"f{i}") for i in range(n))
    n_actions = rng.randint(3, 8)
    actions = []
    for a in range(n_actions):
        bits = list(range(n))
        rng.shuffle(bits)
        pre_pos = sum(1 << b for b in bits[: rng.randint(0, 2)])
        rng.shuffle(bits)
        pre_neg = sum(1 << b for b in bits[: rng.randint(0, 1)])
        pre_neg &= ~pre_pos
        outcomes = []
        for _ in range(rng.randint(1, 3)):
            rng.shuffle(bits)
            add = sum(1 << b for b in bits[: rng.randint(0, 2)])
            rng.shuffle(bits)
            dele = sum(1 << b for b in bits[: rng.randint(0, 2)])
            outcomes.append((add, dele & ~add))
        actions.append(
            GroundAction(
                name=f"a{a}",
                schema_name=f"a{a}",
                binding=(),
                pre_pos=pre_pos,
                pre_neg=pre_neg,
                outcomes=tuple(outcomes),
                group=rng.choice(GROUPS),
            )
        )
    init = rng.getrandbits(n)
    goal_pos = 0
    goal_neg = 0
    for b in rng.sample(range(n), rng.randint(1, 2)):
        if rng.random() < 0.8:
            goal_pos |= 1 << b
        else:
            goal_neg |= 1 << b
    return GroundedTask(
        fluents=fluents,
        init=init,
        goal_pos=goal_pos,
        goal_neg=goal_neg & ~goal_pos,
        actions=tuple(actions),
        domain_name="random",
        problem_name=f"random-{rng.random():.6f}",
        objects=(),
    )


def random_typed_domain(rng: Random) -> tuple[str, str, dict]:
    """Random typed domain/problem text plus the facts a count-oracle needs.

    Returns (domain_text, problem_text, info) where info carries the type
    tree, object types, predicate signatures and schema signatures.
    """
    n_types = rng.randint(1, 4)
    types = [f"t{i}" for i in range(n_types)]
    parents: dict[str, str] = {}
    for i, typ in enumerate(types):
        parents[typ] = "object" if i == 0 else rng.choice(types[:i] + ["object"])

    n_objects = rng.randint(1, 6)
    objects = [(f"o{i}", rng.choice(types)) for i in range(n_objects)]

    n_preds = rng.randint(1, 4)
    predicates = []
    for i in range(n_preds):
        arity = rng.randint(0, 2)
        predicates.append((f"p{i}", [rng.choice(types) for _ in range(arity)]))

    def ancestors(typ: str) -> list[str]:
        chain = [typ]
        while chain[-1] != "object":
            chain.append(parents.get(chain[-1], "object"))
        return chain

    n_schemas = rng.randint(1, 5)
    schemas = []
    for i in range(n_schemas):
        arity = rng.randint(0, 3)
        params = [(f"?v{j}", rng.choice(types)) for j in range(arity)]
        pre, eff = [], []
        for p_name, p_types in predicates:
            # pick type-compatible variables per predicate slot, if any
            args = []
            for want in p_types:
                pool = [v for v, t in params if want in ancestors(t)]
                if not pool:
                    args = None
                    break
                args.append(rng.choice(pool))
            if args is None:
                continue
            lit = f"({p_name}{''.join(' ' + a for a in args)})"
            if rng.random() < 0.5:
                pre.append(lit if rng.random() < 0.7 else f"(not {lit})")
            if rng.random() < 0.7:
                eff.append(lit if rng.random() < 0.6 else f"(not {lit})")
        if not eff:
            eff = ["(dummy)"]
        schemas.append((f"act{i}", params, pre, eff))

    lines = ["(define (domain gen)"]
    lines.append("  (:types " + " ".join(f"{t} - {parents[t]}" for t in types) + ")")
    decls = ["(dummy)"]
    for p_name, p_types in predicates:
        args = " ".join(f"?x{j} - {t}" for j, t in enumerate(p_types))
        decls.append(f"({p_name}{' ' + args if args else ''})")
    lines.append("  (:predicates " + " ".join(decls) + ")")
    for name, params, pre, eff in schemas:
        param_s = " ".join(f"{v} - {t}" for v, t in params)
        lines.append(f"  (:action {name}")
        lines.append(f"    :parameters ({param_s})")
        lines.append(f"    :precondition (and {' '.join(pre)})")
        lines.append(f"    :effect (and {' '.join(eff)}))")
    lines.append(")")
    domain_text = "\n".join(lines)

    obj_s = " ".join(f"{o} - {t}" for o, t in objects)
    problem_text = (
        f"(define (problem gen-p) (:domain gen)\n"
        f"  (:objects {obj_s})\n"
        f"  (:init)\n"
        f"  (:goal (and (dummy))))"
    )
    info = {
        "parents": parents,
        "objects": objects,
        "predicates": [("dummy", [])] + predicates,
        "schemas": [(name, [t for _, t in params]) for name, params, _, _ in schemas],
    }
    return domain_text, problem_text, info


def count_oracle(info: dict) -> tuple[int, int]:
    """Independent fluent/ground-action counts by direct enumeration."""

    def compatible(obj_type: str, want: str) -> bool:
        cur = obj_type
        while True:
            if cur == want:
                return True
            if cur == "object":
                return False
            cur = info["parents"].get(cur, "object")

    def pool(want: str) -> int:
        return sum(1 for _, t in info["objects"] if want == "object" or compatible(t, want))

    fluent_count = 0
    for _, p_types in info["predicates"]:
        n = 1
        for t in p_types:
            n *= pool(t)
        fluent_count += n
    action_count = 0
    for _, s_types in info["schemas"]:
        n = 1
        for t in s_types:
            n *= pool(t)
        action_count += n
    return fluent_count, action_count
