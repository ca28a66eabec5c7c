"""Session configuration: channels, timeouts, reconciliation rules, affect.

Everything an operator might iterate on between sessions is data here, not
code.  The JSON layout mirrors the dataclasses below; ``SessionConfig.from_dict``
fills defaults so a config file only needs the parts it overrides.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from clinicbot.executive.errors import BadConfig
from clinicbot.pddl.ground import GroundedTask
from clinicbot.pddl.model import ActionGroup, Atom


class Channel(enum.Enum):
    MODELLED = "modelled"
    OPERATOR = "operator"
    SENSED = "sensed"


WORLD_CHANNELS = (Channel.OPERATOR, Channel.SENSED)


def parse_fluent(text: str) -> Atom:
    """Parse "(pred a b)" (or "pred a b") into an Atom; ?vars allowed."""
    inner = text.strip()
    if inner.startswith("(") and inner.endswith(")"):
        inner = inner[1:-1]
    parts = inner.split()
    if not parts:
        raise ValueError(f"empty fluent {text!r}")
    return Atom(parts[0].lower(), tuple(p.lower() for p in parts[1:]))


@dataclass(frozen=True)
class DefaultObservation:
    """How to fabricate readings when an action's channels stay silent.

    kind "expected" echoes the first outcome's predictions, "current" the
    present values; "literals" lists (fluent-pattern, value) pairs where
    patterns may use the action's parameter variables and value is true,
    false, "current" or "expected".
    """

    kind: str = "expected"
    literals: tuple[tuple[str, object], ...] = ()


@dataclass(frozen=True)
class TimeoutRule:
    seconds: float
    default: DefaultObservation = DefaultObservation()


@dataclass(frozen=True)
class ReconciliationRule:
    """Repair rule: when the guard matches an observed change, fix modelled
    fluents.  Guards bind ?variables across their literals; a binding fires
    only if at least one guard literal touches a changed fluent."""

    name: str
    priority: int
    when: tuple[tuple[str, bool], ...]
    fixups: tuple[tuple[str, bool], ...]


@dataclass(frozen=True)
class AffectOutput:
    fluent: str  # pattern, e.g. "(okanxiety ?p)"
    value: str  # "anxiety-ok" | "engagement-high"
    where: str | None = None  # binding restrictor, e.g. "(procstage ?p)"


@dataclass(frozen=True)
class AffectConfig:
    anxiety_weights: dict = field(
        default_factory=lambda: {"fear": 1.0, "sadness": 0.5, "head_speed": 0.3}
    )
    anxiety_cuts: dict = field(default_factory=lambda: {"high": 0.55, "medium": 0.30})
    engaged_attention: tuple[str, ...] = ("on-robot", "on-procedure")
    engaged_max_head_speed: float = 0.5
    outputs: tuple[AffectOutput, ...] = ()


DEFAULT_TIMEOUTS = {
    ActionGroup.ROBOT_BEHAVIOUR.value: TimeoutRule(20.0, DefaultObservation("expected")),
    ActionGroup.PROCEDURE_UPDATE.value: TimeoutRule(45.0, DefaultObservation("expected")),
    ActionGroup.EXPLICIT_QUERY.value: TimeoutRule(30.0, DefaultObservation("current")),
    ActionGroup.IMPLICIT_SIGNAL.value: TimeoutRule(10.0, DefaultObservation("current")),
}


@dataclass
class SessionConfig:
    semantics: str = "strong-cyclic"
    channels: dict[str, str] = field(default_factory=lambda: {"*": "modelled"})
    timeouts: dict[str, TimeoutRule] = field(default_factory=lambda: dict(DEFAULT_TIMEOUTS))
    consistency_threshold: int = 1
    merge_priority: tuple[str, ...] = ("operator", "sensed")
    rules: tuple[ReconciliationRule, ...] = ()
    affect: AffectConfig = field(default_factory=AffectConfig)
    initial_prompts: bool = True
    lazy_solve: bool = False
    node_budget: int = 1_000_000
    explicit_bound: int = 200_000

    # -- construction ----------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionConfig":
        cfg = cls()
        planner = doc.get("planner", {})
        cfg.semantics = planner.get("semantics", cfg.semantics)
        cfg.lazy_solve = planner.get("lazy", cfg.lazy_solve)
        cfg.node_budget = planner.get("node_budget", cfg.node_budget)
        cfg.explicit_bound = planner.get("explicit_bound", cfg.explicit_bound)
        if "channels" in doc:
            cfg.channels = {str(k).lower(): str(v).lower() for k, v in doc["channels"].items()}
        if "timeouts" in doc:
            timeouts = dict(DEFAULT_TIMEOUTS)
            for group, spec in doc["timeouts"].items():
                default = spec.get("default", {})
                if isinstance(default, str):
                    default = {"kind": default}
                timeouts[group] = TimeoutRule(
                    seconds=float(spec["seconds"]),
                    default=DefaultObservation(
                        kind=default.get("kind", "expected"),
                        literals=tuple(
                            (str(f), v) for f, v in default.get("literals", [])
                        ),
                    ),
                )
            cfg.timeouts = timeouts
        cfg.consistency_threshold = int(
            doc.get("consistency_threshold", cfg.consistency_threshold)
        )
        if "merge_priority" in doc:
            cfg.merge_priority = tuple(doc["merge_priority"])
        if "rules" in doc:
            cfg.rules = tuple(
                ReconciliationRule(
                    name=r["name"],
                    priority=int(r["priority"]),
                    when=tuple((str(f), bool(v)) for f, v in r["when"]),
                    fixups=tuple((str(f), bool(v)) for f, v in r["set"]),
                )
                for r in doc["rules"]
            )
        if "affect" in doc:
            a = doc["affect"]
            cfg.affect = AffectConfig(
                anxiety_weights=a.get("anxiety_weights", AffectConfig().anxiety_weights),
                anxiety_cuts=a.get("anxiety_cuts", AffectConfig().anxiety_cuts),
                engaged_attention=tuple(
                    a.get("engaged_attention", AffectConfig().engaged_attention)
                ),
                engaged_max_head_speed=a.get(
                    "engaged_max_head_speed", AffectConfig().engaged_max_head_speed
                ),
                outputs=tuple(
                    AffectOutput(o["fluent"], o["value"], o.get("where"))
                    for o in a.get("outputs", [])
                ),
            )
        cfg.initial_prompts = bool(doc.get("initial_prompts", cfg.initial_prompts))
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "SessionConfig":
        return cls.from_dict(json.loads(text))

    # -- resolution against a task ----------------------------------------

    def resolve_channels(self, task: GroundedTask) -> list[Channel]:
        """Per-fluent channel labels; BadConfig on unlabelled fluents."""
        try:
            label_map = {k: Channel(v) for k, v in self.channels.items() if k != "*"}
            default = Channel(self.channels["*"]) if "*" in self.channels else None
        except ValueError as exc:
            raise BadConfig(f"unknown channel label: {exc}") from None
        labels: list[Channel] = []
        missing: list[str] = []
        for atom in task.fluents:
            exact = label_map.get(str(atom))
            by_pred = label_map.get(atom.pred)
            label = exact or by_pred or default
            if label is None:
                missing.append(str(atom))
            else:
                labels.append(label)
        if missing:
            raise BadConfig(f"fluents without a channel label: {missing[:5]}")
        return labels

    def timeout_for(self, group: ActionGroup) -> TimeoutRule:
        rule = self.timeouts.get(group.value)
        if rule is None:
            raise BadConfig(f"no timeout entry for action group {group.value!r}")
        return rule

    def validate(self, task: GroundedTask) -> None:
        """All start-time checks: labels, timeout table, rule channel use."""
        labels = self.resolve_channels(task)
        for group in ActionGroup:
            rule = self.timeout_for(group)
            if rule.seconds <= 0:
                raise BadConfig(f"timeout for {group.value!r} must be positive")
        priorities = [r.priority for r in self.rules]
        if len(set(priorities)) != len(priorities):
            raise BadConfig("reconciliation rule priorities must be unique")
        for rule in self.rules:
            for pattern, _ in rule.when:
                for idx in match_fluents(task, pattern):
                    if labels[idx] not in WORLD_CHANNELS:
                        raise BadConfig(
                            f"rule {rule.name!r} guards modelled fluent"
                            f" {task.fluent_names[idx]}"
                        )
            for pattern, _ in rule.fixups:
                for idx in match_fluents(task, pattern):
                    if labels[idx] != Channel.MODELLED:
                        raise BadConfig(
                            f"rule {rule.name!r} fixes world fluent"
                            f" {task.fluent_names[idx]}"
                        )


def match_fluents(task: GroundedTask, pattern: str) -> list[int]:
    """Indices of fluents matching a pattern; ?vars match any object."""
    atom = parse_fluent(pattern)
    out = []
    for i, fluent in enumerate(task.fluents):
        if fluent.pred != atom.pred or len(fluent.args) != len(atom.args):
            continue
        if all(p.startswith("?") or p == a for p, a in zip(atom.args, fluent.args)):
            out.append(i)
    return out
