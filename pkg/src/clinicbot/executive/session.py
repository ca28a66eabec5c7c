"""The interaction manager: a serialized turn loop over a solved task.

One turn is: action request -> observation (or timeout default) -> outcome
selection -> state update.  Fluents resolve through their channel: modelled
fluents change only via the chosen outcome's effects or a reconciliation
rule; world-determined (operator/sensed) fluents change only via
observation bundles.  All turn-mutating entry points serialize through a
per-session lock, so races between operators, timers and stop are decided
atomically and exactly one of them completes any given turn.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace as dc_replace
from typing import Callable, Iterable

from clinicbot.executive.affect import AffectiveState, estimate
from clinicbot.executive.config import (
    Channel,
    DefaultObservation,
    SessionConfig,
    WORLD_CHANNELS,
    match_fluents,
    parse_fluent,
)
from clinicbot.executive.errors import (
    BadConfig,
    NoApplicableRule,
    SessionStopped,
    UnknownFluent,
    WrongPhase,
)
from clinicbot.executive.events import EventLog
from clinicbot.executive.rules import apply_rules
from clinicbot.pddl.ground import GroundedTask
from clinicbot.planning import Policy, solve, unfold, plan_to_json

import enum
import time


class Phase(enum.Enum):
    AWAITING_ACTION = "awaiting-action"
    AWAITING_OBSERVATION = "awaiting-observation"
    RECONCILING = "reconciling"
    STOPPED = "stopped"
    DONE = "done"


@dataclass(frozen=True)
class Reading:
    fluent: str
    value: bool
    channel: str  # "operator" | "sensed"


@dataclass(frozen=True)
class ObservationBundle:
    """Channel-tagged fluent readings; at most one reading per fluent."""

    source: str  # "operator" | "simulator" | "default"
    readings: tuple[Reading, ...] = ()

    def __post_init__(self):
        if self.source not in ("operator", "simulator", "default"):
            raise ValueError(f"bad observation source {self.source!r}")
        fluents = [r.fluent for r in self.readings]
        if len(set(fluents)) != len(fluents):
            raise ValueError("duplicate fluent in observation bundle")


@dataclass(frozen=True)
class ActionRequest:
    turn: int
    action: str
    group: str
    outcome_count: int
    expected: tuple[dict, ...]  # per outcome: {"effects": str, "world": [[f, v]]}
    deadline: float


@dataclass(frozen=True)
class TurnResult:
    turn: int
    outcome: int | None  # None when the turn moved to reconciling
    score: int
    deltas: tuple[tuple[str, bool], ...]
    phase: Phase


@dataclass
class _Pending:
    action_idx: int
    request: ActionRequest


class Session:
    """One patient interaction; drive it with the public entry points."""

    def __init__(
        self,
        task: GroundedTask,
        config: SessionConfig,
        session_id: str = "session",
        clock: Callable[[], float] | None = None,
        policy: Policy | None = None,
    ):
        self.id = session_id
        self.task = task
        self.config = config
        self.clock = clock or time.monotonic
        self.policy = policy
        self.state = task.init
        self.turn = 0
        self.phase = Phase.AWAITING_ACTION
        self.affect = AffectiveState()
        self.log = EventLog(self.clock)
        self.channels: list[Channel] = []
        self.world_mask = 0
        self.plan_root = task.init
        self._lock = threading.RLock()
        self._pending: _Pending | None = None
        self._pending_sensed: dict[int, Reading] = {}
        self._reconcile_stash: ObservationBundle | None = None
        self._replanned_this_turn = False
        self._started = False
        self._first_request_emitted = False

    # -- lifecycle ---------------------------------------------------------

    def set_clock(self, clock: Callable[[], float]) -> None:
        """Swap the monotonic clock (replay drives this before start)."""
        with self._lock:
            self.clock = clock
            self.log._clock = clock

    def start(self) -> str:
        """Validate config, solve (unless lazy), emit session-start."""
        with self._lock:
            if self._started:
                return self.id
            self.config.validate(self.task)
            self.channels = self.config.resolve_channels(self.task)
            self.world_mask = 0
            for i, label in enumerate(self.channels):
                if label in WORLD_CHANNELS:
                    self.world_mask |= 1 << i
            if not self.config.lazy_solve:
                self._ensure_policy()
            self._started = True
            self.log.append(
                "session-start",
                self.turn,
                session=self.id,
                fluent_order=self.task.fluent_names,
                init=self.task.bitstring(self.state),
                semantics=self.config.semantics,
                solution_class=(
                    self.policy.solution_class.value if self.policy else None
                ),
                initial_world=self.initial_world_fluents(),
            )
            return self.id

    def initial_world_fluents(self) -> list[list]:
        """World-determined fluents and their modelled initial values."""
        out = []
        for i, label in enumerate(self.channels):
            if label in WORLD_CHANNELS:
                out.append(
                    [self.task.fluent_names[i], bool(self.state >> i & 1), label.value]
                )
        return out

    def _ensure_policy(self) -> None:
        if self.policy is None:
            self.policy = solve(
                self.task,
                self.config.semantics,
                node_budget=self.config.node_budget,
                explicit_bound=self.config.explicit_bound,
            )

    # -- world/modelled helpers ---------------------------------------------

    def _reading_index(self, reading: Reading) -> int:
        atom = parse_fluent(reading.fluent)
        if not self.task.has_fluent(atom):
            raise UnknownFluent(f"unknown fluent {reading.fluent!r}")
        idx = self.task.fluent_index(atom)
        if self.channels[idx] not in WORLD_CHANNELS:
            raise UnknownFluent(
                f"fluent {reading.fluent!r} is modelled, not world-determined"
            )
        return idx

    def _merge_readings(self, bundle: ObservationBundle) -> dict[int, Reading]:
        """Pending sensed readings overlaid with the bundle's, by priority."""
        rank = {ch: i for i, ch in enumerate(self.config.merge_priority)}
        merged: dict[int, Reading] = dict(self._pending_sensed)
        for reading in bundle.readings:
            idx = self._reading_index(reading)
            old = merged.get(idx)
            if old is None or rank.get(reading.channel, 99) <= rank.get(old.channel, 99):
                merged[idx] = reading
        return merged

    def _apply_world(self, readings: dict[int, Reading]) -> set[int]:
        changed = set()
        for idx, reading in readings.items():
            bit = 1 << idx
            current = bool(self.state & bit)
            if current != reading.value:
                changed.add(idx)
            self.state = (self.state | bit) if reading.value else (self.state & ~bit)
        return changed

    # -- turn loop -----------------------------------------------------------

    def next_action(self) -> ActionRequest | None:
        """Issue the turn's action, or None once the goal is reached."""
        with self._lock:
            if self.phase == Phase.STOPPED:
                raise SessionStopped("session is stopped")
            if self.phase == Phase.DONE:
                return None
            if self.phase != Phase.AWAITING_ACTION:
                raise WrongPhase(f"next_action in phase {self.phase.value}")
            if not self._started:
                raise WrongPhase("session not started")
            if self.task.is_goal(self.state):
                self.phase = Phase.DONE
                self.log.append(
                    "done",
                    self.turn,
                    state=self.task.bitstring(self.state),
                    turns=self.turn,
                )
                return None
            self._ensure_policy()
            idx = self.policy.mapping.get(self.state)
            if idx is None:
                idx = self._replan()
            action = self.task.actions[idx]
            timeout = self.config.timeout_for(action.group)
            deadline = self.clock() + timeout.seconds
            request = ActionRequest(
                turn=self.turn,
                action=action.name,
                group=action.group.value,
                outcome_count=len(action.outcomes),
                expected=tuple(self._expected_outcome(idx, k) for k in range(len(action.outcomes))),
                deadline=deadline,
            )
            self._pending = _Pending(idx, request)
            self.phase = Phase.AWAITING_OBSERVATION
            self._first_request_emitted = True
            self.log.append(
                "action-request",
                self.turn,
                action=action.name,
                group=action.group.value,
                outcomes=len(action.outcomes),
                expected=[dict(e) for e in request.expected],
                deadline=round(deadline, 6),
            )
            return request

    def _replan(self) -> int:
        if self._replanned_this_turn:
            self._halt("replan limit reached within one turn")
            raise SessionStopped("replan limit reached")
        self._replanned_this_turn = True
        task_here = dc_replace(self.task, init=self.state)
        try:
            fresh = solve(
                task_here,
                self.config.semantics,
                node_budget=self.config.node_budget,
                explicit_bound=self.config.explicit_bound,
            )
        except Exception:
            self.log.append(
                "replan",
                self.turn,
                status="failed",
                from_state=self.task.bitstring(self.state),
            )
            self._halt("replanning failed; no policy covers the current state")
            raise
        self.policy.mapping.update(fresh.mapping)
        self.policy.solution_class = fresh.solution_class
        self.plan_root = self.state
        self.log.append(
            "replan",
            self.turn,
            status="ok",
            from_state=self.task.bitstring(self.state),
            solution_class=fresh.solution_class.value,
        )
        idx = self.policy.mapping.get(self.state)
        if idx is None:  # goal states are unmapped but handled above
            self._halt("replan produced no action for the current state")
            raise SessionStopped("no action after replan")
        return idx

    def _expected_outcome(self, action_idx: int, k: int) -> dict:
        action = self.task.actions[action_idx]
        add, delete = action.outcomes[k]
        effects = [str(a) for a in self.task.true_atoms(add)]
        effects += [f"(not {a})" for a in self.task.true_atoms(delete)]
        post = action.apply(self.state, k)
        world = []
        touched = action.touched_mask() & self.world_mask
        for i in range(len(self.task.fluents)):
            if touched >> i & 1:
                world.append([self.task.fluent_names[i], bool(post >> i & 1)])
        return {"effects": " ".join(effects) or "(no change)", "world": world}

    def observe_initial(self, bundle: ObservationBundle) -> None:
        """Seed world-determined fluents before the first action request."""
        with self._lock:
            if self._first_request_emitted or self.turn != 0:
                raise WrongPhase("initial observation only before the first action")
            if self.phase != Phase.AWAITING_ACTION:
                raise WrongPhase(f"observe_initial in phase {self.phase.value}")
            readings = {}
            for reading in bundle.readings:
                readings[self._reading_index(reading)] = reading
            changed = self._apply_world(readings)
            # initial values are ground truth, not an inconsistency: rules
            # realign modelled fluents where they match, silence is fine
            self.state, fired = apply_rules(
                self.task, self.config.rules, self.state, changed
            )
            self.log.append(
                "observation",
                self.turn,
                source=bundle.source,
                initial=True,
                readings=[[r.fluent, r.value, r.channel] for r in readings.values()],
                fired=fired,
                state=self.task.bitstring(self.state),
            )

    def apply_outcome(self, bundle: ObservationBundle) -> TurnResult:
        """Select the outcome most consistent with the observed effects."""
        with self._lock:
            if self.phase != Phase.AWAITING_OBSERVATION:
                raise WrongPhase(f"apply_outcome in phase {self.phase.value}")
            assert self._pending is not None
            merged = self._merge_readings(bundle)
            action = self.task.actions[self._pending.action_idx]

            self.log.append(
                "observation",
                self.turn,
                source=bundle.source,
                readings=[
                    [r.fluent, r.value, r.channel] for _, r in sorted(merged.items())
                ],
            )

            chosen, score = self._select_outcome(action, merged)
            if merged and score < self.config.consistency_threshold:
                self._reconcile_stash = ObservationBundle(
                    source=bundle.source,
                    readings=tuple(r for _, r in sorted(merged.items())),
                )
                self.phase = Phase.RECONCILING
                return TurnResult(self.turn, None, score, (), self.phase)

            before = self.state
            self._apply_world(merged)
            add, delete = action.outcomes[chosen]
            modelled = ~self.world_mask
            self.state = (self.state & ~(delete & modelled)) | (add & modelled)
            deltas = self._deltas(before, self.state)

            completed_turn = self.turn
            self.turn += 1
            self.phase = Phase.AWAITING_ACTION
            self._pending = None
            self._pending_sensed.clear()
            self._replanned_this_turn = False
            self.log.append(
                "outcome-chosen",
                completed_turn,
                action=action.name,
                outcome=chosen,
                score=score,
                deltas=[[f, v] for f, v in deltas],
                state=self.task.bitstring(self.state),
            )
            return TurnResult(completed_turn, chosen, score, deltas, self.phase)

    def _select_outcome(
        self, action, merged: dict[int, Reading]
    ) -> tuple[int, int]:
        """Argmax of agreement counts; ties prefer the canonically largest
        effect set (so duplicated/reordered outcome lists select the same
        effects), reported as its lowest outcome index."""
        scores = []
        for k in range(len(action.outcomes)):
            post = action.apply(self.state, k)
            agree = sum(
                1
                for idx, reading in merged.items()
                if bool(post >> idx & 1) == reading.value
            )
            scores.append(agree)
        best = max(scores)
        tied = [k for k, s in enumerate(scores) if s == best]
        if len(tied) == 1:
            return tied[0], best

        def canon(k: int) -> tuple:
            add, delete = action.outcomes[k]
            return (
                sorted(str(a) for a in self.task.true_atoms(add)),
                sorted(str(a) for a in self.task.true_atoms(delete)),
            )

        best_key = max(canon(k) for k in tied)
        for k in tied:
            if canon(k) == best_key:
                return k, best
        raise AssertionError("unreachable")

    def _deltas(self, before: int, after: int) -> tuple[tuple[str, bool], ...]:
        diff = before ^ after
        out = []
        for i in range(len(self.task.fluents)):
            if diff >> i & 1:
                out.append((self.task.fluent_names[i], bool(after >> i & 1)))
        return tuple(out)

    def reconcile(self, bundle: ObservationBundle | None = None) -> int:
        """Overwrite world fluents from the observation and repair modelled
        ones via the rule table; raises NoApplicableRule when an actual
        change matches no rule (the session halts safely)."""
        with self._lock:
            if self.phase != Phase.RECONCILING:
                raise WrongPhase(f"reconcile in phase {self.phase.value}")
            obs = bundle if bundle is not None else self._reconcile_stash
            assert obs is not None
            readings = {}
            for reading in obs.readings:
                readings[self._reading_index(reading)] = reading
            before = self.state
            changed = self._apply_world(readings)
            self.state, fired = apply_rules(
                self.task, self.config.rules, self.state, changed
            )
            if changed and not fired:
                self.state = before
                self.log.append(
                    "reconcile",
                    self.turn,
                    error="no-applicable-rule",
                    changed=[self.task.fluent_names[i] for i in sorted(changed)],
                )
                self._halt("unexpected change matches no reconciliation rule")
                raise NoApplicableRule(
                    "no rule covers changed fluents: "
                    + ", ".join(self.task.fluent_names[i] for i in sorted(changed))
                )
            completed_turn = self.turn
            self.turn += 1
            self.phase = Phase.AWAITING_ACTION
            self._pending = None
            self._pending_sensed.clear()
            self._reconcile_stash = None
            self._replanned_this_turn = False
            self.log.append(
                "reconcile",
                completed_turn,
                changed=[self.task.fluent_names[i] for i in sorted(changed)],
                fired=fired,
                deltas=[[f, v] for f, v in self._deltas(before, self.state)],
                state=self.task.bitstring(self.state),
            )
            return self.state

    def handle_timeout(self) -> ObservationBundle | None:
        """Fabricate the group's default observation once the deadline has
        passed; no-op unless a response is actually overdue."""
        with self._lock:
            if self.phase != Phase.AWAITING_OBSERVATION or self._pending is None:
                return None
            if self.clock() <= self._pending.request.deadline:
                return None
            action = self.task.actions[self._pending.action_idx]
            template = self.config.timeout_for(action.group).default
            bundle = self._default_bundle(action, template)
            self.log.append(
                "timeout-default",
                self.turn,
                action=action.name,
                group=action.group.value,
                readings=[[r.fluent, r.value, r.channel] for r in bundle.readings],
            )
            self.apply_outcome(bundle)
            return bundle

    def _default_bundle(self, action, template: DefaultObservation) -> ObservationBundle:
        readings: list[Reading] = []
        if template.kind in ("expected", "current"):
            touched = action.touched_mask() & self.world_mask
            post = action.apply(self.state, 0)
            source_state = post if template.kind == "expected" else self.state
            for i in range(len(self.task.fluents)):
                if touched >> i & 1:
                    readings.append(
                        Reading(
                            self.task.fluent_names[i],
                            bool(source_state >> i & 1),
                            self.channels[i].value,
                        )
                    )
        elif template.kind == "literals":
            binding = action.substitution()
            post = action.apply(self.state, 0)
            for pattern, value in template.literals:
                atom = parse_fluent(pattern).substitute(binding)
                if not self.task.has_fluent(atom):
                    continue
                idx = self.task.fluent_index(atom)
                if self.channels[idx] not in WORLD_CHANNELS:
                    continue
                if value == "current":
                    val = bool(self.state >> idx & 1)
                elif value == "expected":
                    val = bool(post >> idx & 1)
                else:
                    val = bool(value)
                readings.append(
                    Reading(self.task.fluent_names[idx], val, self.channels[idx].value)
                )
        else:
            raise BadConfig(f"unknown default-observation kind {template.kind!r}")
        return ObservationBundle(source="default", readings=tuple(readings))

    def stop(self) -> Phase:
        """Stop within the current turn boundary; idempotent."""
        with self._lock:
            if self.phase in (Phase.STOPPED, Phase.DONE):
                return self.phase
            before = self.phase
            self.phase = Phase.STOPPED
            self._pending = None
            self._reconcile_stash = None
            self.log.append("stop", self.turn, phase_before=before.value)
            return self.phase

    def _halt(self, reason: str) -> None:
        if self.phase not in (Phase.STOPPED, Phase.DONE):
            before = self.phase
            self.phase = Phase.STOPPED
            self._pending = None
            self.log.append("stop", self.turn, phase_before=before.value, reason=reason)

    # -- affect ---------------------------------------------------------------

    def estimate_affect(self, signals) -> AffectiveState:
        """Update the affect estimate and stage sensed readings for fluents
        the config maps from affect (only those labelled sensed)."""
        with self._lock:
            if self.phase in (Phase.STOPPED, Phase.DONE):
                raise WrongPhase("session is not active")
            self.affect = estimate(self.config.affect, signals)
            for output in self.config.affect.outputs:
                value = (
                    self.affect.anxiety_ok
                    if output.value == "anxiety-ok"
                    else self.affect.engagement == "high"
                )
                for idx in self._affect_targets(output):
                    if self.channels[idx] != Channel.SENSED:
                        continue
                    self._pending_sensed[idx] = Reading(
                        self.task.fluent_names[idx], value, Channel.SENSED.value
                    )
            return self.affect

    def _affect_targets(self, output) -> list[int]:
        indices = match_fluents(self.task, output.fluent)
        if output.where is None:
            return indices
        # restrict via the 'where' pattern: shared variables must bind to
        # a currently-true fluent (e.g. the procstep that is in progress)
        where = parse_fluent(output.where)
        fluent_pat = parse_fluent(output.fluent)
        out = []
        for idx in indices:
            fluent = self.task.fluents[idx]
            binding = {
                p: a for p, a in zip(fluent_pat.args, fluent.args) if p.startswith("?")
            }
            anchor = where.substitute(binding)
            if self.task.has_fluent(anchor):
                a_idx = self.task.fluent_index(anchor)
                if self.state >> a_idx & 1:
                    out.append(idx)
        return out

    def note_anxiety(self, level: str) -> None:
        """Record an operator-reported anxiety level on the affect dial."""
        with self._lock:
            self.affect = AffectiveState(
                anxiety=level,
                engagement=self.affect.engagement,
                valence=self.affect.valence,
                arousal=self.affect.arousal,
            )

    # -- introspection ----------------------------------------------------------

    def plan_view(self) -> dict:
        """Branched-plan serialization rooted at the last (re)plan state."""
        with self._lock:
            self._ensure_policy()
            task_here = dc_replace(self.task, init=self.plan_root)
            tree = unfold(task_here, Policy(task_here, self.policy.mapping))
            doc = plan_to_json(tree)
            doc["solution_class"] = self.policy.solution_class.value
            return doc

    def summary(self) -> dict:
        with self._lock:
            return {
                "session": self.id,
                "turn": self.turn,
                "phase": self.phase.value,
                "state": self.task.bitstring(self.state),
                "affect": self.affect.to_dict(),
                "goal_reached": self.task.is_goal(self.state),
                "solution_class": (
                    self.policy.solution_class.value if self.policy else None
                ),
            }


def start_session(
    task: GroundedTask,
    config: SessionConfig,
    session_id: str = "session",
    clock: Callable[[], float] | None = None,
    policy: Policy | None = None,
) -> Session:
    """Create and start a session (eager solve unless config says lazy)."""
    session = Session(task, config, session_id=session_id, clock=clock, policy=policy)
    session.start()
    return session
