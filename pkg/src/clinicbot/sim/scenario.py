"""Scenario-driven closed-loop runs.

A scenario names either a patient model (dynamics table) or a scripted
reading sequence, the procedure step list it expects, and any fault
injections (drop-channel, delay, contradictory-observation) with the turns
they strike at.  Runs use a deterministic simulated clock, so identical
(scenario, seed) pairs produce byte-identical transcripts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from clinicbot.executive.config import SessionConfig
from clinicbot.executive.errors import NoApplicableRule, SessionStopped
from clinicbot.executive.session import (
    ObservationBundle,
    Phase,
    Reading,
    Session,
)
from clinicbot.pddl.ground import GroundedTask
from clinicbot.planning import Unsolvable
from clinicbot.sim.patient import PatientModel, PatientSim

FAULT_KINDS = ("drop-channel", "delay", "contradictory-observation")


class ScenarioMismatch(Exception):
    pass


class SimClock:
    """Deterministic monotonic clock the runner advances by hand."""

    def __init__(self, start: float = 0.0):
        self.value = start

    def now(self) -> float:
        return self.value

    def advance(self, dt: float) -> None:
        self.value += dt


@dataclass(frozen=True)
class Fault:
    turn: int
    kind: str
    readings: tuple[tuple[str, bool], ...] = ()
    seconds: float = 0.0


@dataclass
class Scenario:
    name: str
    steps: tuple[str, ...] = ()
    patient: PatientModel | None = None
    scripted: tuple[dict, ...] | None = None
    faults: tuple[Fault, ...] = ()
    max_turns: int = 50
    seed: int = 0
    answer_initial: str | None = None  # anxiety level for the initial prompt

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        faults = tuple(
            Fault(
                turn=int(f["turn"]),
                kind=str(f["kind"]),
                readings=tuple(
                    (str(fl), bool(v)) for fl, v in f.get("readings", [])
                ),
                seconds=float(f.get("seconds", 0.0)),
            )
            for f in doc.get("faults", [])
        )
        patient = doc.get("patient")
        scripted = doc.get("scripted")
        return cls(
            name=str(doc.get("name", "scenario")),
            steps=tuple(doc.get("steps", [])),
            patient=PatientModel.from_dict(patient) if patient is not None else None,
            scripted=tuple(scripted) if scripted is not None else None,
            faults=faults,
            max_turns=int(doc.get("max_turns", 50)),
            seed=int(doc.get("seed", 0)),
            answer_initial=doc.get("answer_initial"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))

    def validate(self, task: GroundedTask) -> None:
        procsteps = {o for o, t in task.objects if t == "procstep"}
        if self.steps and set(self.steps) != procsteps:
            raise ScenarioMismatch(
                f"scenario steps {sorted(self.steps)} != task steps {sorted(procsteps)}"
            )
        for fault in self.faults:
            if fault.kind not in FAULT_KINDS:
                raise ScenarioMismatch(f"unknown fault kind {fault.kind!r}")
            if not 0 <= fault.turn < self.max_turns:
                raise ScenarioMismatch(f"fault turn {fault.turn} outside scenario length")
        if self.scripted is not None and self.max_turns > len(self.scripted):
            raise ScenarioMismatch(
                "scripted sequence shorter than the turns it claims to cover"
            )


def run_scenario(
    scenario: Scenario,
    session: Session,
    clock: SimClock,
) -> list[dict]:
    """Drive the session turn by turn; returns the event-log transcript."""
    scenario.validate(session.task)
    faults = {f.turn: f for f in scenario.faults}
    sim = (
        PatientSim(scenario.patient, seed=scenario.seed ^ scenario.patient.seed)
        if scenario.patient is not None
        else None
    )

    if scenario.answer_initial is not None and session.config.initial_prompts:
        session.observe_initial(
            _initial_anxiety_bundle(session, scenario.answer_initial)
        )

    while session.turn < scenario.max_turns:
        try:
            request = session.next_action()
        except (SessionStopped, Unsolvable):
            break
        if request is None:
            break
        action = session.task.actions[session.task.action_index(request.action)]
        fault = faults.get(request.turn)
        try:
            if fault is not None and fault.kind == "drop-channel":
                clock.advance(request.deadline - clock.now() + 0.001)
                session.handle_timeout()
            elif fault is not None and fault.kind == "contradictory-observation":
                readings = tuple(
                    Reading(f, v, _channel_of(session, f)) for f, v in fault.readings
                )
                clock.advance(1.0)
                session.apply_outcome(
                    ObservationBundle(source="simulator", readings=readings)
                )
            else:
                if fault is not None and fault.kind == "delay":
                    clock.advance(min(fault.seconds, request.deadline - clock.now() - 0.001))
                else:
                    clock.advance(1.0)
                if sim is not None:
                    bundle, signals = sim.simulate_step(action, session)
                    session.estimate_affect(signals)
                elif scenario.scripted is not None:
                    bundle = _scripted_bundle(session, scenario.scripted[request.turn])
                else:
                    bundle = ObservationBundle(source="simulator")
                session.apply_outcome(bundle)
            if session.phase is Phase.RECONCILING:
                session.reconcile()
        except (NoApplicableRule, SessionStopped):
            break
    return list(session.log.events)


def _channel_of(session: Session, fluent: str) -> str:
    from clinicbot.executive.config import parse_fluent

    idx = session.task.fluent_index(parse_fluent(fluent))
    return session.channels[idx].value


def _initial_anxiety_bundle(session: Session, level: str) -> ObservationBundle:
    """Answer the initial anxiety prompt for the step in progress."""
    from clinicbot.pddl.model import Atom

    readings = []
    ok = level != "high"
    for i, atom in enumerate(session.task.fluents):
        if atom.pred != "okanxiety" or not atom.args:
            continue
        stage_atom = Atom("procstage", (atom.args[0],))
        if session.task.has_fluent(stage_atom):
            s_idx = session.task.fluent_index(stage_atom)
            if session.state >> s_idx & 1:
                readings.append(
                    Reading(session.task.fluent_names[i], ok, _channel_of(session, str(atom)))
                )
    session.note_anxiety(level)
    return ObservationBundle(source="simulator", readings=tuple(readings))


def _scripted_bundle(session: Session, entry: dict) -> ObservationBundle:
    readings = tuple(
        Reading(str(f), bool(v), _channel_of(session, str(f)))
        for f, v in entry.get("readings", [])
    )
    return ObservationBundle(source=str(entry.get("source", "simulator")), readings=readings)
