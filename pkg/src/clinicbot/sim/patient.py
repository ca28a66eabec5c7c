"""Patient dynamics: a lookup table, not a learned model.

Anxiety is an integer level 0..2 (low/medium/high).  Distraction-style
behaviours shift it by the susceptibility entry for the activity strength
used; procedure steps add their per-step stress.  The simulated patient
answers the channels the executive would otherwise ask a real room for:
anxiety readings for explicit queries, step confirmations for procedure
updates, plus facial signals every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

from clinicbot.executive.config import Channel
from clinicbot.executive.session import ObservationBundle, Reading, Session
from clinicbot.pddl.ground import GroundAction
from clinicbot.pddl.model import ActionGroup, Atom
from clinicbot.sim.signals import SimulatedSignals, signals_for_level

LEVELS = ("low", "medium", "high")


class UnknownAction(Exception):
    pass


@dataclass
class PatientModel:
    baseline: str = "medium"
    susceptibility: dict[str, int] = field(
        default_factory=lambda: {"low": -1, "high": -1}
    )
    procedure_stress: dict[str, int] = field(default_factory=lambda: {"insertion": 1})
    seed: int = 0
    noise: float = 0.03

    @classmethod
    def from_dict(cls, doc: dict) -> "PatientModel":
        return cls(
            baseline=doc.get("baseline", "medium"),
            susceptibility={
                str(k): int(v)
                for k, v in doc.get("susceptibility", {"low": -1, "high": -1}).items()
            },
            procedure_stress={
                str(k): int(v)
                for k, v in doc.get("procedure_stress", {"insertion": 1}).items()
            },
            seed=int(doc.get("seed", 0)),
            noise=float(doc.get("noise", 0.03)),
        )


class PatientSim:
    """Stateful simulated patient bound to one session's task."""

    def __init__(self, model: PatientModel, seed: int | None = None):
        self.model = model
        self.level = LEVELS.index(model.baseline)
        self.rng = Random(model.seed if seed is None else seed)
        self.distressed = False

    @property
    def anxiety(self) -> str:
        return LEVELS[self.level]

    def _shift(self, delta: int) -> None:
        self.level = max(0, min(2, self.level + delta))

    def simulate_step(
        self, action: GroundAction, session: Session
    ) -> tuple[ObservationBundle, SimulatedSignals]:
        """Respond to an issued action: update anxiety, emit readings."""
        task = session.task
        try:
            task.action_index(action.name)
        except KeyError:
            raise UnknownAction(action.name) from None

        binding = action.substitution()
        strength = self._strength_of(action, session)
        readings: list[Reading] = []

        if action.group in (ActionGroup.ROBOT_BEHAVIOUR, ActionGroup.EXPLICIT_QUERY):
            if action.group is ActionGroup.ROBOT_BEHAVIOUR and strength is not None:
                self._shift(self.model.susceptibility.get(strength, 0))
            for var, obj in binding.items():
                atom = Atom("okanxiety", (obj,))
                self._add_reading(readings, session, atom, self.level < 2)
        elif action.group is ActionGroup.PROCEDURE_UPDATE:
            if self.level == 2:
                self.distressed = True
                self._add_reading(readings, session, Atom("distressed"), True)
            # stress applies for the step being entered; confirm the
            # stage transition while we are at it
            post = action.apply(session.state, 0)
            diff = session.state ^ post
            for i in range(len(task.fluents)):
                if diff >> i & 1 and task.fluents[i].pred == "procstage":
                    entering = bool(post >> i & 1)
                    if entering:
                        self._shift(self.model.procedure_stress.get(task.fluents[i].args[0], 0))
                    self._add_reading(readings, session, task.fluents[i], entering)
        elif action.group is ActionGroup.IMPLICIT_SIGNAL:
            self._add_reading(readings, session, Atom("engaged"), self.level < 2)

        bundle = ObservationBundle(source="simulator", readings=tuple(readings))
        signals = signals_for_level(self.level, self.rng, self.model.noise)
        return bundle, signals

    def _strength_of(self, action: GroundAction, session: Session) -> str | None:
        """The level-typed argument of the action, if it has one."""
        level_objs = {o for o, t in session.task.objects if t == "level"}
        for obj in action.binding:
            if obj in level_objs:
                return obj
        return None

    def _add_reading(
        self, readings: list[Reading], session: Session, atom: Atom, value: bool
    ) -> None:
        if not session.task.has_fluent(atom):
            return
        idx = session.task.fluent_index(atom)
        channel = session.channels[idx]
        if channel is Channel.MODELLED:
            return
        name = session.task.fluent_names[idx]
        if any(r.fluent == name for r in readings):
            return
        readings.append(Reading(name, value, channel.value))
