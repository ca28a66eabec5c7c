"""Re-execution of a session event log.

Replay rebuilds a fresh session from the same inputs and drives it with the
logged observations, timeouts and stops.  The replay clock hands back the
logged timestamp of whichever event is being reproduced, so a deterministic
run replays to identical event lines.  Comparison normalises away the
action deadline (derived from a second clock read on live servers); every
other field, including the state trajectory, must match exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from clinicbot.executive.config import SessionConfig
from clinicbot.executive.errors import (
    NoApplicableRule,
    SessionStopped,
    WrongPhase,
)
from clinicbot.executive.events import event_line
from clinicbot.executive.session import ObservationBundle, Reading, Session
from clinicbot.pddl.ground import GroundedTask
from clinicbot.planning import Unsolvable


@dataclass
class ReplayResult:
    session: Session
    diffs: list[str]

    @property
    def identical(self) -> bool:
        return not self.diffs


def _normalise(event: dict) -> dict:
    return {k: v for k, v in event.items() if k != "deadline"}


def _bundle_from(event: dict) -> ObservationBundle:
    readings = tuple(
        Reading(str(f), bool(v), str(ch)) for f, v, ch in event.get("readings", [])
    )
    return ObservationBundle(source=event.get("source", "operator"), readings=readings)


def replay_events(
    task: GroundedTask,
    config: SessionConfig,
    events: list[dict],
    session_id: str = "replay",
) -> ReplayResult:
    """Drive a fresh session through ``events``; diffs are human-readable."""
    if not events or events[0].get("kind") != "session-start":
        return ReplayResult(
            Session(task, config, session_id=session_id), ["log has no session-start"]
        )

    session = Session(task, config, session_id=session_id)

    def replay_clock() -> float:
        idx = min(len(session.log.events), len(events) - 1)
        return float(events[idx].get("ts", 0.0))

    session.set_clock(replay_clock)

    halted = False
    for idx, event in enumerate(events):
        if halted or idx < len(session.log.events):
            continue  # already reproduced by an earlier call
        kind = event.get("kind")
        try:
            if kind == "session-start":
                session.id = event.get("session", session_id)
                session.start()
            elif kind == "observation" and event.get("initial"):
                session.observe_initial(_bundle_from(event))
            elif kind in ("action-request", "replan", "done"):
                session.next_action()
            elif kind == "observation":
                session.apply_outcome(_bundle_from(event))
            elif kind == "timeout-default":
                session.handle_timeout()
            elif kind == "reconcile":
                session.reconcile()
            elif kind == "stop":
                session.stop()
            elif kind == "outcome-chosen":
                # produced by apply_outcome; reaching here means the replayed
                # run diverged and never emitted it
                break
        except (SessionStopped, NoApplicableRule, Unsolvable, WrongPhase):
            halted = True

    diffs: list[str] = []
    replayed = session.log.events
    for i, original in enumerate(events):
        if i >= len(replayed):
            diffs.append(f"event {i}: missing in replay ({original.get('kind')})")
            continue
        a, b = _normalise(original), _normalise(replayed[i])
        if event_line(a) != event_line(b):
            diffs.append(
                f"event {i}: {event_line(a)} != {event_line(b)}"
            )
    for i in range(len(events), len(replayed)):
        diffs.append(f"event {i}: extra in replay ({replayed[i].get('kind')})")
    return ReplayResult(session, diffs)


def state_trajectory(events: list[dict]) -> list[str]:
    """The byte-comparable state sequence a log encodes."""
    out = []
    for event in events:
        state = event.get("state") or event.get("init")
        if state is not None:
            out.append(f"{event['kind']}:{state}")
    return out
