"""Append-only session event log.

One JSON object per event; every event carries its turn number and a
monotonic timestamp.  Listeners observe events in append order, which is
what the service layer relies on for persistence and streaming.
"""

from __future__ import annotations

import json
from typing import Callable

EVENT_KINDS = frozenset(
    {
        "session-start",
        "action-request",
        "observation",
        "outcome-chosen",
        "reconcile",
        "timeout-default",
        "replan",
        "stop",
        "done",
    }
)


def event_line(event: dict) -> str:
    """Canonical single-line JSON form of an event."""
    return json.dumps(event, sort_keys=True, separators=(",", ":"))


class EventLog:
    def __init__(self, clock: Callable[[], float]):
        self._clock = clock
        self.events: list[dict] = []
        self._listeners: list[Callable[[dict], None]] = []

    def subscribe(self, listener: Callable[[dict], None]) -> None:
        self._listeners.append(listener)

    def append(self, kind: str, turn: int, **payload) -> dict:
        assert kind in EVENT_KINDS, kind
        event = {"kind": kind, "turn": turn, "ts": round(self._clock(), 6)}
        event.update(payload)
        self.events.append(event)
        for listener in self._listeners:
            listener(event)
        return event

    def lines(self) -> list[str]:
        return [event_line(e) for e in self.events]

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e["kind"] == kind)
