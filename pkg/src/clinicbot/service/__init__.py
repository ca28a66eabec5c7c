"""Process entry points: HTTP API, persistence, CLI."""

from clinicbot.service.persist import CorruptLog, SessionInputs, SessionStore
from clinicbot.service.replay import ReplayResult, replay_events, state_trajectory

__all__ = [
    "CorruptLog",
    "ReplayResult",
    "SessionInputs",
    "SessionStore",
    "replay_events",
    "state_trajectory",
]
