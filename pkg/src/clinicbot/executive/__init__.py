"""Interaction manager: turn loop, channels, robustness machinery."""

from clinicbot.executive.affect import AffectiveState, estimate
from clinicbot.executive.config import (
    AffectConfig,
    Channel,
    DefaultObservation,
    ReconciliationRule,
    SessionConfig,
    TimeoutRule,
)
from clinicbot.executive.errors import (
    BadConfig,
    ExecutiveError,
    NoApplicableRule,
    SessionStopped,
    UnknownFluent,
    WrongPhase,
)
from clinicbot.executive.events import EVENT_KINDS, EventLog, event_line
from clinicbot.executive.session import (
    ActionRequest,
    ObservationBundle,
    Phase,
    Reading,
    Session,
    TurnResult,
    start_session,
)

__all__ = [
    "ActionRequest",
    "AffectConfig",
    "AffectiveState",
    "BadConfig",
    "Channel",
    "DefaultObservation",
    "EVENT_KINDS",
    "EventLog",
    "ExecutiveError",
    "NoApplicableRule",
    "ObservationBundle",
    "Phase",
    "Reading",
    "ReconciliationRule",
    "Session",
    "SessionConfig",
    "SessionStopped",
    "TimeoutRule",
    "TurnResult",
    "UnknownFluent",
    "WrongPhase",
    "estimate",
    "event_line",
    "start_session",
]
