"""Errors raised by the interaction manager."""


class ExecutiveError(Exception):
    pass


class BadConfig(ExecutiveError):
    """Session configuration is incomplete or inconsistent."""


class WrongPhase(ExecutiveError):
    """Entry point called outside the phase that allows it."""


class UnknownFluent(ExecutiveError):
    """Observation names a fluent outside the world-determined universe."""


class NoApplicableRule(ExecutiveError):
    """Reconciliation found an unexpected change no rule can repair."""


class SessionStopped(ExecutiveError):
    """The session was stopped; no further actions will be issued."""
