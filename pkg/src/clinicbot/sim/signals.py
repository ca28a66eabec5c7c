"""Simulated social signals: expression distribution, attention, head speed.

The per-level signal profiles are built to invert cleanly through the
default affect thresholds: feeding a level's (noised) signals through the
estimator recovers that level with margin to spare.  The zero expression
vector is the degenerate "no face detected" input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

EXPRESSIONS = ("happiness", "sadness", "fear", "anger", "surprise", "neutral")
ATTENTIONS = ("on-robot", "on-carer", "on-procedure", "away")


@dataclass(frozen=True)
class SimulatedSignals:
    expression: dict[str, float] = field(
        default_factory=lambda: {e: 0.0 for e in EXPRESSIONS}
    )
    attention: str = "away"
    head_speed: float = 0.0

    def __post_init__(self):
        unknown = set(self.expression) - set(EXPRESSIONS)
        if unknown:
            raise ValueError(f"unknown expressions {sorted(unknown)}")
        if self.attention not in ATTENTIONS:
            raise ValueError(f"unknown attention target {self.attention!r}")
        total = sum(self.expression.values())
        if not (abs(total - 1.0) <= 1e-9 or abs(total) <= 1e-9):
            raise ValueError(f"expression vector sums to {total}, expected 1 (or 0)")
        if not (self.head_speed >= 0 and self.head_speed == self.head_speed):
            raise ValueError("head_speed must be finite and non-negative")


_PROFILES = {
    0: (  # low anxiety: settled, watching the robot
        {"happiness": 0.30, "neutral": 0.55, "surprise": 0.05,
         "sadness": 0.04, "fear": 0.03, "anger": 0.03},
        "on-robot",
        0.10,
    ),
    1: (  # medium: warier, tracking the procedure
        {"happiness": 0.10, "neutral": 0.45, "surprise": 0.05,
         "sadness": 0.10, "fear": 0.25, "anger": 0.05},
        "on-procedure",
        0.35,
    ),
    2: (  # high: fear-dominant, turned away, restless
        {"happiness": 0.02, "neutral": 0.10, "surprise": 0.05,
         "sadness": 0.15, "fear": 0.60, "anger": 0.08},
        "away",
        0.75,
    ),
}


def signals_for_level(level: int, rng: Random | None = None, noise: float = 0.03) -> SimulatedSignals:
    """Signals for an anxiety level 0..2, with optional seeded noise."""
    expr, attention, speed = _PROFILES[level]
    expr = dict(expr)
    if rng is not None and noise > 0:
        for key in expr:
            expr[key] = max(0.0, expr[key] + rng.gauss(0.0, noise))
        speed = max(0.0, speed + rng.gauss(0.0, noise))
    total = sum(expr.values())
    expr = {k: v / total for k, v in expr.items()}
    return SimulatedSignals(expression=expr, attention=attention, head_speed=speed)
