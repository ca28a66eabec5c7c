"""Affective-state estimation from simulated social signals.

The mapping is a small threshold table over the expression distribution,
attention target and head speed.  An anxiety score is a weighted sum of
fear, sadness and head speed; cuts discretise it into low/medium/high.
Engagement is high when attention is on the robot or procedure and the
head is not moving fast.  A zero expression vector means "no face seen"
and yields the defaults.
"""

from __future__ import annotations

from dataclasses import dataclass

from clinicbot.executive.config import AffectConfig

ANXIETY_LEVELS = ("low", "medium", "high")


def clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


@dataclass
class AffectiveState:
    anxiety: str = "low"
    engagement: str = "low"
    valence: float = 0.0
    arousal: float = 0.0

    def __post_init__(self):
        if self.anxiety not in ANXIETY_LEVELS:
            raise ValueError(f"bad anxiety level {self.anxiety!r}")
        if self.engagement not in ("low", "high"):
            raise ValueError(f"bad engagement level {self.engagement!r}")
        self.valence = clamp(self.valence, -1.0, 1.0)
        self.arousal = clamp(self.arousal, 0.0, 1.0)

    @property
    def anxiety_ok(self) -> bool:
        """Anxiety discretisation onto the boolean model fluent."""
        return self.anxiety != "high"

    def to_dict(self) -> dict:
        return {
            "anxiety": self.anxiety,
            "engagement": self.engagement,
            "valence": round(self.valence, 4),
            "arousal": round(self.arousal, 4),
        }


def estimate(config: AffectConfig, signals) -> AffectiveState:
    """Map signals (expression probs, attention, head_speed) to affect."""
    expr: dict[str, float] = dict(signals.expression)
    total = sum(expr.values())
    if total < 1e-9:
        return AffectiveState()

    score = 0.0
    for feature, weight in config.anxiety_weights.items():
        value = signals.head_speed if feature == "head_speed" else expr.get(feature, 0.0)
        score += weight * value
    if score >= config.anxiety_cuts["high"]:
        anxiety = "high"
    elif score >= config.anxiety_cuts["medium"]:
        anxiety = "medium"
    else:
        anxiety = "low"

    engaged = (
        signals.attention in config.engaged_attention
        and signals.head_speed <= config.engaged_max_head_speed
    )
    valence = expr.get("happiness", 0.0) - (
        expr.get("fear", 0.0) + expr.get("sadness", 0.0) + expr.get("anger", 0.0)
    )
    arousal = 0.6 * signals.head_speed + 0.5 * (
        expr.get("fear", 0.0) + expr.get("surprise", 0.0)
    )
    return AffectiveState(
        anxiety=anxiety,
        engagement="high" if engaged else "low",
        valence=clamp(valence, -1.0, 1.0),
        arousal=clamp(arousal, 0.0, 1.0),
    )
