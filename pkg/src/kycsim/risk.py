"""Risk fusion: weighted modality scores, rule overrides, banded decisions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .domain import ModalityScores, RiskAssessment, quantize9

DEFAULT_WEIGHTS = {
    "deepfake": 0.35,
    "document": 0.30,
    "link": 0.25,
    "metadata": 0.10,
}

OVERRIDE_LIVENESS_FAIL = "liveness_fail_floor"
OVERRIDE_CHECK_DIGIT = "check_digit_floor"


class NoEvidence(ValueError):
    """fuse() needs at least one modality score."""


@dataclass(frozen=True)
class FusionConfig:
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    approve_below: float = 0.30
    reject_above: float = 0.70
    liveness_fail_floor: float = 0.90
    check_digit_floor: float = 0.75

    def validate(self) -> None:
        if abs(sum(self.weights.values()) - 1.0) > 1e-9:
            raise ValueError("fusion weights must sum to 1")
        if not (0.0 < self.approve_below < self.reject_above < 1.0):
            raise ValueError("bands must satisfy 0 < approve_below < reject_above < 1")


def band_of(risk: float, cfg: FusionConfig) -> str:
    """Threshold mapping; both boundaries fall inside the review band."""
    if not (0.0 <= risk <= 1.0):
        raise ValueError(f"risk {risk} outside [0,1]")
    if risk < cfg.approve_below:
        return "approve"
    if risk > cfg.reject_above:
        return "reject"
    return "review"


def fuse(scores: ModalityScores, cfg: FusionConfig, check_digit_fail: bool = False,
         submission_id: str = "") -> RiskAssessment:
    """Fuse present modality risks; weights renormalize over what is set.

    Rule overrides floor the final risk: a failed liveness check floors at
    0.90, a failed check digit at 0.75. Missing evidence never dilutes
    present evidence.
    """
    components = scores.risk_components()
    if not components:
        raise NoEvidence(submission_id or "all modality scores unset")
    weight_sum = sum(cfg.weights[k] for k in components)
    base = sum(cfg.weights[k] * v for k, v in components.items()) / weight_sum
    base = min(max(base, 0.0), 1.0)

    overrides: list[str] = []
    final = base
    if scores.liveness_pass is False:
        overrides.append(OVERRIDE_LIVENESS_FAIL)
        final = max(final, cfg.liveness_fail_floor)
    if check_digit_fail:
        overrides.append(OVERRIDE_CHECK_DIGIT)
        final = max(final, cfg.check_digit_floor)
    final = min(final, 1.0)

    return RiskAssessment(
        submission_id=submission_id,
        base_risk=quantize9(base),
        final_risk=quantize9(final),
        overrides=tuple(overrides),
        band=band_of(final, cfg),
        modality_scores=scores,
    )
