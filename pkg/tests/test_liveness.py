from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kycsim.domain import SelfieArtifact
from kycsim.liveness import (
    DEFAULT_VARIANTS,
    MissingModality,
    score_calibrated,
    score_heuristic,
)
from kycsim.streams import derive_rng

unit = st.floats(min_value=0.0, max_value=1.0)


def artifact(blink=0.9, temporal=0.1, frequency=0.1, quality=0.8) -> SelfieArtifact:
    return SelfieArtifact(
        declared_mime="image/jpeg",
        magic_token="FFD8",
        quality=quality,
        blink_plausibility=blink,
        temporal_inconsistency=temporal,
        frequency_artifact=frequency,
        face_embedding=(0.1,) * 32,
    )


class TestHeuristic:
    def test_clean_input_passes(self):
        verdict = score_heuristic(artifact(blink=1.0, temporal=0.0, frequency=0.0))
        assert verdict.deepfake_score == 0.0
        assert verdict.liveness_pass

    def test_saturated_input_fails(self):
        verdict = score_heuristic(artifact(blink=0.0, temporal=1.0, frequency=1.0))
        assert verdict.deepfake_score == 1.0
        assert not verdict.liveness_pass

    def test_deepfake_class_means(self):
        verdict = score_heuristic(artifact(blink=0.5, temporal=0.7, frequency=0.65))
        assert verdict.deepfake_score == pytest.approx(0.645)
        assert not verdict.liveness_pass

    def test_low_blink_fails_even_with_low_score(self):
        verdict = score_heuristic(artifact(blink=0.05, temporal=0.1, frequency=0.1))
        assert verdict.deepfake_score < 0.5
        assert not verdict.liveness_pass

    def test_missing_artifact(self):
        with pytest.raises(MissingModality):
            score_heuristic(SelfieArtifact.absent())

    @given(unit, unit, unit, unit)
    @settings(max_examples=300, deadline=None)
    def test_monotonicity(self, blink, temporal, frequency, delta):
        base = score_heuristic(artifact(blink=blink, temporal=temporal, frequency=frequency))
        bumped_t = score_heuristic(
            artifact(blink=blink, temporal=min(1.0, temporal + delta), frequency=frequency)
        )
        bumped_f = score_heuristic(
            artifact(blink=blink, temporal=temporal, frequency=min(1.0, frequency + delta))
        )
        raised_blink = score_heuristic(
            artifact(blink=min(1.0, blink + delta), temporal=temporal, frequency=frequency)
        )
        assert bumped_t.deepfake_score >= base.deepfake_score - 1e-9
        assert bumped_f.deepfake_score >= base.deepfake_score - 1e-9
        assert raised_blink.deepfake_score <= base.deepfake_score + 1e-9

    def test_verdict_invariant(self):
        for blink in (0.0, 0.3, 0.9):
            for temporal in (0.0, 0.5, 1.0):
                v = score_heuristic(artifact(blink=blink, temporal=temporal, frequency=0.4))
                if v.deepfake_score >= 0.5:
                    assert not v.liveness_pass


class TestCalibratedStub:
    def test_derived_fpr_values(self):
        assert DEFAULT_VARIANTS["temporal_artifact"].recall == 0.913
        assert DEFAULT_VARIANTS["temporal_artifact"].false_positive_rate == pytest.approx(0.01747, abs=5e-5)
        assert DEFAULT_VARIANTS["cnn_baseline"].false_positive_rate == pytest.approx(0.03189, abs=5e-5)
        assert DEFAULT_VARIANTS["transformer_multimodal"].false_positive_rate == pytest.approx(0.01497, abs=5e-5)

    @pytest.mark.parametrize("variant_id", sorted(DEFAULT_VARIANTS))
    def test_recall_converges_within_three_sigma(self, variant_id):
        variant = DEFAULT_VARIANTS[variant_id]
        rng = derive_rng(42, "stub-convergence", variant_id)
        n = 2000
        flagged = sum(
            0 if score_calibrated(artifact(), True, variant, rng).liveness_pass else 1 for _ in range(n)
        )
        sigma = math.sqrt(variant.recall * (1 - variant.recall) / n)
        assert abs(flagged / n - variant.recall) <= 3 * sigma

    @pytest.mark.parametrize("variant_id", sorted(DEFAULT_VARIANTS))
    def test_fpr_converges_within_three_sigma(self, variant_id):
        variant = DEFAULT_VARIANTS[variant_id]
        rng = derive_rng(42, "stub-fpr", variant_id)
        n = 4000
        flagged = sum(
            0 if score_calibrated(artifact(), False, variant, rng).liveness_pass else 1 for _ in range(n)
        )
        fpr = variant.false_positive_rate
        sigma = math.sqrt(fpr * (1 - fpr) / n)
        assert abs(flagged / n - fpr) <= 3 * sigma

    def test_score_bands_match_flag(self):
        variant = DEFAULT_VARIANTS["temporal_artifact"]
        rng = derive_rng(1, "stub-bands")
        for _ in range(500):
            verdict = score_calibrated(artifact(), True, variant, rng)
            if verdict.liveness_pass:
                assert verdict.deepfake_score < 0.5
            else:
                assert verdict.deepfake_score >= 0.5
