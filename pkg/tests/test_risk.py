from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kycsim.domain import ModalityScores
from kycsim.risk import FusionConfig, NoEvidence, band_of, fuse

unit = st.floats(min_value=0.0, max_value=1.0)
CFG = FusionConfig()


class TestFuse:
    def test_all_zero_risks_approve(self):
        scores = ModalityScores(deepfake_score=0.0, liveness_pass=True, doc_deviation=0.0,
                                link_score=1.0, metadata_anomaly=0.0)
        assessment = fuse(scores, CFG)
        assert assessment.base_risk == 0.0
        assert assessment.band == "approve"
        assert assessment.overrides == ()

    def test_all_max_risks_reject(self):
        scores = ModalityScores(deepfake_score=1.0, liveness_pass=False, doc_deviation=1.0,
                                link_score=0.0, metadata_anomaly=1.0)
        assessment = fuse(scores, CFG)
        assert assessment.final_risk == 1.0
        assert assessment.band == "reject"

    def test_hand_worked_override_example(self):
        scores = ModalityScores(deepfake_score=0.9, liveness_pass=False, doc_deviation=0.2,
                                link_score=0.9, metadata_anomaly=0.0)
        assessment = fuse(scores, CFG)
        assert assessment.base_risk == pytest.approx(0.40)
        assert assessment.final_risk == pytest.approx(0.90)
        assert assessment.band == "reject"
        assert "liveness_fail_floor" in assessment.overrides

    def test_check_digit_floor(self):
        scores = ModalityScores(doc_deviation=0.1)
        assessment = fuse(scores, CFG, check_digit_fail=True)
        assert assessment.final_risk == pytest.approx(0.75)
        assert "check_digit_floor" in assessment.overrides

    def test_single_modality_renormalizes_exactly(self):
        scores = ModalityScores(doc_deviation=0.42)
        assessment = fuse(scores, CFG)
        assert assessment.base_risk == pytest.approx(0.42)
        assert assessment.final_risk == pytest.approx(0.42)

    def test_no_evidence(self):
        with pytest.raises(NoEvidence):
            fuse(ModalityScores(), CFG)
        with pytest.raises(NoEvidence):
            fuse(ModalityScores(quality=0.8, liveness_pass=True), CFG)

    def test_final_never_below_base(self):
        scores = ModalityScores(deepfake_score=0.1, liveness_pass=False)
        assessment = fuse(scores, CFG)
        assert assessment.final_risk >= assessment.base_risk

    @given(unit, unit, unit, unit, unit)
    @settings(max_examples=300, deadline=None)
    def test_monotone_in_each_modality(self, df, doc, link_score, meta, bump):
        def risk(df_, doc_, link_, meta_):
            scores = ModalityScores(deepfake_score=df_, doc_deviation=doc_,
                                    link_score=link_, metadata_anomaly=meta_)
            return fuse(scores, CFG).final_risk

        base = risk(df, doc, link_score, meta)
        assert risk(min(1, df + bump), doc, link_score, meta) >= base - 1e-9
        assert risk(df, min(1, doc + bump), link_score, meta) >= base - 1e-9
        assert risk(df, doc, max(0, link_score - bump), meta) >= base - 1e-9
        assert risk(df, doc, link_score, min(1, meta + bump)) >= base - 1e-9


class TestBands:
    def test_boundary_ties_go_to_review(self):
        assert band_of(0.30, CFG) == "review"
        assert band_of(0.70, CFG) == "review"

    def test_just_below_boundary(self):
        assert band_of(0.299999999, CFG) == "approve"

    def test_reject_above(self):
        assert band_of(0.71, CFG) == "reject"

    def test_domain_check(self):
        with pytest.raises(ValueError):
            band_of(1.5, CFG)

    @given(unit, unit)
    @settings(max_examples=200, deadline=None)
    def test_order_preserving_step_function(self, a, b):
        order = {"approve": 0, "review": 1, "reject": 2}
        lo, hi = min(a, b), max(a, b)
        assert order[band_of(lo, CFG)] <= order[band_of(hi, CFG)]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            FusionConfig(weights={"deepfake": 0.5, "document": 0.2, "link": 0.2, "metadata": 0.2}).validate()
        with pytest.raises(ValueError):
            FusionConfig(approve_below=0.8, reject_above=0.7).validate()
