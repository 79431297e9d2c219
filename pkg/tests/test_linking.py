from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kycsim.domain import SubmissionMetadata
from kycsim.ingestion import preprocess
from kycsim.docforensics import extract_text
from kycsim.linking import (
    DegenerateEmbedding,
    DeviceIndex,
    cosine_similarity,
    link,
    link_metadata_only,
    name_similarity,
)
from kycsim.templates import BUILTIN_TEMPLATES


def meta(geo="US", juris="US", name="ALICE JOHNSON", device="dev-1") -> SubmissionMetadata:
    return SubmissionMetadata(
        device_fingerprint=device,
        geolocation=geo,
        declared_jurisdiction=juris,
        channel="mobile",
        submitted_at=0.0,
        declared_name=name,
    )


E1 = tuple([1.0] + [0.0] * 31)
E2 = tuple([0.0, 1.0] + [0.0] * 30)


class TestLink:
    def test_identical_embeddings_full_score(self):
        report = link(E1, E1, "ALICE JOHNSON", meta(), 0)
        assert report.cos_sim == 1.0
        assert report.link_score == 1.0
        assert report.metadata_anomaly == 0.0

    def test_orthogonal_mismatch_example(self):
        report = link(E1, E2, "BOB OTHER", meta(geo="DE", juris="US"), 0)
        assert report.cos_sim == 0.0
        assert report.link_score == pytest.approx(0.35)
        assert report.metadata_anomaly == pytest.approx(0.3)

    def test_device_reuse_floor(self):
        report = link(E1, E1, "ALICE JOHNSON", meta(), 7)
        assert report.metadata_anomaly >= 0.7
        report2 = link(E1, E1, "ALICE JOHNSON", meta(geo="DE", juris="US"), 9)
        assert report2.metadata_anomaly == 1.0

    def test_zero_norm_embedding(self):
        with pytest.raises(DegenerateEmbedding):
            link((0.0,) * 32, E1, "X", meta(), 0)

    def test_metadata_only_path(self):
        report = link_metadata_only("ALICE JOHNSON", meta(), 2)
        assert report.cos_sim is None
        assert report.link_score is None
        assert report.metadata_anomaly == pytest.approx(0.2)

    @given(st.floats(min_value=0.01, max_value=100.0))
    @settings(max_examples=100, deadline=None)
    def test_cosine_scale_invariance(self, alpha):
        u = (0.3, -0.2, 0.9, 0.1)
        v = (0.5, 0.5, -0.1, 0.2)
        scaled = tuple(alpha * x for x in u)
        assert cosine_similarity(scaled, v) == pytest.approx(cosine_similarity(u, v), abs=1e-9)

    def test_cosine_symmetric(self):
        u = (0.3, -0.2, 0.9)
        v = (0.5, 0.5, -0.1)
        assert cosine_similarity(u, v) == pytest.approx(cosine_similarity(v, u))

    def test_link_score_monotone_in_cosine(self):
        scores = []
        for c in (-1.0, -0.5, 0.0, 0.5, 1.0):
            emb = tuple([c, math.sqrt(1 - c * c)] + [0.0] * 30)
            scores.append(link(E1, emb, "ALICE JOHNSON", meta(), 0).link_score)
        assert scores == sorted(scores)


class TestNameSimilarity:
    def test_exact(self):
        assert name_similarity("ALICE JOHNSON", "alice  johnson") == 1.0

    def test_one_char_off_still_matches(self):
        assert name_similarity("ALICE JOHNSON", "ALICE JOHNSen") >= 0.8

    def test_different_names(self):
        assert name_similarity("ALICE JOHNSON", "BOB SMITH") < 0.5


class TestDeviceIndex:
    def test_prior_count_by_arrival_order(self):
        index = DeviceIndex()
        index.register(0, "d1")
        index.register(1, "d1")
        index.register(2, "d2")
        index.register(3, "d1")
        assert index.prior_count(3, "d1") == 2
        assert index.prior_count(1, "d1") == 1
        assert index.prior_count(0, "d1") == 0
        # registration order does not matter, only arrival indices
        late = DeviceIndex()
        late.register(3, "d1")
        late.register(0, "d1")
        late.register(1, "d1")
        assert late.prior_count(3, "d1") == 2


class TestCorpusSeparation:
    def test_matched_vs_mismatched_link_scores(self, small_corpus):
        matched, mismatched = [], []
        for sub in small_corpus:
            if sub.selfie.missing:
                continue
            pre = preprocess(sub.service_view(), seed=42)
            try:
                ocr = extract_text(sub.document, pre.ocr_noise_factor, BUILTIN_TEMPLATES, seed=42,
                                   submission_id=sub.submission_id)
                ocr_name = ocr.fields.get("name", "")
            except Exception:
                ocr_name = ""
            report = link(
                sub.selfie.face_embedding,
                sub.document.photo_embedding,
                ocr_name,
                sub.metadata,
                0,
                submission_id=sub.submission_id,
            )
            (matched if sub.ground_truth.identity_match else mismatched).append(report.link_score)
        assert np.mean(matched) - np.mean(mismatched) >= 0.25
