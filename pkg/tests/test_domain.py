from __future__ import annotations

import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kycsim.domain import (
    ModalityScores,
    NonFiniteValue,
    canonical_parse,
    canonical_serialize,
    quantize9,
    submission_from_dict,
    validate_submission,
)
from kycsim.workload import WorkloadConfig, generate_corpus


class TestCanonicalSerialize:
    def test_empty_modality_scores_serializes_stably(self):
        a = canonical_serialize(ModalityScores())
        b = canonical_serialize(ModalityScores())
        assert a == b == b"{}"

    def test_unset_markers_omitted(self):
        scores = ModalityScores(deepfake_score=0.5)
        assert canonical_serialize(scores) == b'{"deepfake_score":0.5}'

    def test_key_order_is_bytewise(self):
        assert canonical_serialize({"b": 1, "a": 2}) == canonical_serialize({"a": 2, "b": 1}) == b'{"a":2,"b":1}'

    def test_structurally_equal_records_equal_bytes(self, tiny_corpus):
        sub = tiny_corpus[0]
        clone = dataclasses.replace(sub)
        assert canonical_serialize(sub) == canonical_serialize(clone)

    def test_real_rendering(self):
        assert canonical_serialize(0.1) == b"0.1"
        assert canonical_serialize(1 / 3) == b"0.333333333"
        assert canonical_serialize(-0.0) == b"0"
        assert canonical_serialize(1.0) == b"1"

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteValue):
            canonical_serialize(float("nan"))
        with pytest.raises(NonFiniteValue):
            canonical_serialize({"x": float("inf")})

    def test_round_trip_on_generated_corpus(self, tiny_corpus):
        for sub in tiny_corpus[:100]:
            rebuilt = submission_from_dict(canonical_parse(canonical_serialize(sub)))
            assert rebuilt == sub

    def test_injective_on_corpus_sample(self):
        corpus = generate_corpus(WorkloadConfig(seed=3, scale=1.0 / 60.0))
        blobs = {canonical_serialize(s) for s in corpus[:1000]}
        assert len(blobs) == min(len(corpus), 1000)

    @given(st.floats(allow_nan=False, allow_infinity=False, width=64))
    @settings(max_examples=300, deadline=None)
    def test_float_rendering_idempotent(self, x):
        q = quantize9(x)
        rendered = canonical_serialize(q)
        assert float(rendered) == q
        assert canonical_serialize(float(rendered)) == rendered


class TestValidateSubmission:
    def test_generated_submissions_clean(self, tiny_corpus):
        for sub in tiny_corpus:
            assert validate_submission(sub) == []

    def test_bad_embedding_dimension(self, tiny_corpus):
        sub = tiny_corpus[0]
        bad_selfie = dataclasses.replace(sub.selfie, face_embedding=sub.selfie.face_embedding[:31])
        bad = dataclasses.replace(sub, selfie=bad_selfie)
        violations = validate_submission(bad)
        assert any("face_embedding" in v for v in violations)

    def test_ground_truth_consistency(self, tiny_corpus):
        sub = next(s for s in tiny_corpus if s.ground_truth.selfie_class == "deepfake")
        bad_truth = dataclasses.replace(sub.ground_truth, is_fraudulent=False)
        bad = dataclasses.replace(sub, ground_truth=bad_truth)
        violations = validate_submission(bad)
        assert any("ground_truth" in v for v in violations)


class TestQuantize9:
    def test_examples(self):
        assert quantize9(0.1) == 0.1
        assert quantize9(4.600000000000001) == 4.6

    def test_idempotent(self):
        for x in (0.123456789123, 1e-11, 98765.43215, 3.999999999999):
            assert quantize9(quantize9(x)) == quantize9(x)

    def test_non_finite(self):
        with pytest.raises(NonFiniteValue):
            quantize9(math.inf)
