from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kycsim.docforensics import (
    FULL_WEIGHTS,
    MalformedIdNumber,
    OcrResult,
    UnknownTemplate,
    check_digit,
    extract_text,
    levenshtein,
    template_deviation,
)
from kycsim.streams import derive_rng
from kycsim.templates import BUILTIN_TEMPLATES, render_document
from kycsim.workload import document_true_values, synth_document

TPL = BUILTIN_TEMPLATES["TPL-A"]
VALUES = {
    "name": "ALICE JOHNSON",
    "dob": "1984-07-23",
    "id_number": "123456784",
    "address": "12 MAPLE ST",
}


def doc_with(values=None, offsets=None, template=TPL, texture=None, template_id=None):
    values = dict(VALUES if values is None else values)
    offsets = offsets or {f: (0, 0) for f in template.field_layout}
    from kycsim.domain import DocumentArtifact

    return DocumentArtifact(
        declared_mime="application/pdf",
        magic_token="2550",
        template_id=template_id or template.template_id,
        text_grid=render_document(template, values, offsets),
        layout_offsets=offsets,
        texture_signature=texture or template.reference_texture,
        photo_embedding=(0.1,) * 32,
    )


class TestExtraction:
    def test_zero_noise_exact(self):
        doc = doc_with()
        ocr = extract_text(doc, 0.0, BUILTIN_TEMPLATES, seed=0, submission_id="s")
        assert ocr.fields == VALUES
        assert ocr.unparsed_lines == 0

    def test_two_row_shift_recovered(self):
        # address sits on row 7; +2 lands on the empty row 9 (no collision)
        offsets = {f: (0, 0) for f in TPL.field_layout}
        offsets["address"] = (2, 0)
        doc = doc_with(offsets=offsets)
        ocr = extract_text(doc, 0.0, BUILTIN_TEMPLATES, seed=0, submission_id="s")
        assert ocr.fields["address"] == VALUES["address"]

    def test_three_row_shift_unparsed(self):
        # dob sits on row 3; -3 lands on row 0, outside the +-2 search radius
        offsets = {f: (0, 0) for f in TPL.field_layout}
        offsets["dob"] = (-3, 0)
        doc = doc_with(offsets=offsets)
        ocr = extract_text(doc, 0.0, BUILTIN_TEMPLATES, seed=0, submission_id="s")
        assert "dob" not in ocr.fields
        assert ocr.unparsed_lines == 1

    def test_unknown_template_raises(self):
        doc = doc_with(template_id="TPL-X99")
        with pytest.raises(UnknownTemplate):
            extract_text(doc, 0.0, BUILTIN_TEMPLATES, seed=0, submission_id="s")

    def test_channel_noise_rate(self):
        """Realized corruption over >= 1e5 characters within +-0.01 of p."""
        noise_factor = 0.839
        expected = 0.10 * noise_factor
        errors = 0
        total = 0
        for i in range(2400):
            rng = derive_rng(3, "chan", i)
            doc = synth_document("authentic", TPL, rng, noise_scale=0.0)
            ocr = extract_text(doc, noise_factor, BUILTIN_TEMPLATES, seed=3, submission_id=f"c{i}")
            truth = document_true_values(doc, TPL)
            for fld, want in truth.items():
                got = ocr.fields[fld]
                total += len(want)
                errors += sum(1 for a, b in zip(got, want) if a != b)
        assert total >= 100_000
        assert abs(errors / total - expected) <= 0.01

    def test_noise_factor_zero_is_clean(self):
        rng = derive_rng(4, "clean")
        doc = synth_document("authentic", TPL, rng, noise_scale=0.0)
        ocr = extract_text(doc, 0.0, BUILTIN_TEMPLATES, seed=4, submission_id="z")
        assert ocr.fields == document_true_values(doc, TPL)


class TestCheckDigit:
    def test_all_zeros_valid(self):
        assert check_digit("000000000")

    def test_spec_valid_example(self):
        # weighted sum 1*1+2*2+...+8*8 = 204; 204 mod 10 = 4
        assert check_digit("123456784")

    def test_spec_invalid_example(self):
        assert not check_digit("123456785")

    def test_malformed(self):
        with pytest.raises(MalformedIdNumber):
            check_digit("12345678X")
        with pytest.raises(MalformedIdNumber):
            check_digit("12345678")

    def test_bruteforce_against_weighted_sum(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            digits = [int(d) for d in rng.integers(0, 10, size=9)]
            s = "".join(map(str, digits))
            expected = sum(i * d for i, d in enumerate(digits[:8], start=1)) % 10 == digits[8]
            assert check_digit(s) == expected


class TestTemplateDeviation:
    def _ocr(self, fields, unparsed=0):
        return OcrResult(submission_id="s", fields=fields, char_error_rate=None, unparsed_lines=unparsed)

    def test_clean_document_zero_deviation(self):
        doc = doc_with()
        report = template_deviation(doc, self._ocr(dict(VALUES)), TPL)
        assert report.deviation == 0.0
        assert not report.forged

    def test_check_digit_term_alone(self):
        fields = dict(VALUES)
        fields["id_number"] = "123456785"  # valid format, wrong check digit
        doc = doc_with(values=fields)
        report = template_deviation(doc, self._ocr(fields), TPL)
        assert report.check_digit_fail
        assert report.deviation == pytest.approx(0.10)
        assert not report.forged

    def test_weighted_combination_example(self):
        # check digit broken + one violating field of four: 0.10 + 0.05
        fields = dict(VALUES)
        fields["id_number"] = "123456785"
        fields["dob"] = "84-07-23"
        doc = doc_with(values=fields)
        report = template_deviation(doc, self._ocr(fields), TPL)
        assert report.format_violation_frac == pytest.approx(0.25)
        assert report.deviation == pytest.approx(0.15)
        assert not report.forged
        # plus layout drift pushing mean offset to 2.5 cells: + 0.4*0.5
        offsets = {f: (0, 0) for f in TPL.field_layout}
        offsets["name"] = (6, 8)  # hypot = 10 -> mean over 4 fields = 2.5
        drifted = doc_with(values=fields, offsets=offsets)
        report2 = template_deviation(drifted, self._ocr(fields), TPL)
        assert report2.layout_dev == pytest.approx(0.5)
        assert report2.deviation == pytest.approx(0.35)
        assert report2.forged

    def test_unparsed_fields_count_as_violations(self):
        fields = dict(VALUES)
        fields.pop("address")
        doc = doc_with()
        report = template_deviation(doc, self._ocr(fields, unparsed=1), TPL)
        assert report.format_violation_frac == pytest.approx(0.25)

    def test_texture_term(self):
        shifted = tuple(x + 0.5 for x in TPL.reference_texture)  # distance sqrt(8)*0.5
        doc = doc_with(texture=shifted)
        report = template_deviation(doc, self._ocr(dict(VALUES)), TPL)
        assert report.texture_dev == pytest.approx(np.sqrt(8) * 0.5 / 2.0, abs=1e-6)

    @given(
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
        st.booleans(),
    )
    @settings(max_examples=200, deadline=None)
    def test_deviation_bounds_and_monotonicity(self, layout, texture, fmt, cd):
        dev = lambda l, t, f, c: 0.4 * l + 0.3 * t + 0.2 * f + 0.1 * (1.0 if c else 0.0)
        base = dev(layout, texture, fmt, cd)
        assert 0.0 <= base <= 1.0
        assert dev(min(1, layout + 0.1), texture, fmt, cd) >= base
        assert dev(layout, min(1, texture + 0.1), fmt, cd) >= base
        assert dev(layout, texture, min(1, fmt + 0.1), cd) >= base
        assert dev(layout, texture, fmt, True) >= dev(layout, texture, fmt, False)


class TestLevenshtein:
    def test_basic(self):
        assert levenshtein("", "") == 0
        assert levenshtein("abc", "abc") == 0
        assert levenshtein("abc", "abd") == 1
        assert levenshtein("NAME:", "NOME:") == 1
        assert levenshtein("kitten", "sitting") == 3
