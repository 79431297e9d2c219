"""Document OCR through a noisy channel plus template verification.

Extraction reads each field region off the text grid at its template
position, recovering rows shifted up to two cells by matching field
labels. Every extracted character passes through an independent
corruption channel whose rate is base_char_err * noise_factor; the
uniform draws are keyed by (submission, field, char), so runs that differ
only in noise_factor corrupt coupled character sets.

The template deviation score fuses layout drift, texture distance, format
violations and the check-digit integrity cue:

    deviation = 0.4*layout + 0.3*texture + 0.2*formats + 0.1*check_digit
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .domain import DocumentArtifact, quantize9
from .streams import derive_rng
from .templates import FIELD_LABELS, TemplateSpec

BASE_CHAR_ERR = 0.10
ROW_SEARCH_RADIUS = 2
LABEL_MATCH_MAX_DISTANCE = 2

W_LAYOUT = 0.4
W_TEXTURE = 0.3
W_FORMAT = 0.2
W_CHECK_DIGIT = 0.1
LAYOUT_NORM_CELLS = 5.0
TEXTURE_NORM = 2.0
DOC_FORGED_THRESHOLD = 0.25

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
# Digits misread as lookalike letters; a corrupted id no longer parses as
# nine digits, so OCR noise shows up as a format violation rather than a
# spurious check-digit failure.
_DIGIT_LOOKALIKES = {
    "0": "O", "1": "I", "2": "Z", "3": "E", "4": "A",
    "5": "S", "6": "G", "7": "T", "8": "B", "9": "Q",
}


class UnknownTemplate(KeyError):
    """The document names a template nobody registered: treated as evidence."""


class MalformedIdNumber(ValueError):
    """check_digit() requires nine decimal digits."""


@dataclass(frozen=True)
class OcrResult:
    submission_id: str
    fields: dict[str, str]
    char_error_rate: Optional[float]
    unparsed_lines: int


@dataclass(frozen=True)
class TemplateReport:
    submission_id: str
    template_id: str
    layout_dev: float
    texture_dev: float
    format_violation_frac: float
    check_digit_fail: bool
    deviation: float
    forged: bool


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _corrupt_char(ch: str, u: float) -> str:
    if ch in _DIGIT_LOOKALIKES:
        return _DIGIT_LOOKALIKES[ch]
    idx = int(u * (len(_LETTERS) - 1))
    repl = _LETTERS[idx]
    if repl == ch:
        repl = _LETTERS[(idx + 1) % len(_LETTERS)]
    return repl


def _apply_noise(text: str, p: float, uniforms) -> str:
    if p <= 0:
        return text
    out = []
    for ch, u in zip(text, uniforms):
        if u < p:
            out.append(_corrupt_char(ch, u / p))
        else:
            out.append(ch)
    return "".join(out)


def extract_text(
    doc: DocumentArtifact,
    noise_factor: float,
    templates: dict[str, TemplateSpec],
    seed: int = 0,
    base_char_err: float = BASE_CHAR_ERR,
    submission_id: str = "",
) -> OcrResult:
    """Extract template fields from the text grid through the noise channel."""
    template = templates.get(doc.template_id)
    if template is None:
        raise UnknownTemplate(doc.template_id)
    p = base_char_err * noise_factor
    fields: dict[str, str] = {}
    unparsed = 0
    for fld, (row, col, width) in template.field_layout.items():
        label = FIELD_LABELS[fld]
        best_row, best_score = None, None
        lo = max(0, row - ROW_SEARCH_RADIUS)
        hi = min(len(doc.text_grid) - 1, row + ROW_SEARCH_RADIUS)
        for r in range(lo, hi + 1):
            prefix = doc.text_grid[r][:col].strip()
            score = levenshtein(prefix, label)
            if best_score is None or score < best_score:
                best_row, best_score = r, score
        if best_score is None or best_score > LABEL_MATCH_MAX_DISTANCE:
            unparsed += 1
            continue
        raw = doc.text_grid[best_row][col : col + width].strip()
        rng = derive_rng(seed, "ocr", submission_id, fld)
        uniforms = rng.random(len(raw)) if raw else []
        fields[fld] = _apply_noise(raw, p, uniforms)
    return OcrResult(
        submission_id=submission_id,
        fields=fields,
        char_error_rate=None,  # computed against truth only by the metrics layer
        unparsed_lines=unparsed,
    )


def check_digit(id_number: str) -> bool:
    """Validate the trailing check digit: sum(i * d_i, i=1..8) mod 10 == d_9."""
    if len(id_number) != 9 or not id_number.isdigit():
        raise MalformedIdNumber(id_number)
    total = sum(i * int(d) for i, d in enumerate(id_number[:8], start=1))
    return total % 10 == int(id_number[8])


@dataclass(frozen=True)
class DeviationWeights:
    layout: float = W_LAYOUT
    texture: float = W_TEXTURE
    formats: float = W_FORMAT
    check_digit: float = W_CHECK_DIGIT


FULL_WEIGHTS = DeviationWeights()
TEMPLATE_ONLY_WEIGHTS = DeviationWeights(texture=0.0, check_digit=0.0)
OCR_TEMPLATE_WEIGHTS = DeviationWeights(texture=0.0)


def template_deviation(
    doc: DocumentArtifact,
    ocr: OcrResult,
    template: TemplateSpec,
    threshold: float = DOC_FORGED_THRESHOLD,
    weights: DeviationWeights = FULL_WEIGHTS,
) -> TemplateReport:
    """Score the document against its template and classify forged/authentic."""
    if doc.layout_offsets:
        mean_offset = sum(
            math.hypot(dr, dc) for dr, dc in doc.layout_offsets.values()
        ) / len(doc.layout_offsets)
    else:
        mean_offset = 0.0
    layout_dev = min(max(mean_offset / LAYOUT_NORM_CELLS, 0.0), 1.0)

    ref = template.reference_texture
    distance = math.sqrt(sum((a - b) ** 2 for a, b in zip(doc.texture_signature, ref)))
    texture_dev = min(max(distance / TEXTURE_NORM, 0.0), 1.0)

    patterns = template.compiled_formats()
    total = len(template.field_layout)
    violating = 0
    for fld in template.field_layout:
        value = ocr.fields.get(fld)
        if value is None or not patterns[fld].match(value):
            violating += 1  # unparseable fields cannot be format-verified
    format_violation_frac = violating / total if total else 0.0

    extracted_id = ocr.fields.get("id_number", "")
    try:
        cd_fail = not check_digit(extracted_id)
    except MalformedIdNumber:
        cd_fail = False  # malformed ids already count as format violations

    deviation = (
        weights.layout * layout_dev
        + weights.texture * texture_dev
        + weights.formats * format_violation_frac
        + weights.check_digit * (1.0 if cd_fail else 0.0)
    )
    deviation = min(max(deviation, 0.0), 1.0)
    return TemplateReport(
        submission_id=ocr.submission_id,
        template_id=doc.template_id,
        layout_dev=quantize9(layout_dev),
        texture_dev=quantize9(texture_dev),
        format_violation_frac=quantize9(format_violation_frac),
        check_digit_fail=cd_fail,
        deviation=quantize9(deviation),
        forged=deviation >= threshold,
    )
