"""Ingestion gateway (MIME/integrity checks) and preprocessing service."""

from __future__ import annotations

from dataclasses import dataclass

from .domain import SubmissionView, quantize9
from .streams import uniform_for

MIME_ALLOWLIST = ("image/jpeg", "image/png", "video/mp4", "application/pdf")
MAGIC_TOKENS = {
    "image/jpeg": "FFD8",
    "image/png": "8950",
    "video/mp4": "6674",
    "application/pdf": "2550",
}

QUALITY_UPLIFT = 0.25
OCR_NOISE_QUALITY_GAIN = 0.23
FACE_QUALITY_FLOOR = 0.15

# Document-only submissions have no selfie to take capture quality from;
# their scan quality is drawn (deterministically per submission) from the
# near-lossless band typical of flatbed document scans.
DOC_SCAN_QUALITY_RANGE = (0.98, 1.0)


@dataclass(frozen=True)
class IngestReport:
    submission_id: str
    mime_ok: bool
    magic_ok: bool
    completeness: tuple[str, ...]
    accepted: bool


@dataclass(frozen=True)
class PreprocessReport:
    submission_id: str
    quality_in: float
    quality_out: float
    ocr_noise_factor: float
    face_detected: bool


def ingest(view: SubmissionView) -> IngestReport:
    """Validate declared MIME types and magic tokens of present modalities."""
    present = []
    mime_ok = True
    magic_ok = True
    for modality, artifact in (("selfie", view.selfie), ("document", view.document)):
        if artifact.missing:
            continue
        present.append(modality)
        if artifact.declared_mime not in MIME_ALLOWLIST:
            mime_ok = False
        if MAGIC_TOKENS.get(artifact.declared_mime) != artifact.magic_token:
            magic_ok = False
    return IngestReport(
        submission_id=view.submission_id,
        mime_ok=mime_ok,
        magic_ok=magic_ok,
        completeness=tuple(present),
        accepted=mime_ok and magic_ok and bool(present),
    )


def _scan_quality(submission_id: str, seed: int) -> float:
    lo, hi = DOC_SCAN_QUALITY_RANGE
    u = uniform_for(seed, "doc-scan-quality", submission_id)
    return quantize9(lo + (hi - lo) * u)


def preprocess(view: SubmissionView, seed: int = 0) -> PreprocessReport:
    """Quality assessment plus artifact-noise reduction.

    quality_out = quality_in + 0.25 * (1 - quality_in), capped at 1; the OCR
    error channel is then attenuated by 1 - 0.23 * quality_out. Pure in its
    inputs, so re-running on the same submission reproduces the same report.
    """
    if not view.selfie.missing:
        quality_in = view.selfie.quality
    else:
        quality_in = _scan_quality(view.submission_id, seed)
    quality_out = min(1.0, quality_in + QUALITY_UPLIFT * (1.0 - quality_in))
    return PreprocessReport(
        submission_id=view.submission_id,
        quality_in=quality_in,
        quality_out=quantize9(quality_out),
        ocr_noise_factor=quantize9(1.0 - OCR_NOISE_QUALITY_GAIN * quality_out),
        face_detected=(not view.selfie.missing) and quality_out >= FACE_QUALITY_FLOOR,
    )
