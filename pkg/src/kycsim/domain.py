"""Shared domain types and the canonical wire/audit serialization.

Every value exchanged between services, the orchestrator, the audit chain
and the report files is one of these records. All records are immutable
after construction so they can be shared freely across concurrent
consumers. Canonical serialization is byte-deterministic: hashing and
file-level determinism checks depend on it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Any, Optional

EMBEDDING_DIM = 32
TEXTURE_DIM = 8

SELFIE_CLASSES = ("genuine", "spoof_print", "spoof_replay", "deepfake")
DOCUMENT_CLASSES = ("authentic", "forged_tamper", "forged_synthetic")
CHANNELS = ("mobile", "web")
RISK_BANDS = ("approve", "review", "reject")


class NonFiniteValue(ValueError):
    """A real field held NaN or an infinity; such records cannot be serialized."""


def quantize9(x: float) -> float:
    """Round a real to 9 significant digits, the canonical wire precision.

    Generated domain values are quantized at creation so that
    parse(canonical_serialize(x)) reproduces x exactly.
    """
    if not math.isfinite(x):
        raise NonFiniteValue(f"non-finite real: {x!r}")
    return float(format(x, ".9g"))


def _format_real(x: float) -> str:
    if not math.isfinite(x):
        raise NonFiniteValue(f"non-finite real: {x!r}")
    if x == 0.0:  # normalize -0.0
        return "0"
    return format(x, ".9g")


def _canonical_write(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(_format_real(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _canonical_write(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        first = True
        for key in sorted(value, key=lambda k: k.encode("utf-8")):
            item = value[key]
            if item is None:  # unset markers are omitted
                continue
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _canonical_write(item, out)
        out.append("}")
    elif is_dataclass(value):
        _canonical_write(record_to_dict(value), out)
    else:
        raise TypeError(f"not canonically serializable: {type(value).__name__}")


def record_to_dict(record: Any) -> dict:
    """Convert a domain dataclass to a plain dict (recursively)."""
    d = {}
    for f in fields(record):
        v = getattr(record, f.name)
        if is_dataclass(v):
            v = record_to_dict(v)
        d[f.name] = v
    return d


def canonical_serialize(record: Any) -> bytes:
    """Serialize a domain value to its canonical byte sequence.

    UTF-8 JSON with object keys sorted ascending bytewise, no insignificant
    whitespace, reals rendered shortest-form at 9 significant digits, and
    fields holding None (unset markers) omitted. Structurally equal records
    always produce identical bytes.
    """
    out: list[str] = []
    _canonical_write(record, out)
    return "".join(out).encode("utf-8")


def canonical_parse(data: bytes) -> Any:
    """Parse canonical bytes back into plain dict/list/scalar values."""
    return json.loads(data.decode("utf-8"))


@dataclass(frozen=True)
class SelfieArtifact:
    """Structured feature record standing in for selfie/video media."""

    declared_mime: str
    magic_token: str
    quality: float
    blink_plausibility: float
    temporal_inconsistency: float
    frequency_artifact: float
    face_embedding: tuple[float, ...]
    missing: bool = False

    @staticmethod
    def absent() -> "SelfieArtifact":
        return SelfieArtifact(
            declared_mime="",
            magic_token="",
            quality=0.0,
            blink_plausibility=0.0,
            temporal_inconsistency=0.0,
            frequency_artifact=0.0,
            face_embedding=(0.0,) * EMBEDDING_DIM,
            missing=True,
        )


@dataclass(frozen=True)
class DocumentArtifact:
    """Structured feature record standing in for a scanned identity document."""

    declared_mime: str
    magic_token: str
    template_id: str
    text_grid: tuple[str, ...]
    layout_offsets: dict[str, tuple[int, int]]
    texture_signature: tuple[float, ...]
    photo_embedding: tuple[float, ...]
    missing: bool = False

    @staticmethod
    def absent() -> "DocumentArtifact":
        return DocumentArtifact(
            declared_mime="",
            magic_token="",
            template_id="",
            text_grid=(),
            layout_offsets={},
            texture_signature=(0.0,) * TEXTURE_DIM,
            photo_embedding=(0.0,) * EMBEDDING_DIM,
            missing=True,
        )


@dataclass(frozen=True)
class SubmissionMetadata:
    device_fingerprint: str
    geolocation: str
    declared_jurisdiction: str
    channel: str
    submitted_at: float
    declared_name: str = ""


@dataclass(frozen=True)
class GroundTruth:
    """Hidden labels. Visible only to the workload generator and metrics."""

    selfie_class: str
    document_class: str
    identity_match: bool
    is_fraudulent: bool

    def consistent(self) -> bool:
        expect = (
            self.selfie_class != "genuine"
            or self.document_class != "authentic"
            or not self.identity_match
        )
        return self.is_fraudulent == expect


@dataclass(frozen=True)
class Submission:
    submission_id: str
    selfie: SelfieArtifact
    document: DocumentArtifact
    metadata: SubmissionMetadata
    ground_truth: GroundTruth

    def service_view(self) -> "SubmissionView":
        """Type-gated view handed to services: no ground truth."""
        return SubmissionView(
            submission_id=self.submission_id,
            selfie=self.selfie,
            document=self.document,
            metadata=self.metadata,
        )


@dataclass(frozen=True)
class SubmissionView:
    """What detection services are allowed to see of a submission."""

    submission_id: str
    selfie: SelfieArtifact
    document: DocumentArtifact
    metadata: SubmissionMetadata


@dataclass(frozen=True)
class ModalityScores:
    """Per-case blackboard of verification outputs; unset until produced."""

    deepfake_score: Optional[float] = None
    liveness_pass: Optional[bool] = None
    doc_deviation: Optional[float] = None
    ocr_fields: Optional[dict[str, str]] = None
    link_score: Optional[float] = None
    metadata_anomaly: Optional[float] = None
    quality: Optional[float] = None

    def with_set(self, **kwargs: Any) -> "ModalityScores":
        """Return a copy with the given scores set; a set score is immutable."""
        current = record_to_dict(self)
        for key, value in kwargs.items():
            if key not in current:
                raise KeyError(key)
            if current[key] is not None and current[key] != value:
                raise ValueError(f"score {key} already set for this case")
            current[key] = value
        return ModalityScores(**current)

    def risk_components(self) -> dict[str, float]:
        """Risk-direction components of the set modalities (unset omitted)."""
        parts: dict[str, float] = {}
        if self.deepfake_score is not None:
            parts["deepfake"] = self.deepfake_score
        if self.doc_deviation is not None:
            parts["document"] = self.doc_deviation
        if self.link_score is not None:
            parts["link"] = 1.0 - self.link_score
        if self.metadata_anomaly is not None:
            parts["metadata"] = self.metadata_anomaly
        return parts


@dataclass(frozen=True)
class RiskAssessment:
    submission_id: str
    base_risk: float
    final_risk: float
    overrides: tuple[str, ...]
    band: str
    modality_scores: ModalityScores


def _violation(out: list[str], name: str, rule: str) -> None:
    out.append(f"{name}: {rule}")


def _check_unit(out: list[str], name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        _violation(out, name, f"value {value} outside [0,1]")


def validate_submission(s: Submission) -> list[str]:
    """Return structural violations of the domain invariants (empty if clean)."""
    out: list[str] = []
    if not s.submission_id:
        _violation(out, "submission_id", "must be non-empty")

    selfie = s.selfie
    if len(selfie.face_embedding) != EMBEDDING_DIM:
        _violation(out, "selfie.face_embedding", f"dimension {len(selfie.face_embedding)} != {EMBEDDING_DIM}")
    for name in ("quality", "blink_plausibility", "temporal_inconsistency", "frequency_artifact"):
        _check_unit(out, f"selfie.{name}", getattr(selfie, name))
    if selfie.missing:
        zeros = all(
            getattr(selfie, name) == 0.0
            for name in ("quality", "blink_plausibility", "temporal_inconsistency", "frequency_artifact")
        ) and all(v == 0.0 for v in selfie.face_embedding)
        if not zeros or selfie.declared_mime or selfie.magic_token:
            _violation(out, "selfie.missing", "missing artifact must carry sentinel zeros")

    doc = s.document
    if len(doc.texture_signature) != TEXTURE_DIM:
        _violation(out, "document.texture_signature", f"dimension {len(doc.texture_signature)} != {TEXTURE_DIM}")
    if len(doc.photo_embedding) != EMBEDDING_DIM:
        _violation(out, "document.photo_embedding", f"dimension {len(doc.photo_embedding)} != {EMBEDDING_DIM}")
    if doc.missing and (doc.text_grid or doc.template_id or doc.declared_mime):
        _violation(out, "document.missing", "missing artifact must carry sentinel zeros")
    if doc.missing and selfie.missing:
        _violation(out, "submission", "at least one modality must be present")

    meta = s.metadata
    if meta.submitted_at < 0:
        _violation(out, "metadata.submitted_at", "timestamp must be non-negative")
    if meta.channel not in CHANNELS:
        _violation(out, "metadata.channel", f"unknown channel {meta.channel!r}")

    gt = s.ground_truth
    if gt.selfie_class not in SELFIE_CLASSES:
        _violation(out, "ground_truth.selfie_class", f"unknown class {gt.selfie_class!r}")
    if gt.document_class not in DOCUMENT_CLASSES:
        _violation(out, "ground_truth.document_class", f"unknown class {gt.document_class!r}")
    if not gt.consistent():
        _violation(out, "ground_truth", "is_fraudulent inconsistent with class labels")
    return out


def submission_from_dict(d: dict) -> Submission:
    """Rebuild a Submission from parsed canonical JSON."""
    selfie = d["selfie"]
    doc = d["document"]
    meta = d["metadata"]
    gt = d["ground_truth"]
    return Submission(
        submission_id=d["submission_id"],
        selfie=SelfieArtifact(
            declared_mime=selfie["declared_mime"],
            magic_token=selfie["magic_token"],
            quality=float(selfie["quality"]),
            blink_plausibility=float(selfie["blink_plausibility"]),
            temporal_inconsistency=float(selfie["temporal_inconsistency"]),
            frequency_artifact=float(selfie["frequency_artifact"]),
            face_embedding=tuple(float(v) for v in selfie["face_embedding"]),
            missing=selfie["missing"],
        ),
        document=DocumentArtifact(
            declared_mime=doc["declared_mime"],
            magic_token=doc["magic_token"],
            template_id=doc["template_id"],
            text_grid=tuple(doc["text_grid"]),
            layout_offsets={k: (int(v[0]), int(v[1])) for k, v in doc["layout_offsets"].items()},
            texture_signature=tuple(float(v) for v in doc["texture_signature"]),
            photo_embedding=tuple(float(v) for v in doc["photo_embedding"]),
            missing=doc["missing"],
        ),
        metadata=SubmissionMetadata(
            device_fingerprint=meta["device_fingerprint"],
            geolocation=meta["geolocation"],
            declared_jurisdiction=meta["declared_jurisdiction"],
            channel=meta["channel"],
            submitted_at=float(meta["submitted_at"]),
            declared_name=meta.get("declared_name", ""),
        ),
        ground_truth=GroundTruth(
            selfie_class=gt["selfie_class"],
            document_class=gt["document_class"],
            identity_match=gt["identity_match"],
            is_fraudulent=gt["is_fraudulent"],
        ),
    )
