"""Identity linking: cross-modal consistency over embeddings, text and metadata."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .docforensics import levenshtein
from .domain import SubmissionMetadata, quantize9

W_COSINE = 0.7
W_NAME = 0.2
W_GEO = 0.1
NAME_SIMILARITY_THRESHOLD = 0.8
GEO_ANOMALY_WEIGHT = 0.3
DEVICE_REUSE_WEIGHT = 0.1
DEVICE_REUSE_CAP = 7


class MissingModality(ValueError):
    """Both embeddings are required for the full link computation."""


class DegenerateEmbedding(ValueError):
    """An embedding with zero norm cannot be compared."""


@dataclass(frozen=True)
class LinkReport:
    submission_id: str
    cos_sim: Optional[float]
    link_score: Optional[float]
    name_match: bool
    geo_consistent: bool
    device_reuse_count: int
    metadata_anomaly: float


class DeviceIndex:
    """Single-writer device velocity index, keyed by arrival order.

    Reuse counts consider only submissions that arrived earlier, so the
    count for a given submission is identical no matter how task execution
    interleaves across cases.
    """

    def __init__(self) -> None:
        self._arrivals: dict[str, list[int]] = {}

    def register(self, arrival_index: int, fingerprint: str) -> None:
        self._arrivals.setdefault(fingerprint, []).append(arrival_index)

    def prior_count(self, arrival_index: int, fingerprint: str) -> int:
        return sum(1 for i in self._arrivals.get(fingerprint, ()) if i < arrival_index)


def cosine_similarity(u: tuple[float, ...], v: tuple[float, ...]) -> float:
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0.0 or nv == 0.0:
        raise DegenerateEmbedding("zero-norm embedding")
    dot = sum(a * b for a, b in zip(u, v))
    return min(max(dot / (nu * nv), -1.0), 1.0)


def name_similarity(a: str, b: str) -> float:
    """Normalized edit similarity, case-folded and whitespace-collapsed."""
    na = " ".join(a.casefold().split())
    nb = " ".join(b.casefold().split())
    if not na and not nb:
        return 1.0
    longest = max(len(na), len(nb))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(na, nb) / longest


def _metadata_anomaly(geo_consistent: bool, device_reuse_count: int) -> float:
    raw = GEO_ANOMALY_WEIGHT * (0.0 if geo_consistent else 1.0) + DEVICE_REUSE_WEIGHT * min(
        device_reuse_count, DEVICE_REUSE_CAP
    )
    return quantize9(min(max(raw, 0.0), 1.0))


def link(
    face_embedding: tuple[float, ...],
    photo_embedding: tuple[float, ...],
    ocr_name: str,
    meta: SubmissionMetadata,
    device_reuse_count: int,
    submission_id: str = "",
) -> LinkReport:
    """Full cross-modal link: embeddings, OCR name vs declared name, geo, device."""
    if not face_embedding or not photo_embedding:
        raise MissingModality(submission_id)
    cos = cosine_similarity(face_embedding, photo_embedding)
    name_match = name_similarity(ocr_name, meta.declared_name) >= NAME_SIMILARITY_THRESHOLD
    geo_consistent = meta.geolocation == meta.declared_jurisdiction
    score = (
        W_COSINE * (cos + 1.0) / 2.0
        + W_NAME * (1.0 if name_match else 0.0)
        + W_GEO * (1.0 if geo_consistent else 0.0)
    )
    return LinkReport(
        submission_id=submission_id,
        cos_sim=quantize9(cos),
        link_score=quantize9(min(max(score, 0.0), 1.0)),
        name_match=name_match,
        geo_consistent=geo_consistent,
        device_reuse_count=device_reuse_count,
        metadata_anomaly=_metadata_anomaly(geo_consistent, device_reuse_count),
    )


def link_metadata_only(
    ocr_name: str,
    meta: SubmissionMetadata,
    device_reuse_count: int,
    submission_id: str = "",
) -> LinkReport:
    """Degenerate link for single-modality cases: no embeddings, no link score."""
    name_match = name_similarity(ocr_name, meta.declared_name) >= NAME_SIMILARITY_THRESHOLD
    geo_consistent = meta.geolocation == meta.declared_jurisdiction
    return LinkReport(
        submission_id=submission_id,
        cos_sim=None,
        link_score=None,
        name_match=name_match,
        geo_consistent=geo_consistent,
        device_reuse_count=device_reuse_count,
        metadata_anomaly=_metadata_anomaly(geo_consistent, device_reuse_count),
    )
