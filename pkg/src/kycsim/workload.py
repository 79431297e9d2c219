"""Synthetic multimodal fraud workload generator.

Synthesizes stratified corpora of submissions: genuine/spoofed/synthetic
selfie feature records, authentic/forged documents rendered onto real
templates, identity-matched or mismatched embedding pairs, and Poisson
arrival metadata. Strata sizes scale from the built-in census
(20k/10k/5k selfies, 50k/10k documents). All randomness is keyed to the
config seed; a config maps to exactly one corpus, byte for byte.

Document counts exceed selfie counts, so the excess documents arrive as
document-only submissions with an explicit missing selfie marker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .domain import (
    EMBEDDING_DIM,
    TEXTURE_DIM,
    DocumentArtifact,
    GroundTruth,
    SelfieArtifact,
    Submission,
    SubmissionMetadata,
    quantize9,
)
from .streams import derive_rng
from .templates import BUILTIN_TEMPLATES, REQUIRED_FIELDS, TemplateSpec, render_document

BASE_CLASS_COUNTS = {
    "selfie_genuine": 20_000,
    "selfie_spoof": 10_000,
    "selfie_deepfake": 5_000,
    "document_real": 50_000,
    "document_synthetic": 10_000,
}

# Class-conditional feature means: (blink, temporal, frequency, quality).
SELFIE_FEATURE_MEANS = {
    "genuine": (0.9, 0.1, 0.1, 0.8),
    "spoof_print": (0.05, 0.3, 0.5, 0.75),
    "spoof_replay": (0.4, 0.55, 0.45, 0.70),
    "deepfake": (0.5, 0.7, 0.65, 0.75),
}
SELFIE_FEATURE_SIGMA = 0.05

MATCH_COSINE = (0.92, 0.04)
MISMATCH_COSINE = (0.15, 0.15)

# Tamper/synthetic forgery shape relative to the subtlety knob sigma_f.
TAMPER_DRIFT_CELLS = 6.0  # layout drift stddev = TAMPER_DRIFT_CELLS * sigma_f
SYNTH_TEXTURE_SHIFT = 4.5  # texture displacement mean = SYNTH_TEXTURE_SHIFT * sigma_f
AUTHENTIC_OFFSET_PROB = 0.08  # chance of a 1-row print offset (rows recover via labels)
AUTHENTIC_TEXTURE_SIGMA = 0.02
TAMPER_MODE_PROB = 0.65

SELFIE_MEDIA = (("image/jpeg", "FFD8"), ("video/mp4", "6674"))
DOCUMENT_MEDIA = (("application/pdf", "2550"), ("image/png", "8950"))

STRICT_JURISDICTIONS = ("US", "DE")
LENIENT_JURISDICTIONS = ("GB", "SG", "BR", "IN")

# Which registered ID formats a jurisdiction issues (absent = all).
JURISDICTION_TEMPLATES = {"DE": ("TPL-A", "TPL-B")}

_FIRST_NAMES = (
    "ALICE", "BRUNO", "CARLA", "DEVAN", "ELENA", "FARID", "GRETA", "HENRI",
    "IMANI", "JONAS", "KARIM", "LAILA", "MARCO", "NOOR", "OMAR", "PRIYA",
    "QUINN", "ROSA", "SAMIR", "TARA", "UMA", "VIKTOR", "WANDA", "XENIA",
    "YUSUF", "ZARA",
)
_LAST_NAMES = (
    "ANDERSEN", "BAPTISTE", "CASTILLO", "DUBOIS", "EKLUND", "FERRARI",
    "GARCIA", "HOFFMANN", "IBRAHIM", "JOHNSON", "KOVACS", "LINDQVIST",
    "MORETTI", "NAKAMURA", "OKAFOR", "PETROV", "QURESHI", "ROSSI",
    "SILVA", "TANAKA", "UDDIN", "VARGA", "WATANABE", "XIONG", "YILMAZ",
    "ZHANG",
)
_STREETS = ("MAPLE", "CEDAR", "HARBOR", "STATION", "GARDEN", "RIVER", "SUNSET", "ORCHARD")
_STREET_SUFFIX = ("ST", "AVE", "RD", "LANE")


class NoTemplates(ValueError):
    """Corpus generation requires at least one registered template."""


@dataclass(frozen=True)
class Burst:
    start: float
    duration: float
    multiplier: float


@dataclass(frozen=True)
class WorkloadConfig:
    seed: int = 7
    scale: float = 0.1
    class_counts: Optional[dict[str, int]] = None
    forgery_subtlety: float = 0.35
    arrival_rate: float = 50.0
    burst: Optional[Burst] = None
    fraud_correlation: float = 0.5
    mismatch_rate: float = 0.14
    fabricated_template_rate: float = 0.35
    noise_scale: float = 1.0
    feature_sigma: float = SELFIE_FEATURE_SIGMA

    def resolved_counts(self) -> dict[str, int]:
        if self.class_counts is not None:
            return dict(self.class_counts)
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        return {k: _round_half_up(v * self.scale) for k, v in BASE_CLASS_COUNTS.items()}


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def check_digit_for(digits8: str) -> str:
    """Check digit of an 8-digit body: weighted sum (i * d_i) mod 10."""
    total = sum(i * int(d) for i, d in enumerate(digits8, start=1))
    return str(total % 10)


def _truncated_normal(rng: np.random.Generator, mean: float, sigma: float, lo: float = 0.0, hi: float = 1.0) -> float:
    if sigma <= 0:
        return min(max(mean, lo), hi)
    for _ in range(1000):
        x = rng.normal(mean, sigma)
        if lo <= x <= hi:
            return float(x)
    return min(max(mean, lo), hi)


def _unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _quantized(vec: np.ndarray) -> tuple[float, ...]:
    return tuple(quantize9(float(x)) for x in vec)


def synth_selfie(selfie_class: str, rng: np.random.Generator, sigma: float = SELFIE_FEATURE_SIGMA) -> SelfieArtifact:
    """Draw selfie features from the class-conditional truncated Gaussians.

    The face embedding is a placeholder unit vector; corpus assembly
    replaces it with the identity-paired embedding.
    """
    blink, temporal, frequency, quality = SELFIE_FEATURE_MEANS[selfie_class]
    mime, token = SELFIE_MEDIA[int(rng.integers(len(SELFIE_MEDIA)))]
    return SelfieArtifact(
        declared_mime=mime,
        magic_token=token,
        quality=quantize9(_truncated_normal(rng, quality, sigma)),
        blink_plausibility=quantize9(_truncated_normal(rng, blink, sigma)),
        temporal_inconsistency=quantize9(_truncated_normal(rng, temporal, sigma)),
        frequency_artifact=quantize9(_truncated_normal(rng, frequency, sigma)),
        face_embedding=_quantized(_unit_vector(rng, EMBEDDING_DIM)),
    )


def synth_identity_pair(match: bool, rng: np.random.Generator) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Unit embedding pair with class-conditional cosine similarity."""
    mean, sigma = MATCH_COSINE if match else MISMATCH_COSINE
    c = _truncated_normal(rng, mean, sigma, lo=-1.0, hi=1.0)
    u = _unit_vector(rng, EMBEDDING_DIM)
    w = _unit_vector(rng, EMBEDDING_DIM)
    w = w - np.dot(w, u) * u
    w = w / np.linalg.norm(w)
    v = c * u + math.sqrt(max(0.0, 1.0 - c * c)) * w
    return _quantized(u), _quantized(v)


def _draw_name(rng: np.random.Generator) -> str:
    return f"{_FIRST_NAMES[int(rng.integers(len(_FIRST_NAMES)))]} {_LAST_NAMES[int(rng.integers(len(_LAST_NAMES)))]}"


def _draw_values(rng: np.random.Generator, name: Optional[str] = None) -> dict[str, str]:
    if name is None:
        name = _draw_name(rng)
    year = 1950 + int(rng.integers(56))
    month = 1 + int(rng.integers(12))
    day = 1 + int(rng.integers(28))
    body = "".join(str(int(d)) for d in rng.integers(0, 10, size=8))
    number = 1 + int(rng.integers(199))
    street = _STREETS[int(rng.integers(len(_STREETS)))]
    suffix = _STREET_SUFFIX[int(rng.integers(len(_STREET_SUFFIX)))]
    return {
        "name": name,
        "dob": f"{year:04d}-{month:02d}-{day:02d}",
        "id_number": body + check_digit_for(body),
        "address": f"{number} {street} {suffix}",
    }


def _break_check_digit(id_number: str, rng: np.random.Generator) -> str:
    body, check = id_number[:8], id_number[8]
    wrong = (int(check) + 1 + int(rng.integers(9))) % 10
    if str(wrong) == check:
        wrong = (wrong + 1) % 10
    return body + str(wrong)


def _authentic_offsets(rng: np.random.Generator, noise_scale: float) -> dict[str, tuple[int, int]]:
    # Genuine print jitter is vertical only: row shifts are recovered by the
    # reader's label search, while column shifts would corrupt every value.
    offsets = {}
    p = AUTHENTIC_OFFSET_PROB * noise_scale
    for fld in REQUIRED_FIELDS:
        dr = int(rng.choice((-1, 1))) if rng.random() < p else 0
        offsets[fld] = (dr, 0)
    return offsets


def _authentic_texture(template: TemplateSpec, rng: np.random.Generator, noise_scale: float) -> tuple[float, ...]:
    ref = np.asarray(template.reference_texture)
    noisy = ref + rng.normal(0.0, AUTHENTIC_TEXTURE_SIGMA * noise_scale, size=TEXTURE_DIM)
    return _quantized(noisy)


def synth_document(
    document_class: str,
    template: TemplateSpec,
    rng: np.random.Generator,
    sigma_f: float = 0.35,
    noise_scale: float = 1.0,
    fabricated_template_rate: float = 0.35,
    name: Optional[str] = None,
    photo_embedding: Optional[tuple[float, ...]] = None,
) -> DocumentArtifact:
    """Synthesize one document of the requested class on the given template.

    authentic        small print jitter, texture near reference, valid check digit
    forged_tamper    one or more of layout drift / overwritten field / broken
                     check digit, magnitudes scaled by sigma_f
    forged_synthetic perfect layout and visible formats; the hidden integrity
                     cues are off: texture displaced by a distance around
                     SYNTH_TEXTURE_SHIFT * sigma_f, check digit invalid, and
                     sometimes a fabricated template id
    """
    values = _draw_values(rng, name=name)
    template_id = template.template_id
    offsets = _authentic_offsets(rng, noise_scale)
    texture = _authentic_texture(template, rng, noise_scale)

    if document_class == "forged_tamper":
        modes = [m for m in ("layout", "overwrite", "check_digit") if rng.random() < TAMPER_MODE_PROB]
        if not modes:
            modes = [("layout", "overwrite", "check_digit")[int(rng.integers(3))]]
        if "layout" in modes:
            drift_sigma = TAMPER_DRIFT_CELLS * sigma_f
            offsets = {
                fld: (int(round(rng.normal(0, drift_sigma))), int(round(rng.normal(0, drift_sigma))))
                for fld in REQUIRED_FIELDS
            }
        if "check_digit" in modes:
            values["id_number"] = _break_check_digit(values["id_number"], rng)
        if "overwrite" in modes:
            n_fields = 1 + int(rng.integers(2))
            chosen = rng.choice(len(REQUIRED_FIELDS), size=n_fields, replace=False)
            for idx in chosen:
                values[REQUIRED_FIELDS[int(idx)]] = "##VOID##"
    elif document_class == "forged_synthetic":
        offsets = {fld: (0, 0) for fld in REQUIRED_FIELDS}
        distance = abs(rng.normal(SYNTH_TEXTURE_SHIFT * sigma_f, sigma_f / 2.0))
        direction = _unit_vector(rng, TEXTURE_DIM)
        texture = _quantized(np.asarray(template.reference_texture) + distance * direction)
        values["id_number"] = _break_check_digit(values["id_number"], rng)
        if rng.random() < fabricated_template_rate:
            template_id = f"TPL-X{int(rng.integers(10, 100))}"
    elif document_class != "authentic":
        raise ValueError(f"unknown document class {document_class!r}")

    mime, token = DOCUMENT_MEDIA[int(rng.integers(len(DOCUMENT_MEDIA)))]
    if photo_embedding is None:
        photo_embedding = _quantized(_unit_vector(rng, EMBEDDING_DIM))
    return DocumentArtifact(
        declared_mime=mime,
        magic_token=token,
        template_id=template_id,
        text_grid=render_document(template, values, offsets),
        layout_offsets=offsets,
        texture_signature=texture,
        photo_embedding=photo_embedding,
    )


def document_true_values(doc: DocumentArtifact, template: TemplateSpec) -> dict[str, str]:
    """Read the rendered (pre-OCR-noise) field values back off the grid."""
    values = {}
    for fld, (row, col, width) in template.field_layout.items():
        dr, dc = doc.layout_offsets.get(fld, (0, 0))
        r = min(max(row + dr, 0), len(doc.text_grid) - 1)
        line = doc.text_grid[r]
        start = max(col + dc, 0)
        values[fld] = line[start : start + width].strip()
    return values


def _arrival_times(rng: np.random.Generator, n: int, rate: float, burst: Optional[Burst]) -> list[float]:
    times = []
    t = 0.0
    for _ in range(n):
        effective = rate
        if burst is not None and burst.start <= t < burst.start + burst.duration:
            effective = rate * burst.multiplier
        t += float(rng.exponential(1.0 / effective))
        times.append(quantize9(t))
    return times


def _class_lists(counts: dict[str, int]) -> tuple[list[str], list[str]]:
    n_spoof = counts.get("selfie_spoof", 0)
    n_forged = counts.get("document_synthetic", 0)
    selfies = (
        ["genuine"] * counts.get("selfie_genuine", 0)
        + ["spoof_print"] * (n_spoof - n_spoof // 2)
        + ["spoof_replay"] * (n_spoof // 2)
        + ["deepfake"] * counts.get("selfie_deepfake", 0)
    )
    documents = (
        ["authentic"] * counts.get("document_real", 0)
        + ["forged_tamper"] * (n_forged - n_forged // 2)
        + ["forged_synthetic"] * (n_forged // 2)
    )
    return selfies, documents


def _paired_classes(cfg: WorkloadConfig, selfies: list[str], documents: list[str]) -> list[tuple[str, str]]:
    """Pair selfie and document classes; excess of either side pairs with
    a missing marker. A fraction of fraudulent documents (the fraud
    correlation) is co-located with fraudulent selfies."""
    rng = derive_rng(cfg.seed, "pairing")
    n = max(len(selfies), len(documents))
    selfie_slots = selfies + ["missing"] * (n - len(selfies))
    doc_slots = documents + ["missing"] * (n - len(documents))
    rng.shuffle(selfie_slots)

    fraud_docs = [c for c in doc_slots if c.startswith("forged")]
    other_docs = [c for c in doc_slots if not c.startswith("forged")]
    rng.shuffle(fraud_docs)
    rng.shuffle(other_docs)

    fraud_selfie_idx = [i for i, c in enumerate(selfie_slots) if c not in ("genuine", "missing")]
    aligned = _round_half_up(cfg.fraud_correlation * min(len(fraud_docs), len(fraud_selfie_idx)))
    chosen = list(rng.choice(fraud_selfie_idx, size=aligned, replace=False)) if aligned else []
    assignment: dict[int, str] = {}
    for i in chosen:
        assignment[int(i)] = fraud_docs.pop()
    rest = fraud_docs + other_docs
    rng.shuffle(rest)
    out = []
    for i, s_cls in enumerate(selfie_slots):
        d_cls = assignment.get(i)
        if d_cls is None:
            d_cls = rest.pop()
        out.append((s_cls, d_cls))
    return out


def _mismatch_flags(cfg: WorkloadConfig, pairs: list[tuple[str, str]]) -> list[bool]:
    """Identity mismatches sit on selfie-bearing submissions, biased toward
    fraudulent documents by the fraud correlation."""
    rng = derive_rng(cfg.seed, "mismatch")
    eligible = [i for i, (s, _) in enumerate(pairs) if s != "missing"]
    n_mismatch = _round_half_up(cfg.mismatch_rate * len(eligible))
    doc_fraud = [i for i in eligible if pairs[i][1].startswith("forged")]
    n_biased = min(_round_half_up(cfg.fraud_correlation * n_mismatch), len(doc_fraud))
    chosen = set(int(i) for i in rng.choice(doc_fraud, size=n_biased, replace=False)) if n_biased else set()
    remaining = [i for i in eligible if i not in chosen]
    extra = n_mismatch - len(chosen)
    if extra > 0 and remaining:
        extra = min(extra, len(remaining))
        chosen.update(int(i) for i in rng.choice(remaining, size=extra, replace=False))
    return [i in chosen for i in range(len(pairs))]


def generate_corpus(cfg: WorkloadConfig, templates: Optional[dict[str, TemplateSpec]] = None) -> list[Submission]:
    """Generate the full stratified corpus for a config (pure in the seed)."""
    if templates is None:
        templates = BUILTIN_TEMPLATES
    if not templates:
        raise NoTemplates("at least one template must be registered")
    counts = cfg.resolved_counts()
    selfies, documents = _class_lists(counts)
    pairs = _paired_classes(cfg, selfies, documents)
    mismatches = _mismatch_flags(cfg, pairs)
    arrival_rng = derive_rng(cfg.seed, "arrivals")
    times = _arrival_times(arrival_rng, len(pairs), cfg.arrival_rate, cfg.burst)
    template_ids = sorted(templates)

    ring_pool_size = max(1, sum(mismatches) // 28)
    submissions = []
    for idx, (selfie_cls, doc_cls) in enumerate(pairs):
        rng = derive_rng(cfg.seed, "submission", idx)
        submission_id = f"S{idx:06d}"
        mismatch = mismatches[idx]

        doc_name = _draw_name(rng)
        declared = doc_name if not mismatch else _draw_name(rng)
        if mismatch and declared == doc_name:
            declared = _draw_name(rng)

        if selfie_cls == "missing":
            selfie = SelfieArtifact.absent()
            face_emb = None
            photo_emb = None
        else:
            selfie = synth_selfie(selfie_cls, rng, sigma=cfg.feature_sigma)
            face_emb, photo_emb = synth_identity_pair(not mismatch, rng)
            selfie = SelfieArtifact(
                declared_mime=selfie.declared_mime,
                magic_token=selfie.magic_token,
                quality=selfie.quality,
                blink_plausibility=selfie.blink_plausibility,
                temporal_inconsistency=selfie.temporal_inconsistency,
                frequency_artifact=selfie.frequency_artifact,
                face_embedding=face_emb,
            )

        # Jurisdiction first: applicants hold the ID formats their
        # jurisdiction issues (DE issues only TPL-A/TPL-B).
        if selfie_cls == "missing":
            jurisdiction = LENIENT_JURISDICTIONS[int(rng.integers(len(LENIENT_JURISDICTIONS)))]
        else:
            all_juris = STRICT_JURISDICTIONS + LENIENT_JURISDICTIONS
            jurisdiction = all_juris[int(rng.integers(len(all_juris)))]

        if doc_cls == "missing":
            document = DocumentArtifact.absent()
        else:
            pool = [t for t in template_ids if t in JURISDICTION_TEMPLATES.get(jurisdiction, template_ids)]
            if not pool:
                pool = template_ids
            template = templates[pool[int(rng.integers(len(pool)))]]
            document = synth_document(
                doc_cls,
                template,
                rng,
                sigma_f=cfg.forgery_subtlety,
                noise_scale=cfg.noise_scale,
                fabricated_template_rate=cfg.fabricated_template_rate,
                name=doc_name,
                photo_embedding=photo_emb,
            )

        doc_fraud = doc_cls.startswith("forged")
        is_fraud = (selfie_cls not in ("genuine", "missing")) or doc_fraud or mismatch

        # Fraud rings reuse a small device pool; mismatched identities are
        # usually submitted from outside the declared jurisdiction.
        if mismatch:
            device = f"dev-ring{int(rng.integers(ring_pool_size)):03d}"
            geo_mismatch = rng.random() < 0.9
        else:
            device = f"dev-{idx:06d}"
            geo_mismatch = rng.random() < 0.05
        if geo_mismatch:
            others = [j for j in STRICT_JURISDICTIONS + LENIENT_JURISDICTIONS if j != jurisdiction]
            geolocation = others[int(rng.integers(len(others)))]
        else:
            geolocation = jurisdiction

        metadata = SubmissionMetadata(
            device_fingerprint=device,
            geolocation=geolocation,
            declared_jurisdiction=jurisdiction,
            channel=("mobile", "web")[int(rng.integers(2))],
            submitted_at=times[idx],
            declared_name=declared,
        )
        ground_truth = GroundTruth(
            selfie_class=selfie_cls if selfie_cls != "missing" else "genuine",
            document_class=doc_cls if doc_cls != "missing" else "authentic",
            identity_match=not mismatch,
            is_fraudulent=is_fraud,
        )
        submissions.append(
            Submission(
                submission_id=submission_id,
                selfie=selfie,
                document=document,
                metadata=metadata,
                ground_truth=ground_truth,
            )
        )
    return submissions
