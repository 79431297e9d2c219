"""Policy rules and the hash-chained, redacted audit log.

Every operation in a run appends one record to the chain. Record ``i``
stores the hash of record ``i-1`` and its own hash covers both that link
and its full content, so any mutation, deletion or reordering of the log
is detectable at the exact sequence number where it happened.

In redacted retention mode the five PII field values (name, dob, address,
id number, device fingerprint — plus the declared name, which is also a
name) are replaced by salted SHA-256 digests before serialization. The
salt is fixed per run and stored outside the log.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, is_dataclass
from typing import Any, Iterable, Optional, Union

from .domain import canonical_parse, canonical_serialize, record_to_dict

GENESIS_HASH = "0" * 64

PII_FIELDS = frozenset(
    {"name", "dob", "address", "id_number", "device_fingerprint", "declared_name"}
)

RETENTION_MODES = ("full", "redacted")


class AuditUnavailable(RuntimeError):
    """The audit sink failed; decision-making must halt until it recovers."""


@dataclass(frozen=True)
class PolicyRuleSet:
    jurisdiction: str
    required_modalities: frozenset[str]
    allowed_templates: Optional[frozenset[str]]  # None allows every registered template
    retention_mode: str = "redacted"
    review_required_above: Optional[float] = None


# Two strict jurisdictions and a lenient default. Strict ones demand both
# modalities and force human review above a risk floor; DE additionally
# accepts only two of the registered templates.
BUILTIN_POLICIES: dict[str, PolicyRuleSet] = {
    "US": PolicyRuleSet(
        "US",
        required_modalities=frozenset({"selfie", "document"}),
        allowed_templates=frozenset({"TPL-A", "TPL-B", "TPL-C"}),
        review_required_above=0.5,
    ),
    "DE": PolicyRuleSet(
        "DE",
        required_modalities=frozenset({"selfie", "document"}),
        allowed_templates=frozenset({"TPL-A", "TPL-B"}),
        review_required_above=0.6,
    ),
    "default": PolicyRuleSet(
        "default",
        required_modalities=frozenset({"document"}),
        allowed_templates=None,
    ),
}


@dataclass(frozen=True)
class PolicyVerdict:
    kind: str  # allow | veto | force_review
    reason: str = ""
    review_required_above: Optional[float] = None


def ruleset_for(jurisdiction: str, policies: dict[str, PolicyRuleSet]) -> PolicyRuleSet:
    return policies.get(jurisdiction) or policies["default"]


def check_policy(
    completeness: Iterable[str],
    template_id: str,
    jurisdiction: str,
    policies: dict[str, PolicyRuleSet],
    registered_templates: Iterable[str] = (),
) -> PolicyVerdict:
    """Jurisdiction gate run at decomposition time.

    Vetoes a missing required modality or a registered-but-disallowed
    template. Unregistered template ids are not a policy matter: they flow
    to document forensics as forgery evidence.
    """
    rules = ruleset_for(jurisdiction, policies)
    present = set(completeness)
    for modality in sorted(rules.required_modalities):
        if modality not in present:
            return PolicyVerdict("veto", f"missing_modality:{modality}")
    if (
        rules.allowed_templates is not None
        and template_id
        and template_id in set(registered_templates)
        and template_id not in rules.allowed_templates
    ):
        return PolicyVerdict("veto", f"template_not_allowed:{template_id}")
    return PolicyVerdict("allow", review_required_above=rules.review_required_above)


def load_policies_json(path: str) -> dict[str, PolicyRuleSet]:
    """Load jurisdiction rulesets from a policies.json file.

    Schema per entry: {"jurisdiction", "required_modalities": [...],
    "allowed_templates": [...] | null, "retention_mode",
    "review_required_above": float | null}. A "default" entry must exist.
    """
    import json

    with open(path) as fh:
        raw = json.load(fh)
    policies = {}
    for entry in raw:
        allowed = entry.get("allowed_templates")
        policies[entry["jurisdiction"]] = PolicyRuleSet(
            jurisdiction=entry["jurisdiction"],
            required_modalities=frozenset(entry.get("required_modalities", ())),
            allowed_templates=None if allowed is None else frozenset(allowed),
            retention_mode=entry.get("retention_mode", "redacted"),
            review_required_above=entry.get("review_required_above"),
        )
    if "default" not in policies:
        raise ValueError("policies.json must define a 'default' ruleset")
    return policies


def derive_salt(seed: int) -> bytes:
    """Per-run redaction salt, reproducible from the run seed."""
    return hashlib.sha256(f"audit-salt:{seed}".encode()).digest()


def _redact_value(value: str, salt: bytes) -> str:
    return hashlib.sha256(salt + value.encode("utf-8")).hexdigest()


def redact_payload(value: Any, salt: bytes) -> Any:
    """Recursively replace PII field values with salted digests."""
    if isinstance(value, dict):
        return {
            k: (
                _redact_value(v, salt)
                if k in PII_FIELDS and isinstance(v, str) and v
                else redact_payload(v, salt)
            )
            for k, v in value.items()
        }
    if isinstance(value, (list, tuple)):
        return [redact_payload(v, salt) for v in value]
    return value


@dataclass(frozen=True)
class AuditRecord:
    seq: int
    time: float
    actor: str
    action: str
    submission_id: str
    payload: Any
    prev_hash: str
    hash: str


def _record_hash(prev_hash: str, body: dict) -> str:
    return hashlib.sha256(prev_hash.encode("ascii") + canonical_serialize(body)).hexdigest()


class AuditLog:
    """Append-only hash chain. Single writer; seq assigned at append."""

    def __init__(self, mode: str = "redacted", salt: bytes = b"") -> None:
        if mode not in RETENTION_MODES:
            raise ValueError(f"unknown retention mode {mode!r}")
        self.mode = mode
        self.salt = salt
        self.records: list[AuditRecord] = []
        self._prev_hash = GENESIS_HASH
        self.fail_writes = False  # test hook for the halt-on-unavailable rule

    def append(self, actor: str, action: str, submission_id: str, payload: Any, time: float) -> AuditRecord:
        if self.fail_writes:
            raise AuditUnavailable("audit sink is unavailable")
        if is_dataclass(payload):
            payload = record_to_dict(payload)
        if self.mode == "redacted":
            payload = redact_payload(payload, self.salt)
        body = {
            "seq": len(self.records),
            "time": time,
            "actor": actor,
            "action": action,
            "submission_id": submission_id,
            "payload": payload,
            "prev_hash": self._prev_hash,
        }
        digest = _record_hash(self._prev_hash, body)
        record = AuditRecord(hash=digest, **body)
        self.records.append(record)
        self._prev_hash = digest
        return record

    def serialize(self) -> bytes:
        return b"\n".join(canonical_serialize(r) for r in self.records) + (b"\n" if self.records else b"")

    def save(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.serialize())


def verify_chain(source: Union[bytes, str, Iterable[dict]]) -> Optional[int]:
    """Recompute the whole chain; return None when intact, else the first bad seq.

    Accepts raw log bytes/text (one canonical record per line) or parsed
    record dicts. Detects content mutation, deletion (sequence gap) and
    reordering.
    """
    if isinstance(source, (bytes, str)):
        data = source.encode() if isinstance(source, str) else source
        rows = [canonical_parse(line) for line in data.splitlines() if line.strip()]
    else:
        rows = list(source)
    prev = GENESIS_HASH
    for i, row in enumerate(rows):
        if row.get("seq") != i or row.get("prev_hash") != prev:
            return i
        body = {k: v for k, v in row.items() if k != "hash"}
        if _record_hash(prev, body) != row.get("hash"):
            return i
        prev = row["hash"]
    return None
