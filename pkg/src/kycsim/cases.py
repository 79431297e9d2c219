"""Case management: escalated cases, analyst verdicts, alerting.

The store is single-writer per case and idempotent on open (the bus is
at-least-once). A parked workflow resumes when its verdict is submitted;
in headless runs a simulated analyst closes the loop deterministically.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from typing import Any, Callable, Optional

import numpy as np

from .domain import quantize9, record_to_dict

ANALYST_LATENCY_RANGE = (5.0, 60.0)
DEFAULT_ANALYST_ACCURACY = 0.95


class CaseConflict(RuntimeError):
    """A verdict was already recorded; the original is preserved."""


class CaseNotFound(KeyError):
    pass


@dataclass(frozen=True)
class Verdict:
    decision: str  # approve | reject
    reason: str
    analyst_id: str
    decided_at: float


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    submission_id: str
    opened_at: float
    status: str  # pending_review | resolved
    evidence: dict[str, Any]
    verdict: Optional[Verdict] = None


class CaseStore:
    """Holds escalated cases and publishes open/resolve alerts."""

    def __init__(self) -> None:
        self._cases: dict[str, CaseRecord] = {}
        self._by_submission: dict[str, str] = {}
        self._lock = threading.RLock()
        self._listeners: list[Callable[[str, CaseRecord], None]] = []

    def add_listener(self, listener: Callable[[str, CaseRecord], None]) -> None:
        self._listeners.append(listener)

    def _notify(self, kind: str, record: CaseRecord) -> None:
        for listener in list(self._listeners):
            listener(kind, record)

    def open_case(self, submission_id: str, evidence: dict[str, Any], opened_at: float) -> CaseRecord:
        """Open (or return the already-open) case for a submission."""
        with self._lock:
            existing = self._by_submission.get(submission_id)
            if existing is not None:
                return self._cases[existing]
            case_id = f"case-{submission_id}"
            record = CaseRecord(
                case_id=case_id,
                submission_id=submission_id,
                opened_at=opened_at,
                status="pending_review",
                evidence=evidence,
            )
            self._cases[case_id] = record
            self._by_submission[submission_id] = case_id
        self._notify("case_opened", record)
        return record

    def submit_verdict(
        self, case_id: str, decision: str, reason: str, analyst_id: str, decided_at: float
    ) -> CaseRecord:
        if decision not in ("approve", "reject"):
            raise ValueError(f"unknown decision {decision!r}")
        with self._lock:
            record = self._cases.get(case_id)
            if record is None:
                raise CaseNotFound(case_id)
            if record.status == "resolved":
                raise CaseConflict(case_id)
            resolved = replace(
                record,
                status="resolved",
                verdict=Verdict(decision=decision, reason=reason, analyst_id=analyst_id, decided_at=decided_at),
            )
            self._cases[case_id] = resolved
        self._notify("case_resolved", resolved)
        return resolved

    def get(self, case_id: str) -> CaseRecord:
        record = self._cases.get(case_id)
        if record is None:
            raise CaseNotFound(case_id)
        return record

    def list_cases(self, status: Optional[str] = None, limit: Optional[int] = None) -> list[CaseRecord]:
        with self._lock:
            records = sorted(self._cases.values(), key=lambda r: (r.opened_at, r.case_id))
        if status:
            records = [r for r in records if r.status == status]
        if limit is not None:
            records = records[: max(limit, 0)]
        return records

    def counters(self) -> dict[str, int]:
        with self._lock:
            records = list(self._cases.values())
        resolved = sum(1 for r in records if r.status == "resolved")
        return {
            "opened": len(records),
            "resolved": resolved,
            "pending": len(records) - resolved,
        }


def case_to_dict(record: CaseRecord) -> dict:
    d = record_to_dict(record)
    return d


def simulated_analyst(
    truth_is_fraudulent: bool,
    rng: np.random.Generator,
    accuracy: float = DEFAULT_ANALYST_ACCURACY,
) -> tuple[str, float]:
    """Deterministic stand-in analyst for headless runs.

    Returns (decision, think_time). The decision matches ground truth with
    probability ``accuracy``; think time is uniform over 5-60 virtual
    seconds.
    """
    correct = "reject" if truth_is_fraudulent else "approve"
    wrong = "approve" if correct == "reject" else "reject"
    decision = correct if rng.random() < accuracy else wrong
    lo, hi = ANALYST_LATENCY_RANGE
    think = quantize9(lo + (hi - lo) * rng.random())
    return decision, think
