"""Evaluation metrics: equal error rate, percentiles, confusion stats,
and consistency checkers over run artifacts."""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .domain import canonical_parse

EER_EPSILON = 1e-9


class InsufficientData(ValueError):
    """Score-based metrics need at least one sample on each side."""


def eer(genuine_scores: Sequence[float], impostor_scores: Sequence[float]) -> tuple[float, float]:
    """Equal error rate and its operating threshold.

    FAR(t) is the impostor fraction scoring >= t, FRR(t) the genuine
    fraction scoring < t. Candidate thresholds bracket every unique score;
    the EER is FAR at the FAR/FRR crossing, linearly interpolated between
    the two adjacent candidates where FAR-FRR changes sign. When the
    difference is exactly zero over a plateau, the reported threshold is
    the plateau midpoint (the earliest crossing region).
    """
    if len(genuine_scores) == 0 or len(impostor_scores) == 0:
        raise InsufficientData("both genuine and impostor scores are required")
    gen = np.sort(np.asarray(genuine_scores, dtype=float))
    imp = np.sort(np.asarray(impostor_scores, dtype=float))
    uniques = np.unique(np.concatenate([gen, imp]))
    candidates = np.empty(2 * len(uniques))
    candidates[0::2] = uniques - EER_EPSILON
    candidates[1::2] = uniques + EER_EPSILON
    fars = (len(imp) - np.searchsorted(imp, candidates, side="left")) / len(imp)
    frrs = np.searchsorted(gen, candidates, side="left") / len(gen)
    diffs = (fars - frrs).tolist()
    fars = fars.tolist()
    candidates = candidates.tolist()

    zero = [i for i, d in enumerate(diffs) if abs(d) == 0.0]
    if zero:
        first = zero[0]
        last = first
        while last + 1 < len(diffs) and abs(diffs[last + 1]) == 0.0:
            last += 1
        threshold = (candidates[first] + candidates[last]) / 2.0
        return fars[first], threshold

    for i in range(len(diffs) - 1):
        if diffs[i] > 0 and diffs[i + 1] < 0:
            t0, t1 = candidates[i], candidates[i + 1]
            d0, d1 = diffs[i], diffs[i + 1]
            t_star = t0 + d0 * (t1 - t0) / (d0 - d1)
            frac = (t_star - t0) / (t1 - t0) if t1 != t0 else 0.0
            eer_value = fars[i] + (fars[i + 1] - fars[i]) * frac
            return eer_value, t_star
    # no crossing inside the candidate range: perfect separation one way
    if diffs[-1] > 0:
        return fars[-1], candidates[-1]
    return fars[0], candidates[0]


def precision_recall_f1(
    confusion: dict[str, int],
) -> tuple[Optional[float], Optional[float], Optional[float]]:
    """Standard precision/recall/F1; undefined metrics are None, never 0."""
    tp = confusion.get("tp", 0)
    fp = confusion.get("fp", 0)
    fn = confusion.get("fn", 0)
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fn) if (tp + fn) > 0 else None
    if precision is None or recall is None or (precision + recall) == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def latency_percentile(samples: Sequence[float], p: float) -> float:
    """Nearest-rank percentile: value at index ceil(p/100 * n), 1-based."""
    if not samples:
        raise InsufficientData("percentile of an empty sample set")
    if not (0 < p <= 100):
        raise ValueError(f"percentile {p} outside (0, 100]")
    ordered = sorted(samples)
    rank = math.ceil(p / 100 * len(ordered))
    return ordered[rank - 1]


def latency_summary(samples: Sequence[float]) -> dict[str, float]:
    if not samples:
        return {}
    return {
        "mean": math.fsum(samples) / len(samples),
        "p50": latency_percentile(samples, 50),
        "p95": latency_percentile(samples, 95),
        "p99": latency_percentile(samples, 99),
        "max": max(samples),
        "count": len(samples),
    }


def check_dependency_order(audit_source: bytes | str | Iterable[dict]) -> list[str]:
    """Scan an audit trace for dependency-order violations.

    A violation is a task that started running before one of its DAG
    predecessors finished. Returns human-readable violation strings
    (empty when the trace is clean).
    """
    from .orchestrator import PARALLEL_DEPS  # local import: avoid cycle

    if isinstance(audit_source, (bytes, str)):
        data = audit_source.encode() if isinstance(audit_source, str) else audit_source
        rows = [canonical_parse(line) for line in data.splitlines() if line.strip()]
    else:
        rows = list(audit_source)

    started: dict[tuple[str, str], float] = {}
    finished: dict[tuple[str, str], float] = {}
    for row in rows:
        action = row.get("action", "")
        if not action.startswith("task."):
            continue
        _, kind, status = action.split(".", 2)
        key = (row["submission_id"], kind)
        t = row["time"]
        if status == "running":
            if key not in started or t < started[key]:
                started[key] = t
        elif status in ("done", "degraded", "failed"):
            finished[key] = max(finished.get(key, 0.0), t)

    violations = []
    for (submission_id, kind), t_start in sorted(started.items()):
        for dep in sorted(PARALLEL_DEPS.get(kind, frozenset())):
            dep_key = (submission_id, dep)
            if dep_key in finished and t_start < finished[dep_key] - 1e-9:
                violations.append(
                    f"{submission_id}: {kind} started {t_start} before {dep} finished {finished[dep_key]}"
                )
            elif dep_key in started and dep_key not in finished:
                violations.append(f"{submission_id}: {kind} started while {dep} still running")
    return violations
