"""Independent brute-force reference implementations used as test oracles.

Deliberately naive: plain loops, no sorting tricks, no shared code with
the package under test beyond the metric definitions themselves.
"""

from __future__ import annotations

import math

EPS = 1e-9


def far_at(threshold, impostor):
    hits = 0
    for s in impostor:
        if s >= threshold:
            hits += 1
    return hits / len(impostor)


def frr_at(threshold, genuine):
    misses = 0
    for s in genuine:
        if s < threshold:
            misses += 1
    return misses / len(genuine)


def eer_bruteforce(genuine, impostor):
    """Scan bracketing candidates around every unique score; same crossing
    definition as the production metric, found by exhaustive linear scan."""
    uniques = sorted(set(list(genuine) + list(impostor)))
    candidates = []
    for u in uniques:
        candidates.append(u - EPS)
        candidates.append(u + EPS)
    rows = []
    for t in candidates:
        far = far_at(t, impostor)
        frr = frr_at(t, genuine)
        rows.append((t, far, far - frr))

    zero_idx = [i for i, (_, _, d) in enumerate(rows) if d == 0.0]
    if zero_idx:
        first = zero_idx[0]
        last = first
        while last + 1 < len(rows) and rows[last + 1][2] == 0.0:
            last += 1
        threshold = (rows[first][0] + rows[last][0]) / 2.0
        return rows[first][1], threshold
    for i in range(len(rows) - 1):
        t0, far0, d0 = rows[i]
        t1, far1, d1 = rows[i + 1]
        if d0 > 0 and d1 < 0:
            t_star = t0 + d0 * (t1 - t0) / (d0 - d1)
            frac = (t_star - t0) / (t1 - t0) if t1 != t0 else 0.0
            return far0 + (far1 - far0) * frac, t_star
    if rows[-1][2] > 0:
        return rows[-1][1], rows[-1][0]
    return rows[0][1], rows[0][0]


def percentile_bruteforce(samples, p):
    ordered = []
    remaining = list(samples)
    while remaining:  # selection sort: independent of sorted()
        smallest = min(remaining)
        remaining.remove(smallest)
        ordered.append(smallest)
    rank = math.ceil(p / 100 * len(ordered))
    return ordered[rank - 1]


def prf_bruteforce(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None or recall is None or precision + recall == 0:
        return precision, recall, None
    return precision, recall, 2 * precision * recall / (precision + recall)
