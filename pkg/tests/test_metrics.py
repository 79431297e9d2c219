from __future__ import annotations

import numpy as np
import pytest

from kycsim.metrics import InsufficientData, check_dependency_order, eer, latency_percentile, precision_recall_f1

from reference_impls import eer_bruteforce, percentile_bruteforce, prf_bruteforce


class TestEer:
    def test_perfect_separation(self):
        value, _ = eer([0.9, 0.8], [0.1, 0.3])
        assert value == 0.0

    def test_hand_swept_crossing(self):
        value, threshold = eer([0.8, 0.4], [0.6, 0.2])
        assert value == pytest.approx(0.5)
        assert threshold == pytest.approx(0.5)

    def test_empty_raises(self):
        with pytest.raises(InsufficientData):
            eer([], [0.1])
        with pytest.raises(InsufficientData):
            eer([0.1], [])

    def test_matches_bruteforce_on_random_instances(self):
        rng = np.random.default_rng(1234)
        for _ in range(500):
            n_g = int(rng.integers(1, 40))
            n_i = int(rng.integers(1, 40))
            genuine = [round(float(x), 3) for x in rng.random(n_g)]
            impostor = [round(float(x), 3) for x in rng.random(n_i)]
            mine = eer(genuine, impostor)
            ref = eer_bruteforce(genuine, impostor)
            assert mine[0] == pytest.approx(ref[0], abs=1e-6)
            assert mine[1] == pytest.approx(ref[1], abs=1e-6)


class TestPercentile:
    def test_nearest_rank_examples(self):
        assert latency_percentile([1, 2, 3, 4], 50) == 2
        assert latency_percentile([5], 30) == 5
        assert latency_percentile([5], 99) == 5

    def test_lognormal_against_bruteforce(self):
        rng = np.random.default_rng(7)
        samples = list(rng.lognormal(0.0, 0.4, size=10_000))
        assert latency_percentile(samples, 99) == percentile_bruteforce(samples, 99)

    def test_matches_bruteforce_on_random_instances(self):
        rng = np.random.default_rng(99)
        for _ in range(500):
            n = int(rng.integers(1, 50))
            samples = [float(x) for x in rng.random(n)]
            p = float(rng.uniform(0.5, 100.0))
            assert latency_percentile(samples, p) == percentile_bruteforce(samples, p)

    def test_domain_errors(self):
        with pytest.raises(InsufficientData):
            latency_percentile([], 50)
        with pytest.raises(ValueError):
            latency_percentile([1.0], 0)


class TestPrecisionRecallF1:
    def test_published_operating_point(self):
        p, r, f1 = precision_recall_f1({"tp": 4565, "fp": 524, "fn": 435})
        assert r == pytest.approx(0.913)
        assert p == pytest.approx(0.897, abs=5e-4)
        assert f1 == pytest.approx(0.905, abs=5e-4)

    def test_undefined_precision_is_null(self):
        p, r, f1 = precision_recall_f1({"tp": 0, "fp": 0, "fn": 10})
        assert p is None
        assert r == 0.0
        assert f1 is None

    def test_equal_precision_recall(self):
        p, r, f1 = precision_recall_f1({"tp": 30, "fp": 10, "fn": 10})
        assert p == r == f1

    def test_matches_bruteforce_on_random_instances(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            tp, fp, fn = (int(x) for x in rng.integers(0, 50, size=3))
            mine = precision_recall_f1({"tp": tp, "fp": fp, "fn": fn})
            ref = prf_bruteforce(tp, fp, fn)
            for a, b in zip(mine, ref):
                if a is None or b is None:
                    assert a is None and b is None
                else:
                    assert a == pytest.approx(b, abs=1e-6)


class TestDependencyChecker:
    def _row(self, sid, kind, status, t):
        return {"submission_id": sid, "action": f"task.{kind}.{status}", "time": t}

    def test_clean_trace(self):
        rows = [
            self._row("S1", "ingest", "running", 0.0),
            self._row("S1", "ingest", "done", 0.1),
            self._row("S1", "preprocess", "running", 0.1),
            self._row("S1", "preprocess", "done", 0.4),
        ]
        assert check_dependency_order(rows) == []

    def test_violation_detected(self):
        rows = [
            self._row("S1", "ingest", "running", 0.0),
            self._row("S1", "ingest", "done", 0.2),
            self._row("S1", "preprocess", "running", 0.1),  # starts before dep done
            self._row("S1", "preprocess", "done", 0.4),
        ]
        violations = check_dependency_order(rows)
        assert len(violations) == 1
        assert "preprocess" in violations[0]
