from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # reference_impls importable

from kycsim.workload import WorkloadConfig, generate_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """1,200-submission corpus shared by read-only tests."""
    return generate_corpus(WorkloadConfig(seed=42, scale=0.02))


@pytest.fixture(scope="session")
def tiny_corpus():
    return generate_corpus(WorkloadConfig(seed=7, scale=0.005))
