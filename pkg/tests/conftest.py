"""
Shared pytest fixtures for the verification suite.

Oracle-backed fixtures draw few samples so the unit tests stay fast; the
seed can be moved with CPROVER_TEST_SEED to shake out seed-dependent
failures locally.
"""

import os

import pytest

from cprover.proofs import CheckContext
from cprover.rules import HypothesisSet

TEST_SEED = int(os.getenv("CPROVER_TEST_SEED", "7"))
TEST_SAMPLES = 3


# ---------------------------------------------------------------------------
# Run contexts
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def ctx() -> CheckContext:
    """Context with a handful of oracle samples, shared across the session."""
    return CheckContext(seed=TEST_SEED, samples=TEST_SAMPLES)


@pytest.fixture(scope="session")
def exact_ctx() -> CheckContext:
    """Context with the oracle switched off: exact items only."""
    return CheckContext(seed=TEST_SEED, samples=0)


# ---------------------------------------------------------------------------
# Hypotheses
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def h1() -> HypothesisSet:
    return HypothesisSet(1)


@pytest.fixture(scope="session")
def h2() -> HypothesisSet:
    return HypothesisSet(2)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def failed_items(report) -> list[str]:
    """Readable failure lines for assertion messages."""
    return [f"{i.name}: expected {i.expected}, got {i.computed} ({i.detail})" for i in report.failures()]
