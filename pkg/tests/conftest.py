"""Shared fixtures and the acceptance report hook."""

import numpy as np
import pytest

from sfmap import shapes
from sfmap.operators import build_operators

# Lines recorded by the acceptance suite, replayed after the test summary so
# they stay visible in captured runs.
_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion():
    def record(number, ok, detail):
        word = "PASS" if ok else "FAIL"
        _ACCEPTANCE_LINES.append(f"criterion {number:02d} {word}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def icosphere3():
    return shapes.icosphere(subdivisions=3)


@pytest.fixture(scope="session")
def torus_mesh():
    return shapes.torus()


@pytest.fixture(scope="session")
def bumpy_sphere():
    """Spectrally generic closed surface, the invariance workhorse."""
    spec = shapes.ShapeSpec("uvsphere", dict(segments=24, rings=12),
                            noise=0.03, noise_seed=11)
    return shapes.generate(spec)


@pytest.fixture(scope="session")
def bumpy_ops(bumpy_sphere):
    return build_operators(bumpy_sphere)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
