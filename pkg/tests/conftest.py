import pathlib

import pytest

from apollonian import orbit
from apollonian.cli import FrozenRegistry

ROOT = (-11, 21, 24, 28)

REGISTRY_PATH = pathlib.Path(__file__).parent / "frozen.json"


@pytest.fixture(scope="session")
def registry():
    """Regression registry: records on first run, compares afterwards."""
    reg = FrozenRegistry(REGISTRY_PATH, freeze=not REGISTRY_PATH.exists())
    yield reg
    reg.check()
    reg.save()


@pytest.fixture(scope="session")
def curvatures_1e6():
    return orbit.enumerate_curvatures(ROOT, 10**6, record_witnesses=True)


@pytest.fixture(scope="session")
def family_8():
    return orbit.build_family(ROOT, 8, 8)


@pytest.fixture(scope="session")
def family_32():
    return orbit.build_family(ROOT, 32, 32)
