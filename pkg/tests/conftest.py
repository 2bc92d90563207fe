"""Pytest configuration and fixtures."""

from collections.abc import Generator

import pytest

from weak_measurement_info.executors import BaseExecutor, NumpyExecutor
from weak_measurement_info.managers import RunManager
from weak_measurement_info.measurement_models import KrausSet, build_kraus_set
from weak_measurement_info.trajectory import Prior


@pytest.fixture
def model1() -> KrausSet:
    """Model I at x = 1."""
    return build_kraus_set("I", 1.0)


@pytest.fixture
def model2() -> KrausSet:
    """Model II at x = 0.5 with a small precession."""
    return build_kraus_set("II", 0.5, 0.2)


@pytest.fixture
def prior() -> Prior:
    """Equal mixture of |↑⟩ and |↓⟩."""
    return Prior.default()


@pytest.fixture
def executors() -> dict[str, BaseExecutor]:
    """NumPy executor only, so tests do not need the simulator."""
    return {"numpy": NumpyExecutor()}


@pytest.fixture
def run_manager(executors: dict[str, BaseExecutor]) -> Generator[RunManager, None, None]:
    """Run manager whose worker thread is stopped after the test."""
    manager = RunManager(executors=executors)
    yield manager
    manager.shutdown()
