"""Shared pytest fixtures."""

from __future__ import annotations

from collections.abc import Generator

import numpy as np
import pytest
from loguru import logger

from capwater.core.numerics import DEFAULT_TOLERANCES, SolverTolerances
from capwater.solvers.one_mode import OneModeNoise


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def coarse_tol() -> SolverTolerances:
    """Tolerances with a small quadrature grid for fast spectral tests."""
    return DEFAULT_TOLERANCES.with_grid_size(256)


@pytest.fixture
def asymmetric_noise() -> OneModeNoise:
    return OneModeNoise(2.0, 0.5)


@pytest.fixture
def captured_warnings() -> Generator[list[str], None, None]:
    """Messages logged at WARNING or above while the test runs."""
    messages: list[str] = []
    handler_id = logger.add(lambda message: messages.append(str(message)), level="WARNING", format="{message}")
    yield messages
    logger.remove(handler_id)
