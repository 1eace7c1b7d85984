"""Shared fixtures for the synthesizer test suite."""

import logging

import numpy as np
import pytest

from core.hexmesh import generate_grid
from core.polyfem import MaterialParams


@pytest.fixture(autouse=True)
def restore_root_logger():
    """CLI entry points reconfigure the root logger; put it back after each test."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    for handler in handlers:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(level)


@pytest.fixture
def single_hex():
    return generate_grid(1, 1, 1.0)


@pytest.fixture
def small_mesh():
    return generate_grid(4, 3, 1.0)


@pytest.fixture
def material():
    return MaterialParams(E=2100.0, nu=0.33, thickness=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
