"""Shared pytest fixtures."""

import os
import sys

import pytest

# Add src to path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from dotenv import load_dotenv

load_dotenv()

from tests.helpers import make_config


@pytest.fixture
def config_factory():
    """Build RunConfigs from keyword overrides per section."""
    return make_config


@pytest.fixture
def small_config():
    """K=3 on-demand run, well inside the capacity region."""
    return make_config(
        switch={"K": 3, "p": 0.9, "q": 0.9},
        arrivals={"family": "bernoulli", "rate": 0.1},
        run={"horizon_slots": 500, "seed": 7},
    )


@pytest.fixture
def configs_dir():
    return os.path.join(os.path.dirname(os.path.dirname(__file__)), "configs")
