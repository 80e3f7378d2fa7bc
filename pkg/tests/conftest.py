"""Shared fixtures: the operators of the bundled configuration."""

import pytest

from hfrac.cli import load_config
from hfrac.fracops import default_corpus


@pytest.fixture(scope="session")
def config():
    return load_config(None)


@pytest.fixture(scope="session")
def ops(config):
    return config.ops


@pytest.fixture(scope="session")
def corpus():
    return default_corpus()
