import numpy as np
import pytest

from prodint import PathSpace, StatePath, exact_pathspace, illness_death_scenario

import oracle_enum


@pytest.fixture(scope="session")
def idn_space() -> PathSpace:
    """The illness-death oracle built from the hand-enumerated path list."""
    paths = tuple(
        (StatePath(init, jumps), w) for init, jumps, w in oracle_enum.IDN_PATHS
    )
    return PathSpace(3, 3.0, paths, grid=(1.0, 2.0, 3.0))


@pytest.fixture(scope="session")
def idn_enumerated() -> PathSpace:
    """The same law produced by the scenario enumerator."""
    return exact_pathspace(illness_death_scenario())


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
