import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from numbergame.registry import BIGELOW16, TENENBAUM99, Domain, build_space


@pytest.fixture(scope="session")
def t99_100():
    return build_space(TENENBAUM99, Domain(100))


@pytest.fixture(scope="session")
def t99_200():
    return build_space(TENENBAUM99, Domain(200))


@pytest.fixture(scope="session")
def b16_100():
    return build_space(BIGELOW16, Domain(100))
