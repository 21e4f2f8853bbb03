import sys
from pathlib import Path

import pytest
from hypothesis import settings

from expsum3.params import ExponentTriple

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def ref_triple():
    return ExponentTriple(0.5, 0.9, 0.6)


@pytest.fixture
def alt_triple():
    return ExponentTriple(0.6, 0.9, 0.7)
