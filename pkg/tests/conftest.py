import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from emosam.stream import Chunk


def make_chunk(features, groups, labels, index: int = 1) -> Chunk:
    return Chunk(
        np.asarray(features, dtype=np.float64),
        np.asarray(groups, dtype=np.uint8),
        np.asarray(labels, dtype=np.uint8),
        index,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_chunk(rng):
    n, d = 60, 4
    return make_chunk(rng.random((n, d)), rng.integers(0, 2, n), rng.integers(0, 2, n))
