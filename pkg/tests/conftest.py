import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from umatch import GF, StoredCsMatrix


@pytest.fixture
def rng():
    return random.Random(2024)


def random_stored(rnd: random.Random, p: int, m: int, n: int, density: float = 0.45) -> StoredCsMatrix:
    f = GF(p)
    dense = [
        [rnd.randrange(1, p) if rnd.random() < density else 0 for _ in range(n)]
        for _ in range(m)
    ]
    return StoredCsMatrix.from_dense(f, dense)
