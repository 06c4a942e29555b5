import random

import pytest

from streampir.factory import search_code
from streampir.gf import lookup_primitive_spec

# Pinned seeds: searches are deterministic, so these land on the same codes
# every run (seed 7 hits on the first attempt over GF(2^8), seed 1 on the
# first attempt over GF(2^20)).
EXAMPLE1_SEARCH_SEED = 7
EXAMPLE2_SEARCH_SEED = 1


@pytest.fixture(scope="session")
def example1_code():
    """A verified (6, 1, 2) streaming code over GF(2^8)."""
    res = search_code(6, 1, 2, lookup_primitive_spec(8),
                      random.Random(EXAMPLE1_SEARCH_SEED), max_attempts=500)
    return res.code


@pytest.fixture(scope="session")
def example2_code():
    """A verified (10, 2, 2) streaming code over GF(2^20)."""
    res = search_code(10, 2, 2, lookup_primitive_spec(20),
                      random.Random(EXAMPLE2_SEARCH_SEED), max_attempts=60)
    return res.code
