import random

import pytest

from pmsr import msr
from pmsr.field import Field
from pmsr.msr import MsrParams

# The worked 6-node system over GF(13): every module has frozen values
# derived from it, so the fixtures live here.
EXAMPLE_PSI = [
    [1, 1, 1, 1],
    [1, 2, 4, 8],
    [1, 3, 9, 1],
    [1, 4, 3, 12],
    [1, 5, 12, 8],
    [1, 6, 10, 8],
]
EXAMPLE_LAMBDAS = (1, 4, 9, 3, 12, 10)
EXAMPLE_RECORD = [1, 2, 3, 4, 5, 6]
EXAMPLE_MESSAGE = [[1, 2], [2, 3], [4, 5], [5, 6]]
EXAMPLE_PATTERNS = {
    1: [[1, 0], [0, 1], [0, 0]],
    2: [[0, 0], [1, 0], [0, 1]],
    3: [[0, 1], [0, 0], [1, 0]],
}


@pytest.fixture
def f13():
    return Field(13)


@pytest.fixture
def f257():
    return Field(257)


@pytest.fixture
def params3():
    return MsrParams.from_nk(6, 3)


@pytest.fixture
def enc13(params3, f13):
    return msr.build_encoding_matrix(params3, f13)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


def random_record(params, field, rng):
    return [rng.randrange(field.modulus) for _ in range(params.B)]
