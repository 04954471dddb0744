import random

import pytest

from twodescent.curve import CurveE2


@pytest.fixture
def congruent5():
    # y^2 = x^3 - 25x with roots ordered as in the delta examples
    return CurveE2(0, 5, -5)


@pytest.fixture
def rng():
    return random.Random(20240611)
