import random

import pytest

from nilsep.malcev import get_group, parse_element


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def el():
    def parse(text):
        return parse_element(text)[1]
    return parse


@pytest.fixture
def h3():
    return get_group("h3")


@pytest.fixture
def h5():
    return get_group("h5")


@pytest.fixture
def ut4():
    return get_group("ut4")
