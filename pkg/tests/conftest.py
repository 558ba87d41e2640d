import pytest
from hypothesis import settings

# Numeric property tests can be slow on shared machines; a fixed profile with
# no deadline and derandomized examples keeps the suite deterministic.
settings.register_profile("vorsim", deadline=None, max_examples=60,
                          derandomize=True)
settings.load_profile("vorsim")


@pytest.fixture
def circle():
    from vorsim.space import Space
    return Space("circle", 1.0)


@pytest.fixture
def interval():
    from vorsim.space import Space
    return Space("interval", 1.0)


@pytest.fixture
def square():
    from vorsim.space import Space
    return Space("square", 1.0)


@pytest.fixture
def torus():
    from vorsim.space import Space
    return Space("torus", 1.0)
