import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from divmax.probcore import Dist, StateSpace

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def spaces(draw, max_vars=3, max_card=3):
    cards = draw(st.lists(st.integers(2, max_card), min_size=1, max_size=max_vars))
    return StateSpace(tuple(cards))


@st.composite
def dists(draw, space=None, zeros=True):
    """Random distributions, with some exact zeros when ``zeros`` is set."""
    space = space or draw(spaces())
    w = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=space.size, max_size=space.size)))
    if zeros:
        mask = np.array(draw(st.lists(st.booleans(), min_size=space.size, max_size=space.size)))
        w = np.where(mask, 0.0, w)
    if w.sum() <= 1e-6:
        w = np.ones(space.size)
    return Dist.normalized(space, w)


def all_states(cards):
    return list(itertools.product(*(range(c) for c in cards)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
