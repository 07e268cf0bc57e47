import numpy as np
import pytest

from robustdec import OutcomeSpace, RewardFn, make_rng


@pytest.fixture
def rng():
    return make_rng(1234, 'tests')


@pytest.fixture
def coin():
    return OutcomeSpace(('lo', 'hi'))


@pytest.fixture
def coin_reward(coin):
    return RewardFn(np.array([[0.0, 1.0], [0.0, 1.0]]), coin)


def pytest_collection_modifyitems(config, items):
    if config.getoption('markexpr'):
        return
    skip = pytest.mark.skip(reason='long acceptance run; select with -m slow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)
