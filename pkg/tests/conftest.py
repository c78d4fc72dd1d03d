import warnings

import pytest


@pytest.fixture
def silence_runtime_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield
