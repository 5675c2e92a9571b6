import pytest

from twistlab.core.numerics import PrecisionContext


@pytest.fixture
def ctx():
    return PrecisionContext.from_digits(30)


@pytest.fixture
def ctx20():
    return PrecisionContext.from_digits(20)
