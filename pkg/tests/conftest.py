import pytest

from fqz.systems import load_config


@pytest.fixture(scope="session")
def cantor1():
    return load_config("cantor-i")[0]


@pytest.fixture(scope="session")
def asym1():
    return load_config("asym-i")[0]


@pytest.fixture(scope="session")
def cantor2():
    return load_config("cantor-ii")[0]
