import pytest

from divergebench import fixture


@pytest.fixture(scope="session")
def embedded_set():
    return fixture.load_challenge_set()


@pytest.fixture(scope="session")
def embedded_outputs(embedded_set):
    return fixture.load_outputs(embedded_set)


@pytest.fixture(scope="session")
def embedded_verdicts():
    return fixture.load_verdicts()


@pytest.fixture(scope="session")
def expected_tables():
    return fixture.load_expected_tables()
