import numpy as np
import pytest

from scf import load_fixture


@pytest.fixture(scope="session")
def ex1():
    return load_fixture("EX1")


@pytest.fixture(scope="session")
def ex2():
    return load_fixture("EX2")


@pytest.fixture(scope="session")
def ex3():
    return load_fixture("EX3")


# start used throughout for the small-margin survival questions
PROBE_START = (0.3, 0.01, 1.0)


@pytest.fixture(scope="session")
def probe_start():
    return np.array(PROBE_START)
