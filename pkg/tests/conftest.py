import numpy as np
import pytest

from orbitope_lab.groups import build_model
from orbitope_lab.representation import build_representation


@pytest.fixture(scope="session")
def sl3():
    return build_model("SL_R", 3)


@pytest.fixture(scope="session")
def sl4():
    return build_model("SL_R", 4)


@pytest.fixture(scope="session")
def sl2():
    return build_model("SL_R", 2)


@pytest.fixture(scope="session")
def slc2():
    return build_model("SL_C", 2)


@pytest.fixture(scope="session")
def std3(sl3):
    return build_representation(sl3, "standard")


@pytest.fixture(scope="session")
def std4(sl4):
    return build_representation(sl4, "standard")


@pytest.fixture(scope="session")
def std2(sl2):
    return build_representation(sl2, "standard")


@pytest.fixture(scope="session")
def stdc2(slc2):
    return build_representation(slc2, "standard")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(acceptance_log.RESULTS):
        terminalreporter.write_line(acceptance_log.line(number, title, passed, detail))
