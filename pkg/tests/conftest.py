import numpy as np
import pytest

import gossiptd as g

# verdict lines recorded by the acceptance tests; echoed after the run so
# they survive pytest's output capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def two_state():
    # states "1" and "2" with transition cost c(i,j) = j
    P = np.array([[0.9, 0.1], [0.5, 0.5]])
    c = np.array([[1.0, 2.0], [1.0, 2.0]])
    return g.MarkovModel(P=P, c=c)


@pytest.fixture(scope="session")
def queue_model():
    return g.build_queue_chain(g.QueueSpec())


@pytest.fixture(scope="session")
def queue_eta(queue_model):
    return g.stationary_distribution(queue_model)


@pytest.fixture(scope="session")
def queue_bases():
    return g.build_queue_bases()


@pytest.fixture(scope="session")
def queue_q():
    return g.GossipMatrix.preset("queue-3")
