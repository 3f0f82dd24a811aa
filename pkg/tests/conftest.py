import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from perqwalk.graphs import build_state_graph, corpus_graph  # noqa: E402
from perqwalk.walk import CoinSpec, PermutationSpec, WalkSpec, grover_walk  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cube():
    return corpus_graph("cube")


@pytest.fixture(scope="session")
def path3():
    return corpus_graph("path3")


@pytest.fixture(scope="session")
def cube_walk(cube):
    return grover_walk(cube, "identity")


def line_walk(g, coin="grover", perm="identity", variant="U3"):
    sg = build_state_graph(g, 2)
    return WalkSpec(sg, CoinSpec.preset(sg, coin), PermutationSpec.preset(sg, perm), variant)


@pytest.fixture(scope="session")
def line_grover(path3):
    return line_walk(path3, "grover")


@pytest.fixture(scope="session")
def line_hadamard(path3):
    return line_walk(path3, "hadamard")


def v0_uniform(sg):
    psi = np.zeros(sg.dim, dtype=complex)
    psi[list(sg.out[0])] = 1 / np.sqrt(3)
    return psi


def v0_antisym(sg):
    psi = np.zeros(sg.dim, dtype=complex)
    psi[sg.index("x01", 0)] = 1 / np.sqrt(2)
    psi[sg.index("y02", 0)] = -1 / np.sqrt(2)
    return psi
