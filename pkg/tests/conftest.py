import pytest

from plpoly.core import Constraint, Polyhedron, Relation

CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)


@pytest.fixture
def square():
    # 0 <= x1 <= 1, 0 <= x2 <= 1
    return Polyhedron.from_matrix([[1, 0], [-1, 0], [0, 1], [0, -1]], [0, 1, 0, 1])


@pytest.fixture
def four_rows():
    """x1 - 2x2 <= -2, -2x1 + x2 <= -1, x1 + x2 <= 8 and the redundant -2x1 - 4x2 <= -7."""
    return Polyhedron.from_matrix([[-1, 2], [2, -1], [-1, -1], [2, 4]], [-2, -1, 8, -7])


@pytest.fixture
def wedge():
    """x2 <= x1, x1 + x2 <= 7 and the strict row x2 < 3/2."""
    return Polyhedron(2, [Constraint([1, -1], 0), Constraint([-1, -1], 7),
                          Constraint([0, -2], 3, Relation.STRICT)])


@pytest.fixture
def pyramid():
    """Square pyramid with its apex (0, 0, 2) on four facets."""
    return Polyhedron.from_matrix([[0, 0, 1], [-2, 0, -1], [2, 0, -1], [0, -2, -1], [0, 2, -1]],
                                  [0, 2, 2, 2, 2])
