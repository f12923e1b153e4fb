from fractions import Fraction as F

import pytest

from densecsp.csp import make_instance
from densecsp.games import make_game

EQ = [1, 0, 0, 1]
NE = [0, 1, 1, 0]


@pytest.fixture
def equality_instance():
    """Single equality predicate on (0, 1), q = 2, weight 1."""
    return make_instance(2, 2, 2, [((0, 1), 1, EQ)])


@pytest.fixture
def half_half_instance():
    """Equality and inequality on (0, 1), weight 1/2 each: every
    assignment has value exactly 1/2."""
    return make_instance(2, 2, 2, [((0, 1), F(1, 2), EQ), ((0, 1), F(1, 2), NE)])


@pytest.fixture
def odd_cycle_instance():
    """Unsatisfiable inequality triangle: optimum 2/3."""
    return make_instance(
        3, 2, 2,
        [((0, 1), F(1, 3), NE), ((1, 2), F(1, 3), NE), ((2, 0), F(1, 3), NE)],
    )


@pytest.fixture
def xor_chain_instance():
    """x0 = x1, x1 = x2, x0 != x2: optimum 2/3 with uniform weights."""
    return make_instance(
        3, 2, 2,
        [((0, 1), F(1, 3), EQ), ((1, 2), F(1, 3), EQ), ((0, 2), F(1, 3), NE)],
    )


def chsh_game():
    """Uniform questions over {0,1}^2; accept iff a xor b = x and y.
    Classical value 3/4."""
    edges = []
    for x in range(2):
        for y in range(2):
            table = [int((a ^ b) == (x & y)) for a in range(2) for b in range(2)]
            edges.append((x, y, F(1, 4), table))
    return make_game(2, 2, 2, 2, edges)


@pytest.fixture
def chsh():
    return chsh_game()
