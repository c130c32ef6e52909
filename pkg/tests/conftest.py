"""Shared fixtures: canonical sources and a random-attack factory."""

import numpy as np
import pytest

from qkdlab.attacks import AttackIsometry
from qkdlab.quantum import BipartiteLabel, haar_random_isometry
from qkdlab.source import QubitSourceAngles, build_qubit_source, ideal_bb84_source


def random_attack(dim_in: int, dim_b: int, dim_e: int, seed) -> AttackIsometry:
    matrix = haar_random_isometry(dim_in, dim_b * dim_e, seed)
    return AttackIsometry(matrix, BipartiteLabel(dim_b, dim_e))


@pytest.fixture(scope="session")
def ideal_source():
    return ideal_bb84_source()


@pytest.fixture(scope="session")
def tilted_source():
    # Mildly imperfect qubit source: nonorthogonal pairs, tilted axes.
    return build_qubit_source(QubitSourceAngles(alpha=0.2, beta=0.1, phi=1.3))


@pytest.fixture(scope="session")
def make_attack():
    return random_attack
