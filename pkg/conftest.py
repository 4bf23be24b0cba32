"""
Shared fixtures: the builtin scenarios and seeded random instances.

Random instances are drawn with numpy from small integer ranges and turned into
exact Fractions, so every assertion compares rationals exactly.
"""

from fractions import Fraction
from typing import List

import numpy as np
import pytest

from src.config import reset_settings
from src.credal import CredalSet, JointDistribution, SpaceSpec
from src.game import LossFunction
from src.scenario_io import builtin


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Each test sees default settings unless it sets CREDAL_* itself."""
    for name in ("CREDAL_MAX_PARTITIONS", "CREDAL_GRID_MAX_RULES", "CREDAL_GRID_MAX_RESOLUTION",
                 "CREDAL_GRID_MAX_DIMENSION", "CREDAL_VERIFY_LP", "CREDAL_CALIBRATION_AUDIT",
                 "CREDAL_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def example1():
    return builtin("example1")


@pytest.fixture
def monty():
    return builtin("monty_hall")


@pytest.fixture
def walley():
    return builtin("walley_coins")


def make_space(n_x: int, n_y: int, n_a: int) -> SpaceSpec:
    return SpaceSpec(
        tuple(f"x{i}" for i in range(n_x)),
        tuple(f"y{i}" for i in range(n_y)),
        tuple(f"a{i}" for i in range(n_a)),
    )


def random_distribution(rng: np.random.Generator, size: int, positive: bool = False,
                        top: int = 6) -> List[Fraction]:
    weights = rng.integers(1 if positive else 0, top + 1, size=size).tolist()
    if sum(weights) == 0:
        weights[int(rng.integers(0, size))] = 1
    total = sum(weights)
    return [Fraction(w, total) for w in weights]


def random_joint(rng: np.random.Generator, n_x: int, n_y: int, positive: bool = False) -> JointDistribution:
    return JointDistribution.from_flat(random_distribution(rng, n_x * n_y, positive), n_x, n_y)


def random_credal(rng: np.random.Generator, n_x: int, n_y: int, n_a: int = 2,
                  n_vertices: int = 3, positive: bool = False) -> CredalSet:
    space = make_space(n_x, n_y, n_a)
    return CredalSet.from_vertices(space, [random_joint(rng, n_x, n_y, positive) for _ in range(n_vertices)])


def random_loss(rng: np.random.Generator, n_y: int, n_a: int, low: int = -2, high: int = 5) -> LossFunction:
    return LossFunction(tuple(tuple(Fraction(int(v)) for v in row)
                              for row in rng.integers(low, high + 1, size=(n_y, n_a))))


class InstanceFactory:
    """Seeded generator of (credal set, loss) pairs."""

    def __init__(self, seed: int = 20240611):
        self.rng = np.random.default_rng(seed)

    def credal(self, n_x: int, n_y: int, n_a: int = 2, n_vertices: int = 3,
               positive: bool = False) -> CredalSet:
        return random_credal(self.rng, n_x, n_y, n_a, n_vertices, positive)

    def loss(self, n_y: int, n_a: int) -> LossFunction:
        return random_loss(self.rng, n_y, n_a)

    def distribution(self, size: int, positive: bool = False) -> List[Fraction]:
        return random_distribution(self.rng, size, positive)

    def joint(self, n_x: int, n_y: int, positive: bool = False) -> JointDistribution:
        return random_joint(self.rng, n_x, n_y, positive)

    def dims(self, max_x: int = 4, max_y: int = 4, max_a: int = 4, max_vertices: int = 6,
             min_x: int = 1):
        return (int(self.rng.integers(min_x, max_x + 1)), int(self.rng.integers(1, max_y + 1)),
                int(self.rng.integers(1, max_a + 1)), int(self.rng.integers(1, max_vertices + 1)))

    def integer(self, low: int, high: int) -> int:
        return int(self.rng.integers(low, high + 1))


@pytest.fixture
def instances():
    return InstanceFactory()


@pytest.fixture
def space_2x2():
    return make_space(2, 2, 2)


def singleton_credal(space: SpaceSpec, rows) -> CredalSet:
    return CredalSet.singleton(space, JointDistribution(tuple(tuple(Fraction(v) for v in r) for r in rows)))
