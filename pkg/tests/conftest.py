"""Shared fixtures: grids and smooth compactly supported test fields."""
import numpy as np
import pytest

from elastoborn.calculus import Grid, ScalarField, SupportTag
from elastoborn.tensors import VOIGT_KEYS, Perturbation, TensorField

CAP_POWER = 8


def cap(grid: Grid, center=(0.05, -0.03, 0.02), radius: float = 0.85, amplitude: float = 1.0) -> ScalarField:
    """a * (1 - |x - c|^2 / r^2)^8 inside the ball of radius r around c."""
    c1, c2, c3 = center

    def fn(x1, x2, x3):
        s2 = ((x1 - c1) ** 2 + (x2 - c2) ** 2 + (x3 - c3) ** 2) / radius**2
        return amplitude * np.clip(1.0 - s2, 0.0, None) ** CAP_POWER

    return ScalarField.from_function(grid, fn, SupportTag.COMPACT)


def random_cap(grid: Grid, rng: np.random.Generator) -> ScalarField:
    radius = float(rng.uniform(0.75, 0.85))
    center = rng.uniform(-1.0, 1.0, size=3)
    center *= float(rng.uniform(0.0, 0.9 - radius)) / np.linalg.norm(center)
    return cap(grid, tuple(center), radius, float(rng.uniform(0.5, 1.0)))


def smooth_anisotropic(grid: Grid, seed: int) -> Perturbation:
    rng = np.random.Generator(np.random.PCG64(seed))
    components = {key: random_cap(grid, rng) for key in VOIGT_KEYS}
    return Perturbation(TensorField(components), random_cap(grid, rng))


def smooth_isotropic(grid: Grid, seed: int) -> tuple[ScalarField, ScalarField, ScalarField]:
    rng = np.random.Generator(np.random.PCG64(seed))
    return random_cap(grid, rng), random_cap(grid, rng), random_cap(grid, rng)


@pytest.fixture
def grid16():
    return Grid(N=16)


@pytest.fixture
def grid32():
    return Grid(N=32)


@pytest.fixture
def grid64():
    return Grid(N=64)


@pytest.fixture
def make_cap():
    """Factory for smooth compact caps."""
    return cap


@pytest.fixture
def make_anisotropic():
    """Factory for seeded anisotropic perturbations built from caps."""
    return smooth_anisotropic


@pytest.fixture
def make_isotropic_triple():
    """Factory for seeded (lambda, mu, rho) triples built from caps."""
    return smooth_isotropic
