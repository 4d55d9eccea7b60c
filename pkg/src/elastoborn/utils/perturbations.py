"""Smooth compactly supported test perturbations built from bump primitives."""
from collections.abc import Sequence
import logging
from typing import Any

import numpy as np

from elastoborn.calculus import Grid, ScalarField
from elastoborn.errors import SupportViolationError
from elastoborn.models import (
    BUMP_SUPPORT_RADIUS,
    BumpSpec,
    BumpsPerturbation,
    FilesPerturbation,
    IsotropicPerturbation,
    PerturbationSpec,
    RandomPerturbation,
)
from elastoborn.tensors import VOIGT_KEYS, Perturbation, TensorField
from elastoborn.utils.field_io import read_perturbation

logger = logging.getLogger(__name__)

PRNG_ALGORITHM = 'PCG64'
RADIUS_RANGE = (0.6, 0.8)
AMPLITUDE_RANGE = (0.5, 1.0)


def bump(grid: Grid, spec: BumpSpec) -> ScalarField:
    """Evaluate a * exp(1 - 1 / (1 - |x - c|^2 / r^2)) on the grid."""
    reach = float(np.linalg.norm(spec.center)) + spec.radius
    if reach > BUMP_SUPPORT_RADIUS + 1e-12:
        raise SupportViolationError(f'bump reaches |x| = {reach:.3f} > {BUMP_SUPPORT_RADIUS}')
    x1, x2, x3 = grid.mesh()
    c1, c2, c3 = spec.center
    s2 = ((x1 - c1) ** 2 + (x2 - c2) ** 2 + (x3 - c3) ** 2) / spec.radius**2
    inside = s2 < 1.0
    exponent = 1.0 - 1.0 / (1.0 - np.where(inside, s2, 0.0))
    values = np.where(inside, spec.amplitude * np.exp(exponent), 0.0)
    return ScalarField.compact(grid, values)


def bump_sum(grid: Grid, specs: Sequence[BumpSpec]) -> ScalarField:
    out = ScalarField.zeros(grid)
    for spec in specs:
        out = out + bump(grid, spec)
    return out


def random_bumps(rng: np.random.Generator, count: int) -> list[BumpSpec]:
    """Bumps with radius in RADIUS_RANGE, centered so the support stays in |x| <= 0.95."""
    specs = []
    for _ in range(count):
        radius = float(rng.uniform(*RADIUS_RANGE))
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        offset = float(rng.uniform(0.0, BUMP_SUPPORT_RADIUS - radius))
        amplitude = float(rng.uniform(*AMPLITUDE_RANGE)) * float(rng.choice((-1.0, 1.0)))
        center = tuple(float(c) for c in offset * direction)
        specs.append(BumpSpec(center=center, radius=radius, amplitude=amplitude))
    return specs


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_isotropic(grid: Grid, seed: int, bumps: int = 2) -> tuple[ScalarField, ScalarField, ScalarField]:
    """(lambda, mu, rho) bump sums drawn from one seeded generator."""
    rng = make_rng(seed)
    return tuple(bump_sum(grid, random_bumps(rng, bumps)) for _ in range(3))


def random_anisotropic(grid: Grid, seed: int, bumps: int = 2) -> Perturbation:
    rng = make_rng(seed)
    components = {key: bump_sum(grid, random_bumps(rng, bumps)) for key in VOIGT_KEYS}
    rho = bump_sum(grid, random_bumps(rng, bumps))
    return Perturbation(TensorField(components), rho)


def _voigt_key(text: str) -> tuple[int, int]:
    return int(text[0]), int(text[1])


def generate_perturbation(spec: PerturbationSpec, grid: Grid, seed: int | None = None) -> tuple[Perturbation, dict[str, Any]]:
    """Build the perturbation a config describes, with metadata to archive alongside it."""
    metadata: dict[str, Any] = {'kind': spec.kind}
    match spec:
        case BumpsPerturbation():
            components = {_voigt_key(k): bump_sum(grid, v) for k, v in spec.components.items()}
            P = Perturbation(TensorField.from_components(grid, components), bump_sum(grid, spec.rho))
        case IsotropicPerturbation():
            P = Perturbation.from_isotropic(bump_sum(grid, spec.lambda_), bump_sum(grid, spec.mu), bump_sum(grid, spec.rho))
        case RandomPerturbation():
            seed = spec.seed if seed is None else seed
            metadata.update({'prng': PRNG_ALGORITHM, 'seed': seed, 'isotropic': spec.isotropic, 'bumps': spec.bumps})
            if spec.isotropic:
                P = Perturbation.from_isotropic(*random_isotropic(grid, seed, spec.bumps))
            else:
                P = random_anisotropic(grid, seed, spec.bumps)
        case FilesPerturbation():
            metadata['path'] = spec.path
            P = read_perturbation(spec.path)
            if P.grid != grid:
                logger.warning('Perturbation files use %s, not the configured %s', P.grid, grid)
        case _:
            raise TypeError(f'unknown perturbation spec {spec!r}')
    logger.info('Generated %s perturbation on N=%d', spec.kind, P.grid.N)
    return P, metadata
