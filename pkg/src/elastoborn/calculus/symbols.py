"""Constant-coefficient differential operators as Fourier symbols."""
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from elastoborn.calculus.grid import Direction, Grid

type MultiIndex = tuple[int, int, int]

ELLIPTIC_SAMPLES = 10_000
ELLIPTIC_RADII = (0.5, 1.0, 2.0)
# |p| below this fraction of max|p| on a sphere counts as a zero
ELLIPTIC_FLOOR = 1e-6


def sphere_points(count: int) -> np.ndarray:
    """Deterministic, nearly uniform unit vectors (Fibonacci lattice)."""
    i = np.arange(count, dtype=np.float64) + 0.5
    z = 1.0 - 2.0 * i / count
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    rho = np.sqrt(1.0 - z**2)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def _index(beta: Iterable[int]) -> MultiIndex:
    beta = tuple(int(b) for b in beta)
    if len(beta) != 3 or min(beta) < 0:
        raise ValueError(f'multi-index must be three non-negative integers, got {beta}')
    return beta


@dataclass(frozen=True)
class SymbolPolynomial:
    """sum_beta c_beta d^beta, evaluated as p(xi) = sum_beta c_beta (i xi)^beta."""

    terms: tuple[tuple[MultiIndex, float], ...] = ()

    def __post_init__(self):
        merged: dict[MultiIndex, float] = {}
        for beta, coefficient in self.terms:
            beta = _index(beta)
            merged[beta] = merged.get(beta, 0.0) + float(coefficient)
        normalized = tuple(sorted((b, c) for b, c in merged.items() if c != 0.0))
        object.__setattr__(self, 'terms', normalized)

    @classmethod
    def from_terms(cls, terms: Mapping[MultiIndex, float]) -> 'SymbolPolynomial':
        return cls(tuple(terms.items()))

    @classmethod
    def constant(cls, value: float) -> 'SymbolPolynomial':
        return cls((((0, 0, 0), value),))

    @classmethod
    def partial(cls, axis: int, order: int = 1) -> 'SymbolPolynomial':
        """d_axis^order for axis in {1, 2, 3}."""
        beta = [0, 0, 0]
        beta[axis - 1] = order
        return cls(((tuple(beta), 1.0),))

    @classmethod
    def laplacian(cls) -> 'SymbolPolynomial':
        return cls.partial(1, 2) + cls.partial(2, 2) + cls.partial(3, 2)

    @classmethod
    def directional(cls, direction: 'Direction') -> 'SymbolPolynomial':
        """L_theta = theta . grad for a signed axis direction."""
        return cls.partial(direction.axis) * float(direction.sign)

    @property
    def coefficients(self) -> dict[MultiIndex, float]:
        return dict(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(b) for b, _ in self.terms), default=0)

    @property
    def is_homogeneous(self) -> bool:
        return len({sum(b) for b, _ in self.terms}) <= 1

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: 'SymbolPolynomial | float') -> 'SymbolPolynomial':
        if not isinstance(other, SymbolPolynomial):
            other = SymbolPolynomial.constant(other)
        return SymbolPolynomial(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> 'SymbolPolynomial':
        return SymbolPolynomial(tuple((b, -c) for b, c in self.terms))

    def __sub__(self, other: 'SymbolPolynomial | float') -> 'SymbolPolynomial':
        if not isinstance(other, SymbolPolynomial):
            other = SymbolPolynomial.constant(other)
        return self + (-other)

    def __mul__(self, other: 'SymbolPolynomial | float') -> 'SymbolPolynomial':
        if not isinstance(other, SymbolPolynomial):
            return SymbolPolynomial(tuple((b, c * float(other)) for b, c in self.terms))
        product = []
        for beta, c in self.terms:
            for gamma, d in other.terms:
                product.append(((beta[0] + gamma[0], beta[1] + gamma[1], beta[2] + gamma[2]), c * d))
        return SymbolPolynomial(tuple(product))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> 'SymbolPolynomial':
        result = SymbolPolynomial.constant(1.0)
        for _ in range(exponent):
            result = result * self
        return result

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        """p(xi) for xi of shape (..., 3)."""
        xi = np.asarray(xi, dtype=np.float64)
        out = np.zeros(xi.shape[:-1], dtype=np.complex128)
        for beta, c in self.terms:
            monomial = (1j ** sum(beta)) * np.prod(xi ** np.asarray(beta), axis=-1)
            out = out + c * monomial
        return out

    __call__ = evaluate

    def on_grid(self, grid: 'Grid') -> np.ndarray:
        """Symbol sampled on the rfftn wavenumber layout of `grid`.

        Odd powers of the Nyquist wavenumber are zeroed so the result stays
        Hermitian and derivatives of real fields stay real.
        """
        if not self.terms:
            return np.zeros((grid.N, grid.N, grid.N // 2 + 1), dtype=np.complex128)
        top = max(max(b) for b, _ in self.terms)
        full = _axis_powers(grid, False, top)
        half = _axis_powers(grid, True, top)
        out = 0.0
        for beta, c in self.terms:
            out = out + c * (
                full[beta[0]][:, None, None] * full[beta[1]][None, :, None] * half[beta[2]][None, None, :]
            )
        return np.broadcast_to(out, (grid.N, grid.N, grid.N // 2 + 1)).astype(np.complex128)

    @cached_property
    def elliptic(self) -> bool:
        """True when p has no zero on spheres of radius 0.5, 1 and 2."""
        if not self.terms:
            return False
        points = sphere_points(ELLIPTIC_SAMPLES)
        for radius in ELLIPTIC_RADII:
            values = self.evaluate(radius * points)
            magnitude = np.abs(values)
            peak = magnitude.max()
            if peak == 0.0 or magnitude.min() <= ELLIPTIC_FLOOR * peak:
                return False
            # a real or purely imaginary symbol that changes sign must vanish in between
            if np.all(np.abs(values.imag) <= 1e-12 * peak) and values.real.min() < 0.0 < values.real.max():
                return False
            if np.all(np.abs(values.real) <= 1e-12 * peak) and values.imag.min() < 0.0 < values.imag.max():
                return False
        return True

    def __str__(self) -> str:
        if not self.terms:
            return '0'
        return ' + '.join(f'{c:g}*d{b}' for b, c in self.terms)


@lru_cache(maxsize=64)
def _axis_powers(grid: 'Grid', half: bool, max_order: int) -> tuple[np.ndarray, ...]:
    k = grid.half_wavenumbers() if half else grid.wavenumbers()
    nyquist = np.isclose(np.abs(k), np.pi / grid.h)
    powers = []
    for order in range(max_order + 1):
        factor = (1j * k) ** order
        if order % 2:
            factor = np.where(nyquist, 0.0, factor)
        powers.append(factor.astype(np.complex128))
    return tuple(powers)


LAPLACIAN = SymbolPolynomial.laplacian()
BILAPLACIAN = LAPLACIAN * LAPLACIAN
