"""Uniform periodic grids, axis directions and sampled fields."""
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache
import re

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from elastoborn.errors import DirectionError, FieldError, GridMismatchError

OMEGA_RADIUS = 1.0


class Grid(BaseModel):
    """The box [-L, L)^3 sampled with N nodes per axis, x3 varying fastest."""

    model_config = ConfigDict(frozen=True)

    N: int = 64
    L: float = 2.0

    @field_validator('N')
    @classmethod
    def _check_points(cls, value: int) -> int:
        if value < 8 or value % 2:
            raise ValueError('N must be an even integer >= 8')
        return value

    @field_validator('L')
    @classmethod
    def _check_half_width(cls, value: float) -> float:
        if value < 2.0:
            raise ValueError('L must be >= 2 so the unit ball keeps a margin of 1')
        return value

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.N, self.N, self.N)

    def axis_coordinates(self) -> np.ndarray:
        """Node coordinates along one axis: -L + h*i."""
        return _axis_coordinates(self)

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays (x1, x2, x3)."""
        x = self.axis_coordinates()
        return x[:, None, None], x[None, :, None], x[None, None, :]

    def radius(self) -> np.ndarray:
        return _radius(self)

    def ball_mask(self, radius: float = OMEGA_RADIUS, closed: bool = False) -> np.ndarray:
        """Boolean mask of nodes with |x| < radius (or <= when closed)."""
        r = self.radius()
        return r <= radius if closed else r < radius

    def omega_mask(self) -> np.ndarray:
        return _omega_mask(self)

    def interior_mask(self, margin: int) -> np.ndarray:
        """Nodes at least `margin` nodes away from every box face."""
        inside = np.zeros(self.N, dtype=bool)
        inside[margin:self.N - margin] = True
        return inside[:, None, None] & inside[None, :, None] & inside[None, None, :]

    def shell_mask(self, width: int = 4) -> np.ndarray:
        """Outer shell {max_a |x_a| >= L - width*h}."""
        return ~self.interior_mask(width)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers matching scipy.fft ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    def half_wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers for the last (rfft) axis."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.N, d=self.h)

    def along(self, direction: 'Direction') -> np.ndarray:
        """theta . x as a broadcastable array."""
        return direction.sign * self.mesh()[direction.index]


@lru_cache(maxsize=16)
def _axis_coordinates(grid: Grid) -> np.ndarray:
    return -grid.L + grid.h * np.arange(grid.N, dtype=np.float64)


@lru_cache(maxsize=16)
def _radius(grid: Grid) -> np.ndarray:
    x1, x2, x3 = grid.mesh()
    return np.sqrt(x1**2 + x2**2 + x3**2)


@lru_cache(maxsize=16)
def _omega_mask(grid: Grid) -> np.ndarray:
    return _radius(grid) < OMEGA_RADIUS


_DIRECTION_PATTERN = re.compile(r'^\s*([+-]?)\s*e([123])\s*$')


@dataclass(frozen=True)
class Direction:
    """Signed coordinate axis: sign * e_axis with axis in {1, 2, 3}."""

    axis: int
    sign: int = 1

    def __post_init__(self):
        if self.axis not in (1, 2, 3):
            raise DirectionError(f'axis must be 1, 2 or 3, got {self.axis}')
        if self.sign not in (1, -1):
            raise DirectionError(f'sign must be +1 or -1, got {self.sign}')

    @classmethod
    def parse(cls, text: 'str | Direction') -> 'Direction':
        """Parse '+e1', 'e2' or '-e3'."""
        if isinstance(text, Direction):
            return text
        match = _DIRECTION_PATTERN.match(text)
        if match is None:
            raise DirectionError(f'only coordinate directions like +e1 or -e3 are supported, got {text!r}')
        return cls(axis=int(match.group(2)), sign=-1 if match.group(1) == '-' else 1)

    @property
    def index(self) -> int:
        return self.axis - 1

    @property
    def vector(self) -> np.ndarray:
        v = np.zeros(3)
        v[self.index] = self.sign
        return v

    def dot(self, other: 'Direction') -> int:
        return self.sign * other.sign if self.axis == other.axis else 0

    def cross(self, other: 'Direction') -> 'Direction | None':
        """self x other, or None when parallel."""
        if self.axis == other.axis:
            return None
        third = 6 - self.axis - other.axis
        parity = 1 if (self.axis, other.axis) in ((1, 2), (2, 3), (3, 1)) else -1
        return Direction(third, parity * self.sign * other.sign)

    def __neg__(self) -> 'Direction':
        return Direction(self.axis, -self.sign)

    def __str__(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}e{self.axis}"


E1, E2, E3 = Direction(1), Direction(2), Direction(3)
AXES = (E1, E2, E3)


class SupportTag(StrEnum):
    """Decay behavior of a sampled field."""

    COMPACT = 'compact-in-omega'
    UPSTREAM = 'upstream-vanishing'
    GENERAL = 'general'


def _combine_support(
    a: tuple[SupportTag, Direction | None],
    b: tuple[SupportTag, Direction | None],
) -> tuple[SupportTag, Direction | None]:
    if a[0] == SupportTag.COMPACT:
        return b
    if b[0] == SupportTag.COMPACT:
        return a
    if a[0] == b[0] == SupportTag.UPSTREAM and a[1] == b[1]:
        return a
    return SupportTag.GENERAL, None


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real samples of a function on a Grid, stored as an (N, N, N) array."""

    grid: Grid
    values: np.ndarray
    support_tag: SupportTag = SupportTag.GENERAL
    upstream: Direction | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            if values.size != self.grid.N**3:
                raise FieldError(f'expected {self.grid.N**3} samples, got {values.size}')
            values = values.reshape(self.grid.shape)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'support_tag', SupportTag(self.support_tag))
        if not np.isfinite(values).all():
            raise FieldError('field values must be finite')
        if self.support_tag == SupportTag.UPSTREAM and self.upstream is None:
            raise FieldError('upstream-vanishing fields need their ray direction')
        if self.support_tag != SupportTag.UPSTREAM and self.upstream is not None:
            object.__setattr__(self, 'upstream', None)
        if self.support_tag == SupportTag.COMPACT and np.any(values[~self.grid.omega_mask()]):
            raise FieldError('compact-in-omega field has nonzero values at |x| >= 1')

    @classmethod
    def zeros(cls, grid: Grid) -> 'ScalarField':
        return cls(grid, np.zeros(grid.shape), SupportTag.COMPACT)

    @classmethod
    def compact(cls, grid: Grid, values: np.ndarray) -> 'ScalarField':
        """Tag as compact-in-omega after zeroing every node with |x| >= 1."""
        values = np.where(grid.omega_mask(), np.asarray(values, dtype=np.float64).reshape(grid.shape), 0.0)
        return cls(grid, values, SupportTag.COMPACT)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray], tag: SupportTag = SupportTag.GENERAL) -> 'ScalarField':
        values = np.broadcast_to(fn(*grid.mesh()), grid.shape)
        if tag == SupportTag.COMPACT:
            return cls.compact(grid, values)
        return cls(grid, values, tag)

    @property
    def support(self) -> tuple[SupportTag, Direction | None]:
        return self.support_tag, self.upstream

    def with_values(self, values: np.ndarray, support: tuple[SupportTag, Direction | None] | None = None) -> 'ScalarField':
        tag, upstream = support if support is not None else self.support
        if tag == SupportTag.COMPACT:
            return ScalarField.compact(self.grid, values)
        return ScalarField(self.grid, values, tag, upstream)

    def _check(self, other: 'ScalarField') -> None:
        if other.grid != self.grid:
            raise GridMismatchError(f'{self.grid} vs {other.grid}')

    def __add__(self, other: 'ScalarField') -> 'ScalarField':
        self._check(other)
        return self.with_values(self.values + other.values, _combine_support(self.support, other.support))

    def __sub__(self, other: 'ScalarField') -> 'ScalarField':
        self._check(other)
        return self.with_values(self.values - other.values, _combine_support(self.support, other.support))

    def __mul__(self, scalar: float) -> 'ScalarField':
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> 'ScalarField':
        return self.with_values(self.values / float(scalar))

    def __neg__(self) -> 'ScalarField':
        return self.with_values(-self.values)

    def flat(self) -> np.ndarray:
        """Values in the linear order (i1*N + i2)*N + i3."""
        return self.values.reshape(-1)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Three scalar components on one grid."""

    components: tuple[ScalarField, ScalarField, ScalarField]

    def __post_init__(self):
        components = tuple(self.components)
        if len(components) != 3:
            raise FieldError('a vector field has exactly three components')
        grid = components[0].grid
        for component in components[1:]:
            if component.grid != grid:
                raise GridMismatchError('vector components live on different grids')
        object.__setattr__(self, 'components', components)

    @classmethod
    def zeros(cls, grid: Grid) -> 'VectorField':
        return cls(tuple(ScalarField.zeros(grid) for _ in range(3)))

    @classmethod
    def along(cls, f: ScalarField, vector: Sequence[float]) -> 'VectorField':
        """f times a constant vector."""
        return cls(tuple(f * float(c) for c in vector))

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    def __getitem__(self, index: int) -> ScalarField:
        return self.components[index]

    def __iter__(self):
        return iter(self.components)

    def map(self, fn: Callable[[ScalarField], ScalarField]) -> 'VectorField':
        return VectorField(tuple(fn(c) for c in self.components))

    def __add__(self, other: 'VectorField') -> 'VectorField':
        return VectorField(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: 'VectorField') -> 'VectorField':
        return VectorField(tuple(a - b for a, b in zip(self.components, other.components)))

    def __mul__(self, scalar: float) -> 'VectorField':
        return self.map(lambda c: c * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> 'VectorField':
        return self.map(lambda c: c / scalar)

    def __neg__(self) -> 'VectorField':
        return self.map(lambda c: -c)

    def cross(self, vector: Sequence[float]) -> 'VectorField':
        """Pointwise V x u for a constant vector u."""
        u = [float(c) for c in vector]
        v = self.components
        zero = ScalarField.zeros(self.grid)

        def term(a: ScalarField, ca: float, b: ScalarField, cb: float) -> ScalarField:
            out = zero
            if ca:
                out = out + a * ca
            if cb:
                out = out - b * cb
            return out

        return VectorField((
            term(v[1], u[2], v[2], u[1]),
            term(v[2], u[0], v[0], u[2]),
            term(v[0], u[1], v[1], u[0]),
        ))

    def rcross(self, vector: Sequence[float]) -> 'VectorField':
        """Pointwise u x V for a constant vector u."""
        return -self.cross(vector)


type Field = ScalarField | VectorField


def field_values(f: Field) -> np.ndarray:
    """Stacked values: (N,N,N) for scalars, (3,N,N,N) for vectors."""
    if isinstance(f, VectorField):
        return np.stack([c.values for c in f.components])
    return f.values


def zeros_like(f: Field) -> Field:
    if isinstance(f, VectorField):
        return VectorField.zeros(f.grid)
    return ScalarField.zeros(f.grid)


__all__ = [
    'AXES',
    'Direction',
    'E1',
    'E2',
    'E3',
    'Field',
    'Grid',
    'OMEGA_RADIUS',
    'ScalarField',
    'SupportTag',
    'VectorField',
    'field_values',
    'zeros_like',
]
