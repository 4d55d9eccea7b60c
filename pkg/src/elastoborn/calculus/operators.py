"""Differential and integral operators on sampled fields.

Compact-in-omega fields are periodic on the box and use FFT (scipy.fft)
derivatives. Ray-integrated fields are not periodic and use the sixth-order
stencils from `stencils`.
"""
from enum import StrEnum
from math import factorial
import itertools
import logging
import warnings

import numpy as np
from scipy import fft
from scipy.interpolate import make_interp_spline

from elastoborn.calculus.grid import Direction, Field, Grid, ScalarField, SupportTag, VectorField
from elastoborn.calculus.stencils import derivative_along, partial_fd
from elastoborn.calculus.symbols import LAPLACIAN, MultiIndex, SymbolPolynomial
from elastoborn.errors import FieldError, NonPeriodicFieldError, NotEllipticError, ResidualTooLargeError, SupportLeakageWarning
from elastoborn.settings import thread_count

logger = logging.getLogger(__name__)

ELLIPTIC_TRUNCATION = 1.1
ELLIPTIC_TOLERANCE = 1e-4
LEAKAGE_TOLERANCE = 1e-6
TAPER_START = 0.95
SHELL_WIDTH = 4


class Backend(StrEnum):
    SPECTRAL = 'spectral'
    FD = 'fd'


class NormKind(StrEnum):
    L2 = 'L2'
    HS = 'Hs'


class Region(StrEnum):
    OMEGA = 'omega'
    BOX = 'box'


def _rfftn(values: np.ndarray) -> np.ndarray:
    return fft.rfftn(values, workers=thread_count())


def _irfftn(coefficients: np.ndarray, grid: Grid) -> np.ndarray:
    return fft.irfftn(coefficients, s=grid.shape, workers=thread_count())


def _resolve_backend(f: ScalarField, backend: Backend | str | None) -> Backend:
    if backend is None:
        return Backend.SPECTRAL if f.support_tag == SupportTag.COMPACT else Backend.FD
    backend = Backend(backend)
    if backend == Backend.SPECTRAL and f.support_tag != SupportTag.COMPACT:
        raise NonPeriodicFieldError(f'support tag is {f.support_tag}')
    return backend


def _derived(f: ScalarField, values: np.ndarray) -> ScalarField:
    """A derivative keeps the support class of its argument."""
    return f.with_values(values)


def diff(f: ScalarField, multi_index: MultiIndex, backend: Backend | str | None = None) -> ScalarField:
    """d^beta f with the spectral backend for compact fields, fd otherwise."""
    beta = tuple(int(b) for b in multi_index)
    if _resolve_backend(f, backend) == Backend.SPECTRAL:
        return apply_symbol(f, SymbolPolynomial(((beta, 1.0),)), Backend.SPECTRAL)
    return _derived(f, partial_fd(f.values, beta, f.grid.h))


def directional(f: ScalarField, direction: Direction, backend: Backend | str | None = None) -> ScalarField:
    """theta . grad f for a signed axis direction."""
    beta = [0, 0, 0]
    beta[direction.index] = 1
    return diff(f, tuple(beta), backend) * direction.sign


def apply_symbol(f: ScalarField, p: SymbolPolynomial, backend: Backend | str | None = None) -> ScalarField:
    """sum_beta c_beta d^beta f."""
    if _resolve_backend(f, backend) == Backend.SPECTRAL:
        if not p:
            return ScalarField.zeros(f.grid)
        values = _irfftn(p.on_grid(f.grid) * _rfftn(f.values), f.grid)
        return _derived(f, values)
    values = np.zeros(f.grid.shape)
    for beta, c in p.terms:
        values += c * partial_fd(f.values, beta, f.grid.h)
    return _derived(f, values)


def laplacian(f: ScalarField, backend: Backend | str | None = None) -> ScalarField:
    if _resolve_backend(f, backend) == Backend.FD:
        values = sum(derivative_along(f.values, axis, 2, f.grid.h) for axis in range(3))
        return _derived(f, values)
    return apply_symbol(f, LAPLACIAN, Backend.SPECTRAL)


def gradient(f: ScalarField, backend: Backend | str | None = None) -> VectorField:
    return VectorField(tuple(diff(f, beta, backend) for beta in ((1, 0, 0), (0, 1, 0), (0, 0, 1))))


def _spectral_cumulative(y: np.ndarray, h: float) -> np.ndarray:
    """Integral from the first node along the last axis, periodic part by FFT."""
    n = y.shape[-1]
    coefficients = fft.rfft(y, axis=-1, workers=thread_count())
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)
    mean = coefficients[..., 0].real / n
    scaled = np.zeros_like(coefficients)
    scaled[..., 1:] = coefficients[..., 1:] / (1j * k[1:])
    scaled[..., -1] = 0.0
    periodic = fft.irfft(scaled, n=n, axis=-1, workers=thread_count())
    ramp = h * np.arange(n)
    return periodic - periodic[..., :1] + mean[..., None] * ramp


def _spline_cumulative(y: np.ndarray, h: float) -> np.ndarray:
    """Integral from the first node along the last axis of a quintic interpolant."""
    x = h * np.arange(y.shape[-1])
    primitive = make_interp_spline(x, y, k=5, axis=-1).antiderivative()
    out = primitive(x)
    return out - out[..., :1]


def _line_antiderivative(values: np.ndarray, axis: int, sign: int, h: float, periodic: bool) -> np.ndarray:
    moved = np.moveaxis(values, axis, -1)
    if sign < 0:
        moved = moved[..., ::-1]
    out = _spectral_cumulative(moved, h) if periodic else _spline_cumulative(moved, h)
    if sign < 0:
        out = out[..., ::-1]
    return np.ascontiguousarray(np.moveaxis(out, -1, axis))


def ray_antiderivative(f: ScalarField, axis: int, sign: int = 1) -> ScalarField:
    """g(x) = int_0^inf f(x - s theta) ds for theta = sign * e_axis.

    Compact inputs are integrated spectrally along each grid line; inputs
    that already vanish upstream along theta use a quintic spline primitive.
    The result vanishes exactly at nodes with theta . x < -1.
    """
    direction = Direction(axis, sign)
    if f.support_tag == SupportTag.COMPACT:
        periodic = True
    elif f.support_tag == SupportTag.UPSTREAM and f.upstream == direction:
        periodic = False
    else:
        raise FieldError(f'ray antiderivative along {direction} needs a field vanishing upstream, got {f.support_tag}')
    values = _line_antiderivative(f.values, direction.index, sign, f.grid.h, periodic)
    values = np.where(f.grid.along(direction) < -1.0, 0.0, values)
    return ScalarField(f.grid, values, SupportTag.UPSTREAM, direction)


def inverse_transport(f: Field, direction: Direction) -> Field:
    """L_theta^{-1} applied componentwise."""
    if isinstance(f, VectorField):
        return f.map(lambda c: ray_antiderivative(c, direction.axis, direction.sign))
    return ray_antiderivative(f, direction.axis, direction.sign)


def double_antiderivative(g: ScalarField, axes: tuple[int, int] = (2, 3)) -> ScalarField:
    """f with d_a d_b f = g, integrating from the upstream faces of both axes."""
    if g.support_tag != SupportTag.COMPACT:
        raise NonPeriodicFieldError('double antiderivative needs a compact-in-omega field')
    values = g.values
    for axis in axes:
        values = _line_antiderivative(values, axis - 1, 1, g.grid.h, periodic=True)
    peak = np.abs(values).max()
    if peak > 0.0:
        leakage = max(np.abs(np.take(values, -1, axis=axis - 1)).max() for axis in axes)
        if leakage > LEAKAGE_TOLERANCE * peak:
            logger.warning('Support leakage %.3e on downstream faces (peak %.3e)', leakage, peak)
            warnings.warn(
                SupportLeakageWarning(f'double antiderivative leaks {leakage:.3e} onto downstream faces'),
                stacklevel=2,
            )
    return ScalarField.compact(g.grid, values)


def truncate(f: ScalarField, radius: float) -> ScalarField:
    """Multiply by the indicator of |x| <= radius."""
    values = np.where(f.grid.ball_mask(radius, closed=True), f.values, 0.0)
    if radius <= 1.0:
        return ScalarField.compact(f.grid, values)
    return ScalarField(f.grid, values, SupportTag.GENERAL)


def compact_taper(grid: Grid, start: float = TAPER_START, stop: float = 1.0) -> np.ndarray:
    """Smooth weight equal to 1 for |x| <= start and 0 for |x| >= stop."""

    def bump(t: np.ndarray) -> np.ndarray:
        positive = t > 0.0
        return np.where(positive, np.exp(-1.0 / np.where(positive, t, 1.0)), 0.0)

    s = np.clip((grid.radius() - start) / (stop - start), 0.0, 1.0)
    return bump(1.0 - s) / (bump(1.0 - s) + bump(s))


def taper(f: ScalarField) -> ScalarField:
    return ScalarField.compact(f.grid, f.values * compact_taper(f.grid))


def invert_symbol(
    g: ScalarField,
    p: SymbolPolynomial,
    tolerance: float = ELLIPTIC_TOLERANCE,
    truncation: float = ELLIPTIC_TRUNCATION,
) -> ScalarField:
    """Solve p(D) u = g for a u known to be compact in the unit ball.

    The right-hand side is clipped to |x| <= truncation, divided by the
    symbol in Fourier space, shifted so the outer shell has zero mean, and
    tapered back into the unit ball.
    """
    if not p.elliptic:
        raise NotEllipticError(p)
    grid = g.grid
    rhs = np.where(grid.ball_mask(truncation, closed=True), g.values, 0.0)
    symbol = p.on_grid(grid)
    invertible = np.abs(symbol) > 0.0
    coefficients = _rfftn(rhs)
    solution = np.where(invertible, coefficients / np.where(invertible, symbol, 1.0), 0.0)
    u = _irfftn(solution, grid)
    u -= u[grid.shell_mask(SHELL_WIDTH)].mean()

    omega = grid.omega_mask()
    scale = np.sqrt(np.sum(rhs[omega] ** 2))
    mismatch = np.sqrt(np.sum((_irfftn(symbol * _rfftn(u), grid) - rhs)[omega] ** 2))
    residual = mismatch / scale if scale > 0.0 else float(mismatch > 0.0)
    logger.debug('invert_symbol %s residual %.3e', p, residual)
    if residual > tolerance:
        raise ResidualTooLargeError(residual, tolerance)
    return ScalarField.compact(grid, u * compact_taper(grid))


def _region_mask(grid: Grid, region: Region | str | np.ndarray) -> np.ndarray:
    if isinstance(region, np.ndarray):
        return region
    if Region(region) == Region.OMEGA:
        return grid.omega_mask()
    return np.ones(grid.shape, dtype=bool)


def norm(f: Field, kind: NormKind | str = NormKind.L2, region: Region | str | np.ndarray = Region.OMEGA, s: float = 0.0) -> float:
    """Discrete L2 or spectral H^s norm with trapezoid weights h^3."""
    if isinstance(f, VectorField):
        return float(np.sqrt(sum(norm(c, kind, region, s) ** 2 for c in f.components)))
    mask = _region_mask(f.grid, region)
    values = f.values
    if NormKind(kind) == NormKind.HS:
        if f.support_tag != SupportTag.COMPACT:
            raise NonPeriodicFieldError('Sobolev norms are spectral and need a compact-in-omega field')
        weight = (1.0 + (-LAPLACIAN.on_grid(f.grid).real)) ** (s / 2.0)
        values = _irfftn(weight * _rfftn(values), f.grid)
    return float(np.sqrt(f.grid.h**3 * np.sum(values[mask] ** 2)))


def sobolev_fd_norm(f: Field, order: int = 4, region: Region | str | np.ndarray = Region.OMEGA) -> float:
    """(sum_{|beta| <= order} |beta|!/beta! ||d^beta f||^2)^(1/2) with fd derivatives."""
    if isinstance(f, VectorField):
        return float(np.sqrt(sum(sobolev_fd_norm(c, order, region) ** 2 for c in f.components)))
    mask = _region_mask(f.grid, region)
    total = 0.0
    for beta in itertools.product(range(order + 1), repeat=3):
        if sum(beta) > order:
            continue
        weight = factorial(sum(beta)) / (factorial(beta[0]) * factorial(beta[1]) * factorial(beta[2]))
        derivative = partial_fd(f.values, beta, f.grid.h)
        total += weight * f.grid.h**3 * np.sum(derivative[mask] ** 2)
    return float(np.sqrt(total))


def relative_difference(a: Field, b: Field, region: Region | str | np.ndarray = Region.OMEGA) -> float:
    """||a - b|| / max(||a||, ||b||) over a region, 0 when both vanish."""
    scale = max(norm(a, region=region), norm(b, region=region))
    if scale == 0.0:
        return 0.0
    return norm(a - b, region=region) / scale
