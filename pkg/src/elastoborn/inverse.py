"""Isotropic data functionals, the mu -> rho -> lambda reconstruction and the stability harness.

The data functional of a channel combines the transport sources F_r (P) or
G_r (S) as

    D = F_0 + (Delta/2) L^-1 (F_1 + (Delta/2) L^-1 F_2),

with L = theta . grad, L^-1 the ray antiderivative and fd Laplacians on
ray-integrated fields. Reconstruction assumes theta = +e1, alpha = +e2.
"""
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
import logging
import warnings

import numpy as np
from scipy.linalg import svdvals

from elastoborn.calculus import (
    BILAPLACIAN,
    E1,
    E2,
    LAPLACIAN,
    Backend,
    Direction,
    Field,
    Grid,
    NormKind,
    ScalarField,
    SymbolPolynomial,
    VectorField,
    apply_symbol,
    diff,
    directional,
    double_antiderivative,
    gradient,
    inverse_transport,
    invert_symbol,
    laplacian,
    norm,
    ray_antiderivative,
    relative_difference,
    sobolev_fd_norm,
    taper,
    truncate,
)
from elastoborn.channels.base import Mode
from elastoborn.errors import DirectionError, GridMismatchError, MaskTooSmallError, SupportLeakageWarning
from elastoborn.models import ReconstructionOptions, ReconstructionReportModel, StabilityReportModel
from elastoborn.tensors import Background
from elastoborn.utils.perturbations import random_isotropic

logger = logging.getLogger(__name__)

# three nodes per fd level, two nested levels
MASK_MARGIN = 6
MASK_RADIUS = 1.2
SOBOLEV_ORDER = 4
MIN_STABILITY_SAMPLES = 10

Triple = tuple[ScalarField, ScalarField, ScalarField]

D1 = SymbolPolynomial.partial(1)
D2 = SymbolPolynomial.partial(2)
D3 = SymbolPolynomial.partial(3)
HALF_LAPLACIAN = LAPLACIAN * 0.5


@dataclass(frozen=True, eq=False)
class SourceTriple:
    """Transport sources of orders 0, 1, 2 for one channel."""

    s0: Field
    s1: Field
    s2: Field

    def __iter__(self):
        return iter((self.s0, self.s1, self.s2))


@dataclass(frozen=True, eq=False)
class DataFunctional:
    kind: Mode
    theta: Direction
    alpha: Direction | None
    field: Field
    mask: np.ndarray
    sources: SourceTriple | None = None

    @property
    def grid(self) -> Grid:
        return self.field.grid

    def __getitem__(self, index: int) -> ScalarField:
        if not isinstance(self.field, VectorField):
            raise TypeError('the P data functional is scalar')
        return self.field[index]


def _half_laplacian(f: Field) -> Field:
    if isinstance(f, VectorField):
        return f.map(lambda c: laplacian(c, Backend.FD) * 0.5)
    return laplacian(f, Backend.FD) * 0.5


def combine_sources(sources: SourceTriple, theta: Direction) -> Field:
    """F_0 + (Delta/2) L^-1 (F_1 + (Delta/2) L^-1 F_2)."""
    inner = sources.s1 + _half_laplacian(inverse_transport(sources.s2, theta))
    return sources.s0 + _half_laplacian(inverse_transport(inner, theta))


def _check_inputs(lam: ScalarField, mu: ScalarField, rho: ScalarField) -> Grid:
    grid = lam.grid
    if mu.grid != grid or rho.grid != grid:
        raise GridMismatchError('lambda, mu and rho must share one grid')
    return grid


def p_sources(lam: ScalarField, mu: ScalarField, rho: ScalarField, bg: Background, theta: Direction = E1) -> SourceTriple:
    L = SymbolPolynomial.directional(theta)
    cp2 = bg.cp2
    F0 = -(laplacian(lam) + apply_symbol(mu, L * L * 2.0))
    F1 = directional(lam * 2.0 + mu * 4.0 - rho * cp2, theta)
    F2 = -(lam + mu * 2.0 - rho * cp2)
    return SourceTriple(F0, F1, F2)


def s_sources(mu: ScalarField, rho: ScalarField, bg: Background, theta: Direction = E1, alpha: Direction = E2) -> SourceTriple:
    t, a = theta.vector, alpha.vector
    normal = np.cross(t, a)
    nu = mu - rho * bg.cs2
    G0 = -(gradient(directional(mu, alpha)).rcross(t) + gradient(directional(mu, theta)).rcross(a))
    G1 = gradient(nu).rcross(a) - VectorField.along(directional(mu, theta), normal)
    G2 = VectorField.along(nu, normal)
    return SourceTriple(G0, G1, G2)


def data_functional_p(
    lam: ScalarField,
    mu: ScalarField,
    rho: ScalarField,
    bg: Background,
    theta: Direction = E1,
    margin: int = MASK_MARGIN,
) -> DataFunctional:
    grid = _check_inputs(lam, mu, rho)
    theta = Direction.parse(theta)
    sources = p_sources(lam, mu, rho, bg, theta)
    return DataFunctional(Mode.P, theta, None, combine_sources(sources, theta), grid.interior_mask(margin), sources)


def data_functional_s(
    lam: ScalarField,
    mu: ScalarField,
    rho: ScalarField,
    bg: Background,
    theta: Direction = E1,
    alpha: Direction = E2,
    margin: int = MASK_MARGIN,
) -> DataFunctional:
    """lambda does not enter the S sources; it is accepted for a uniform call signature."""
    grid = _check_inputs(lam, mu, rho)
    theta, alpha = Direction.parse(theta), Direction.parse(alpha)
    if theta.dot(alpha) != 0:
        raise DirectionError(f'polarization {alpha} is not orthogonal to {theta}')
    sources = s_sources(mu, rho, bg, theta, alpha)
    return DataFunctional(Mode.S, theta, alpha, combine_sources(sources, theta), grid.interior_mask(margin), sources)


# d1^2 D_p = -(Delta^2/4) lambda + MU_P mu + cp^2 RHO_P rho
MU_P = (D1 * D1 * LAPLACIAN - D1**4 - BILAPLACIAN * 0.25) * 2.0
RHO_P = BILAPLACIAN * 0.25 - LAPLACIAN * D1 * D1 * 0.5
# d1^2 of the theta x alpha component of D_s, with the alternate reduction kept for comparison
MU_S3 = D1**4 - D1 * D1 * D2 * D2 - LAPLACIAN * D1 * D1 + BILAPLACIAN * 0.25
RHO_S3 = HALF_LAPLACIAN * (HALF_LAPLACIAN - D1 * D1) * -1.0
MU_S3_ALTERNATE = D1**4 + LAPLACIAN * D1 * D1 + BILAPLACIAN * 0.25 - D1 * D2
RHO_S3_ALTERNATE = (D1 * D1 + HALF_LAPLACIAN) * HALF_LAPLACIAN * -1.0


@dataclass(frozen=True, eq=False)
class Reconstruction:
    lam: ScalarField
    mu: ScalarField
    rho: ScalarField
    report: ReconstructionReportModel
    warnings: list[str] = field(default_factory=list)

    def triple(self) -> tuple[ScalarField, ScalarField, ScalarField]:
        return self.lam, self.mu, self.rho


def _check_mask(mask: np.ndarray, grid: Grid, radius: float) -> None:
    if np.any(grid.ball_mask(radius, closed=True) & ~mask):
        raise MaskTooSmallError(radius)


def relative_error(estimate: ScalarField, truth: ScalarField, scale: float | None = None) -> float:
    """||estimate - truth|| / ||truth|| on omega; `scale` replaces ||truth|| when given."""
    reference = norm(truth) if scale is None else scale
    mismatch = norm(estimate - truth)
    if reference == 0.0:
        return 0.0 if mismatch == 0.0 else float('inf')
    return mismatch / reference


def reconstruct(
    dp: DataFunctional,
    ds: DataFunctional,
    bg: Background,
    options: ReconstructionOptions | None = None,
    truth: tuple[ScalarField, ScalarField, ScalarField] | None = None,
) -> Reconstruction:
    """Recover (lambda, mu, rho) from the P and S data functionals for theta = +e1, alpha = +e2."""
    options = options or ReconstructionOptions()
    if dp.grid != ds.grid:
        raise GridMismatchError('P and S data live on different grids')
    if dp.theta != E1 or ds.theta != E1 or ds.alpha != E2:
        raise DirectionError('reconstruction expects theta = +e1 and alpha = +e2')
    grid = dp.grid
    mask = dp.mask & ds.mask
    _check_mask(mask, grid, options.mask_radius)
    cs2, cp2 = bg.cs2, bg.cp2
    fd, spectral = Backend.FD, Backend.SPECTRAL

    # stage 1: the alpha component is d2 d3 mu
    observed_23 = truncate(ds[1], options.truncation)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', SupportLeakageWarning)
        mu = taper(double_antiderivative(observed_23, (2, 3)))
    notes = [str(w.message) for w in caught if issubclass(w.category, SupportLeakageWarning)]
    for note in notes:
        logger.warning('Stage 1: %s', note)
    logger.info('Stage 1 recovered mu')

    # stage 2: the theta component gives cs^2 (Delta/2) d3 rho after removing mu
    g3 = (
        -directional(ds[0], E1, fd)
        - apply_symbol(mu, D1 * D1 * D3, spectral)
        + apply_symbol(mu, HALF_LAPLACIAN * D3, spectral)
    )
    g3 = truncate(g3, options.truncation)
    q = ray_antiderivative(g3, 3, 1)
    rho = invert_symbol(q * (2.0 / cs2), LAPLACIAN, tolerance=options.elliptic_tolerance)
    logger.info('Stage 2 recovered rho')

    # stage 3: d1^2 D_p leaves -(Delta^2/4) lambda
    hs = diff(dp.field, (2, 0, 0), fd) - apply_symbol(mu, MU_P, spectral) - apply_symbol(rho, RHO_P * cp2, spectral)
    lam = invert_symbol(hs * -4.0, BILAPLACIAN, tolerance=options.elliptic_tolerance)
    logger.info('Stage 3 recovered lambda')

    omega = grid.omega_mask()
    stage_residuals = {
        'stage1': relative_difference(apply_symbol(mu, D2 * D3, spectral), observed_23),
        'stage2': relative_difference(apply_symbol(rho, HALF_LAPLACIAN * cs2, spectral), q, omega),
        'stage3': relative_difference(apply_symbol(lam, BILAPLACIAN * -0.25, spectral), hs, omega),
    }
    observed_33 = diff(ds[2], (2, 0, 0), fd)
    consistency = {
        'derived': relative_difference(
            observed_33,
            apply_symbol(mu, MU_S3, spectral) + apply_symbol(rho, RHO_S3 * cs2, spectral),
            omega,
        ),
        'alternate': relative_difference(
            observed_33,
            apply_symbol(mu, MU_S3_ALTERNATE, spectral) + apply_symbol(rho, RHO_S3_ALTERNATE * cs2, spectral),
            omega,
        ),
    }
    if consistency['derived'] > consistency['alternate']:
        logger.warning('Stage 2 consistency favors the alternate operator: %s', consistency)

    errors = {}
    if truth is not None:
        t_lam, t_mu, t_rho = truth
        scale = max(norm(t_lam), norm(t_mu), norm(t_rho))
        for name, estimate, exact in (('lambda', lam, t_lam), ('mu', mu, t_mu), ('rho', rho, t_rho)):
            errors[name] = relative_error(estimate, exact, None if norm(exact) > 0.0 else scale)

    report = ReconstructionReportModel(
        stage_residuals=stage_residuals,
        errors=errors,
        consistency=consistency,
        mask_radius=options.mask_radius,
        passed=max(stage_residuals.values()) <= options.elliptic_tolerance,
        warnings=notes,
    )
    return Reconstruction(lam, mu, rho, report, notes)


def forward_isotropic(
    lam: ScalarField,
    mu: ScalarField,
    rho: ScalarField,
    bg: Background,
    margin: int = MASK_MARGIN,
) -> tuple[DataFunctional, DataFunctional]:
    """Both data functionals in the frame the reconstruction uses."""
    return data_functional_p(lam, mu, rho, bg, E1, margin), data_functional_s(lam, mu, rho, bg, E1, E2, margin)


def isotropic_symbol_rows(bg: Background) -> tuple[tuple[str, tuple[SymbolPolynomial, SymbolPolynomial, SymbolPolynomial]], ...]:
    """d1^2 of D_p and of each D_s component as operators on (lambda, mu, rho)."""
    zero = SymbolPolynomial()
    cs2, cp2 = bg.cs2, bg.cp2
    return (
        ('p', (BILAPLACIAN * -0.25, MU_P, RHO_P * cp2)),
        ('s1', (zero, D1 * D1 * D1 * D3 * -1.0 + HALF_LAPLACIAN * D1 * D3, HALF_LAPLACIAN * D1 * D3 * -cs2)),
        ('s2', (zero, D1 * D1 * D2 * D3, zero)),
        ('s3', (zero, MU_S3, RHO_S3 * cs2)),
    )


def isotropic_symbol_matrix(xi: Sequence[float], bg: Background) -> np.ndarray:
    """Rows of isotropic_symbol_rows evaluated at xi, each scaled to unit sup-norm."""
    xi = np.asarray(xi, dtype=np.float64)
    M = np.array([[p.evaluate(xi) for p in ops] for _, ops in isotropic_symbol_rows(bg)], dtype=np.complex128)
    peak = np.abs(M).max(axis=1)
    return M / np.where(peak > 0.0, peak, 1.0)[:, None]


def isotropic_certificate(samples: Sequence[Sequence[float]], bg: Background) -> list[float]:
    """Smallest singular value of the 4x3 isotropic symbol matrix at each sample."""
    return [float(svdvals(isotropic_symbol_matrix(xi, bg))[-1]) for xi in samples]


def _sobolev_norm(f: ScalarField) -> float:
    return norm(f, NormKind.HS, s=SOBOLEV_ORDER)


def triple_ratio(lam: ScalarField, mu: ScalarField, rho: ScalarField, bg: Background, margin: int = MASK_MARGIN) -> tuple[float, float]:
    """(H4 truth / H4 data, L2 data / L2 truth) for one triple."""
    dp, ds = forward_isotropic(lam, mu, rho, bg, margin)
    mask = dp.mask & ds.mask
    truth = _sobolev_norm(lam) + _sobolev_norm(mu) + _sobolev_norm(rho)
    data = sobolev_fd_norm(dp.field, SOBOLEV_ORDER, mask) + sobolev_fd_norm(ds.field, SOBOLEV_ORDER, mask)
    data_l2 = norm(dp.field, region=mask) + norm(ds.field, region=mask)
    truth_l2 = norm(lam) + norm(mu) + norm(rho)
    ratio = truth / data if data > 0.0 else float('inf')
    fraction = data_l2 / truth_l2 if truth_l2 > 0.0 else float('inf')
    return ratio, fraction


def stability_ratio(
    triples: Sequence[tuple[ScalarField, ScalarField, ScalarField]],
    bg: Background,
    scale: float = 7.0,
    floor: float = 1e-3,
    ratios: Sequence[tuple[float, float]] | None = None,
) -> StabilityReportModel:
    """Empirical Lipschitz ratios over sampled triples plus a homogeneity check on the first one.

    `ratios` may carry precomputed (ratio, fraction) pairs for the triples,
    e.g. from a thread pool.
    """
    if len(triples) < MIN_STABILITY_SAMPLES:
        raise ValueError(f'stability needs at least {MIN_STABILITY_SAMPLES} samples, got {len(triples)}')
    if ratios is None:
        ratios = [triple_ratio(*triple, bg) for triple in triples]
    values = [r for r, _ in ratios]
    fractions = [f for _, f in ratios]
    lam, mu, rho = triples[0]
    scaled, _ = triple_ratio(lam * scale, mu * scale, rho * scale, bg)
    defect = abs(scaled - values[0]) / values[0] if values[0] else 0.0
    max_ratio = float(np.max(values))
    report = StabilityReportModel(
        ratios=values,
        max_ratio=max_ratio,
        median_ratio=float(np.median(values)),
        homogeneity_defect=defect,
        min_data_fraction=float(np.min(fractions)),
        floor=floor,
        passed=bool(np.isfinite(max_ratio)) and defect <= 1e-10 and float(np.min(fractions)) >= floor,
    )
    logger.info('Stability: max ratio %.3e, median %.3e', report.max_ratio, report.median_ratio)
    return report


def sampled_stability_ratio(
    sample_count: int,
    seed: int,
    bg: Background,
    grid: Grid | None = None,
    margin: int = MASK_MARGIN,
    scale: float = 7.0,
    floor: float = 1e-3,
    map_ratios: Callable[[Callable[[Triple], tuple[float, float]], list[Triple]], list[tuple[float, float]]] | None = None,
) -> StabilityReportModel:
    """stability_ratio over random triples drawn with seeds seed, seed + 1, ...

    `map_ratios(fn, triples)` replaces the serial loop, e.g. with a thread pool.
    """
    if sample_count < MIN_STABILITY_SAMPLES:
        raise ValueError(f'stability needs at least {MIN_STABILITY_SAMPLES} samples, got {sample_count}')
    grid = grid or Grid()
    triples = [random_isotropic(grid, seed + k) for k in range(sample_count)]

    def ratio(triple: Triple) -> tuple[float, float]:
        return triple_ratio(*triple, bg, margin)

    ratios = map_ratios(ratio, triples) if map_ratios is not None else [ratio(t) for t in triples]
    return stability_ratio(triples, bg, scale, floor, ratios)
