"""Per-frequency symbol matrices, the kernel certificate and the elimination replay.

All identities have constant coefficients, so the question whether they
force a compactly supported perturbation to vanish decouples into one
22-column linear system per frequency xi.
"""
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import fft
from scipy.linalg import orth, svdvals
from scipy.stats import qmc

from elastoborn.calculus import Backend, ScalarField, SymbolPolynomial
from elastoborn.errors import DegenerateFrequencyError
from elastoborn.identities.forms import LinearForm
from elastoborn.identities.inventory import Family, IdentityRow, select_rows
from elastoborn.models import EliminationStepModel, KernelReportModel, KernelSampleModel, ReplayReportModel
from elastoborn.settings import thread_count
from elastoborn.tensors import PARAMETER_COUNT, VOIGT_KEYS, Background, Perturbation

logger = logging.getLogger(__name__)

GUARD_FRACTION = 0.05
MIN_RADIUS, MAX_RADIUS = 0.5, 2.0
KERNEL_TOLERANCE = 1e-6
REPLAY_TOLERANCE = 1e-8
RANK_RCOND = 1e-10
CERTIFICATE_MIN_SAMPLES = 100


class FrequencySample(BaseModel):
    """A frequency on a sphere of radius in [0.5, 2]."""

    model_config = ConfigDict(frozen=True)

    xi: tuple[float, float, float]

    @model_validator(mode='after')
    def _check_radius(self) -> 'FrequencySample':
        if not MIN_RADIUS - 1e-12 <= self.radius <= MAX_RADIUS + 1e-12:
            raise ValueError(f'|xi| = {self.radius:.4f} outside [{MIN_RADIUS}, {MAX_RADIUS}]')
        return self

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.xi, dtype=np.float64)

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.xi))

    @property
    def guard_ok(self) -> bool:
        """Away from the coordinate planes: min |xi_a| >= 0.05 |xi|."""
        return float(np.min(np.abs(self.array))) >= GUARD_FRACTION * self.radius

    def check_guard(self) -> None:
        if not self.guard_ok:
            raise DegenerateFrequencyError(self.xi)

    def scaled(self, t: float) -> 'FrequencySample':
        return FrequencySample(xi=tuple(t * x for x in self.xi))


@dataclass(frozen=True, eq=False)
class SymbolMatrix:
    """Rows of the identity system evaluated at one frequency."""

    sample: FrequencySample
    rows: tuple[IdentityRow, ...]
    raw: np.ndarray

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(row.label for row in self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.raw.shape

    @cached_property
    def scales(self) -> np.ndarray:
        """Sup-norm of each raw row; identically zero rows keep scale 1."""
        peak = np.abs(self.raw).max(axis=1) if self.raw.size else np.zeros(0)
        return np.where(peak > 0.0, peak, 1.0)

    @cached_property
    def normalized(self) -> np.ndarray:
        return self.raw / self.scales[:, None]

    @cached_property
    def singular_values(self) -> np.ndarray:
        if not self.raw.size:
            return np.zeros(0)
        return svdvals(self.normalized)

    @property
    def sigma_min(self) -> float:
        """The 22nd singular value, 0 when there are fewer than 22 rows."""
        if self.raw.shape[0] < PARAMETER_COUNT:
            return 0.0
        return float(self.singular_values[PARAMETER_COUNT - 1])

    def rowspace(self) -> np.ndarray:
        """Orthonormal basis of the span of the rows (columns of the result)."""
        if not self.raw.size:
            return np.zeros((PARAMETER_COUNT, 0), dtype=np.complex128)
        return orth(self.normalized.T, rcond=RANK_RCOND)

    def row(self, label: str) -> np.ndarray:
        return self.raw[self.labels.index(label)]


def symbol_matrix(
    sample: FrequencySample,
    bg: Background,
    families: Iterable[Family | str] | None = None,
    drop_families: Iterable[Family | str] = (),
) -> SymbolMatrix:
    """M(xi): one (lhs - rhs) symbol row per identity, columns c11 ... c66 then rho."""
    sample.check_guard()
    rows = select_rows(bg, families, tuple(drop_families))
    xi = sample.array
    raw = np.array([row.form.evaluate(xi) for row in rows], dtype=np.complex128).reshape(len(rows), PARAMETER_COUNT)
    return SymbolMatrix(sample, rows, raw)


def _sphere_points(count: int, seed: int) -> np.ndarray:
    m = max(1, int(np.ceil(np.log2(count))))
    u = qmc.Sobol(d=2, scramble=True, seed=seed).random_base2(m)
    z = 1.0 - 2.0 * u[:, 0]
    phi = 2.0 * np.pi * u[:, 1]
    r = np.sqrt(np.clip(1.0 - z**2, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def sphere_samples(count: int, seed: int = 0, radius: float = 1.0) -> list[FrequencySample]:
    """Guard-compliant scrambled-Sobol frequencies on a sphere, in sequence order."""
    size = 2 * count
    while True:
        points = _sphere_points(size, seed)
        keep = np.min(np.abs(points), axis=1) >= GUARD_FRACTION
        if keep.sum() >= count:
            break
        size *= 2
    chosen = points[keep][:count] * radius
    return [FrequencySample(xi=tuple(float(x) for x in p)) for p in chosen]


def kernel_certificate(
    samples: Sequence[FrequencySample],
    bg: Background,
    tolerance: float = KERNEL_TOLERANCE,
    drop_families: Iterable[Family | str] = (),
) -> KernelReportModel:
    """sigma_min of the normalized symbol matrix at every sample.

    PASS needs at least CERTIFICATE_MIN_SAMPLES samples and every sigma_min
    above tolerance.
    """
    drop_families = tuple(Family(f) for f in drop_families)
    enough = len(samples) >= CERTIFICATE_MIN_SAMPLES
    if not enough:
        logger.warning('Kernel certificate on %d samples cannot pass; %d or more are needed', len(samples), CERTIFICATE_MIN_SAMPLES)
    records = []
    for sample in samples:
        M = symbol_matrix(sample, bg, drop_families=drop_families)
        records.append(KernelSampleModel(xi=sample.xi, sigma_min=M.sigma_min, rows=M.shape[0]))
    min_sigma = min((r.sigma_min for r in records), default=0.0)
    logger.info('Kernel certificate: %d samples, min sigma %.3e (dropped %s)', len(records), min_sigma, list(drop_families))
    return KernelReportModel(
        samples=records,
        min_sigma=min_sigma,
        tolerance=tolerance,
        passed=enough and min_sigma > tolerance,
        dropped_families=[str(f) for f in drop_families],
    )


def family_ablation(samples: Sequence[FrequencySample], bg: Background) -> dict[str, float]:
    """Minimum sigma over the samples after deleting each family in turn."""
    out = {}
    for family in Family:
        sigmas = [symbol_matrix(s, bg, drop_families=(family,)).sigma_min for s in samples]
        out[str(family)] = min(sigmas, default=0.0)
    return out


def projection_residual(M: SymbolMatrix, target: np.ndarray) -> float:
    """||t - Q Q^H t|| / ||t|| with Q an orthonormal basis of the row span of M."""
    target = np.asarray(target, dtype=np.complex128)
    scale = np.linalg.norm(target)
    if scale == 0.0:
        return 0.0
    Q = M.rowspace()
    return float(np.linalg.norm(target - Q @ (Q.conj().T @ target)) / scale)


def _c(a: int, b: int, op: SymbolPolynomial | None = None) -> LinearForm:
    col = VOIGT_KEYS.index((a, b))
    return LinearForm.unit(col) if op is None else LinearForm.unit(col, op)


def _rho() -> LinearForm:
    return LinearForm.rho()


@dataclass(frozen=True)
class EliminationStep:
    name: str
    families: tuple[Family, ...]
    targets: tuple[tuple[str, LinearForm], ...]


_SP, _SS, _PS, _PP = Family.SP, Family.SS, Family.PS, Family.PP


def _unit_targets(keys: Iterable[tuple[int, int]]) -> tuple[tuple[str, LinearForm], ...]:
    return tuple((f'c{a}{b}', _c(a, b)) for a, b in keys)


def elimination_steps(bg: Background) -> tuple[EliminationStep, ...]:
    """Conclusions of the elimination argument in order, each with the row families it uses."""
    d1, d2 = SymbolPolynomial.partial(1), SymbolPolynomial.partial(2)
    shear = tuple(key for key in VOIGT_KEYS if key[1] >= 4)
    return (
        EliminationStep('c1112 = c2221', (_SP,), (('c16-c26', _c(1, 6) - _c(2, 6)),)),
        EliminationStep('d1 c3221 = d2 c3112', (_SP, _SS), (('d1c46-d2c56', _c(4, 6, d1) - _c(5, 6, d2)),)),
        EliminationStep('2 c1212 = cs^2 rho', (_SP, _SS), (('2c66-cs2rho', _c(6, 6) * 2.0 - _rho() * bg.cs2),)),
        EliminationStep('c1212 = 0', (_SP, _SS), _unit_targets([(6, 6)])),
        EliminationStep('rho = 0', (_SP, _SS), (('rho', _rho()),)),
        EliminationStep('c2312 = c3112 = c1112 = c2221 = c3312 = 0', (_SP, _SS), _unit_targets([(4, 6), (5, 6), (1, 6), (2, 6), (3, 6)])),
        EliminationStep('shear components vanish', (_SP, _SS), _unit_targets(shear)),
        EliminationStep('c1111 = c2211 = c3311', (_SP, _SS, _PS), (
            ('c11-c12', _c(1, 1) - _c(1, 2)),
            ('c11-c13', _c(1, 1) - _c(1, 3)),
        )),
        EliminationStep('c1111 = c2211 = c3311 = 0', tuple(Family), _unit_targets([(1, 1), (1, 2), (1, 3)])),
        EliminationStep('c2222 = c3333 = c2233 = 0', tuple(Family), _unit_targets([(2, 2), (3, 3), (2, 3)])),
        EliminationStep('all parameters vanish', tuple(Family), (
            *_unit_targets(VOIGT_KEYS),
            ('rho', _rho()),
        )),
    )


def elimination_replay(
    sample: FrequencySample,
    bg: Background,
    tolerance: float = REPLAY_TOLERANCE,
    drop_families: Iterable[Family | str] = (),
) -> ReplayReportModel:
    """Project every target row onto the span of the rows each step may use."""
    sample.check_guard()
    dropped = {Family(f) for f in drop_families}
    xi = sample.array
    steps = []
    for index, step in enumerate(elimination_steps(bg), start=1):
        families = [f for f in step.families if f not in dropped]
        M = symbol_matrix(sample, bg, families=families)
        residuals = [projection_residual(M, form.evaluate(xi)) for _, form in step.targets]
        passed = max(residuals) <= tolerance
        if not passed:
            logger.warning('Elimination step %d (%s) fails at xi=%s: residual %.3e', index, step.name, sample.xi, max(residuals))
        steps.append(EliminationStepModel(
            index=index,
            name=step.name,
            families=[str(f) for f in families],
            targets=[label for label, _ in step.targets],
            residuals=residuals,
            passed=passed,
        ))
    return ReplayReportModel(
        xi=sample.xi,
        steps=steps,
        tolerance=tolerance,
        passed=all(s.passed for s in steps),
        dropped_families=sorted(str(f) for f in dropped),
    )


def chain_conclusions(bg: Background) -> dict[str, LinearForm]:
    """Every elimination target keyed by its label, first occurrence wins."""
    out: dict[str, LinearForm] = {}
    for step in elimination_steps(bg):
        for label, form in step.targets:
            out.setdefault(label, form)
    return out


def evaluate_zero_data_identities(P: Perturbation, bg: Background) -> dict[str, ScalarField]:
    """(lhs - rhs) of every identity row and every elimination conclusion as fields.

    Evaluation is spectral, so the Fourier coefficients of each field equal
    the symbol row times the transformed parameters away from Nyquist.
    """
    out = {row.label: row.form.apply(P, Backend.SPECTRAL) for row in select_rows(bg)}
    for label, form in chain_conclusions(bg).items():
        out[f'chain.{label}'] = form.apply(P, Backend.SPECTRAL)
    return out


def isotropic_lambda_vector() -> np.ndarray:
    """Parameter vector of a pure lambda perturbation: c_ijkl = d_ij d_kl, rho = 0."""
    v = np.zeros(PARAMETER_COUNT)
    for key in ((1, 1), (2, 2), (3, 3), (1, 2), (1, 3), (2, 3)):
        v[VOIGT_KEYS.index(key)] = 1.0
    return v


def kernel_vector_residual(sample: FrequencySample, bg: Background, vector: np.ndarray, drop_families: Iterable[Family | str] = ()) -> float:
    """||M v|| / ||v|| for the normalized symbol matrix; zero when v is a kernel vector."""
    M = symbol_matrix(sample, bg, drop_families=drop_families)
    vector = np.asarray(vector, dtype=np.complex128)
    return float(np.linalg.norm(M.normalized @ vector) / np.linalg.norm(vector))


def fourier_consistency(P: Perturbation, bg: Background, count: int = 8, seed: int = 0) -> float:
    """Worst mismatch between the transformed identity fields and symbol rows times transformed parameters.

    Frequencies are drawn from the lower half of the spectrum so the
    Nyquist handling of the spectral backend does not enter.
    """
    grid = P.grid
    fields = evaluate_zero_data_identities(P, bg)
    spectra = np.stack([fft.rfftn(p.values, workers=thread_count()) for p in P.parameters()])
    k, k_half = grid.wavenumbers(), grid.half_wavenumbers()
    rng = np.random.Generator(np.random.PCG64(seed))
    limit = grid.N // 4
    nodes = [
        (int(rng.integers(-limit, limit + 1)) % grid.N, int(rng.integers(-limit, limit + 1)) % grid.N, int(rng.integers(0, limit + 1)))
        for _ in range(count)
    ]
    worst = 0.0
    for row in select_rows(bg):
        observed = fft.rfftn(fields[row.label].values, workers=thread_count())
        for i, j, l in nodes:
            symbol = row.form.evaluate(np.array([k[i], k[j], k_half[l]]))
            coefficients = spectra[:, i, j, l]
            scale = float(np.sum(np.abs(symbol) * np.abs(coefficients)))
            if scale > 0.0:
                worst = max(worst, abs(observed[i, j, l] - symbol @ coefficients) / scale)
    logger.info('Fourier consistency over %d frequencies: %.3e', count, worst)
    return float(worst)


__all__ = [
    "CERTIFICATE_MIN_SAMPLES",
    "EliminationStep",
    "FrequencySample",
    "KERNEL_TOLERANCE",
    "REPLAY_TOLERANCE",
    "SymbolMatrix",
    "chain_conclusions",
    "elimination_replay",
    "elimination_steps",
    "evaluate_zero_data_identities",
    "family_ablation",
    "fourier_consistency",
    "isotropic_lambda_vector",
    "kernel_certificate",
    "kernel_vector_residual",
    "projection_residual",
    "sphere_samples",
    "symbol_matrix",
]
