"""Elastic perturbation tensors in Voigt storage, contractions and curls."""
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
import itertools

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from elastoborn.calculus import Backend, Direction, Grid, ScalarField, SupportTag, VectorField, diff
from elastoborn.errors import FieldError, GridMismatchError, SlotSpecError

type VoigtKey = tuple[int, int]
type Permutation = tuple[int, int, int]

VOIGT: dict[tuple[int, int], int] = {
    (1, 1): 1, (2, 2): 2, (3, 3): 3,
    (2, 3): 4, (3, 2): 4,
    (1, 3): 5, (3, 1): 5,
    (1, 2): 6, (2, 1): 6,
}
VOIGT_PAIR: dict[int, tuple[int, int]] = {1: (1, 1), 2: (2, 2), 3: (3, 3), 4: (2, 3), 5: (1, 3), 6: (1, 2)}
# column order of every 22-parameter vector: 21 Voigt keys, then density
VOIGT_KEYS: tuple[VoigtKey, ...] = tuple((a, b) for a in range(1, 7) for b in range(a, 7))
PARAMETER_COUNT = len(VOIGT_KEYS) + 1
RHO_COLUMN = len(VOIGT_KEYS)

LEVI_CIVITA = np.zeros((3, 3, 3))
for _p in itertools.permutations(range(3)):
    LEVI_CIVITA[_p] = np.linalg.det(np.eye(3)[list(_p)])


def levi_civita(i: int, j: int, k: int) -> int:
    """e_ijk for 1-based indices."""
    return int(LEVI_CIVITA[i - 1, j - 1, k - 1])


def voigt(i: int, j: int) -> int:
    return VOIGT[(i, j)]


def voigt_key(i: int, j: int, k: int, l: int) -> VoigtKey:
    """Storage key of c_ijkl after applying the minor and major symmetries."""
    a, b = voigt(i, j), voigt(k, l)
    return (a, b) if a <= b else (b, a)


def column(i: int, j: int, k: int, l: int) -> int:
    return VOIGT_KEYS.index(voigt_key(i, j, k, l))


def column_label(index: int) -> str:
    if index == RHO_COLUMN:
        return 'rho'
    a, b = VOIGT_KEYS[index]
    return f'c{a}{b}'


class Background(BaseModel):
    """Homogeneous isotropic background with unit density."""

    model_config = ConfigDict(frozen=True)

    lambda0: float = 2.0
    mu0: float = 1.0

    @model_validator(mode='after')
    def _check_ellipticity(self) -> 'Background':
        if self.mu0 <= 0.0:
            raise ValueError('background must satisfy mu0 > 0')
        if 3.0 * self.lambda0 + 2.0 * self.mu0 <= 0.0:
            raise ValueError('background must satisfy 3*lambda0 + 2*mu0 > 0')
        return self

    @property
    def rho0(self) -> float:
        return 1.0

    @property
    def cp2(self) -> float:
        return self.lambda0 + 2.0 * self.mu0

    @property
    def cs2(self) -> float:
        return self.mu0

    @property
    def cp(self) -> float:
        return float(np.sqrt(self.cp2))

    @property
    def cs(self) -> float:
        return float(np.sqrt(self.cs2))


@dataclass(frozen=True, eq=False)
class TensorField:
    """The 21 independent components of a fully symmetric perturbation."""

    components: Mapping[VoigtKey, ScalarField]

    def __post_init__(self):
        components = dict(self.components)
        if set(components) != set(VOIGT_KEYS):
            raise FieldError(f'tensor needs all 21 Voigt components, got {sorted(components)}')
        grid = components[VOIGT_KEYS[0]].grid
        for key, f in components.items():
            if f.grid != grid:
                raise GridMismatchError(f'component {key}')
            if f.support_tag != SupportTag.COMPACT:
                raise FieldError(f'tensor component {key} must be compact-in-omega')
        object.__setattr__(self, 'components', {key: components[key] for key in VOIGT_KEYS})

    @classmethod
    def zeros(cls, grid: Grid) -> 'TensorField':
        zero = ScalarField.zeros(grid)
        return cls({key: zero for key in VOIGT_KEYS})

    @classmethod
    def from_components(cls, grid: Grid, components: Mapping[VoigtKey, ScalarField]) -> 'TensorField':
        """Fill the keys not given with zeros; keys may be given as (B, A)."""
        full = {key: ScalarField.zeros(grid) for key in VOIGT_KEYS}
        for (a, b), f in components.items():
            full[(min(a, b), max(a, b))] = f
        return cls(full)

    @property
    def grid(self) -> Grid:
        return self.components[VOIGT_KEYS[0]].grid

    def __getitem__(self, key: VoigtKey) -> ScalarField:
        a, b = key
        return self.components[(min(a, b), max(a, b))]

    def c(self, i: int, j: int, k: int, l: int) -> ScalarField:
        return self.components[voigt_key(i, j, k, l)]

    def __add__(self, other: 'TensorField') -> 'TensorField':
        return TensorField({key: self.components[key] + other.components[key] for key in VOIGT_KEYS})

    def __mul__(self, scalar: float) -> 'TensorField':
        return TensorField({key: f * scalar for key, f in self.components.items()})

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Perturbation:
    """(C-dot, rho-dot): 22 compact scalar parameters."""

    C: TensorField
    rho: ScalarField
    isotropic: tuple[ScalarField, ScalarField] | None = None

    def __post_init__(self):
        if self.rho.grid != self.C.grid:
            raise GridMismatchError('density and tensor grids differ')
        if self.rho.support_tag != SupportTag.COMPACT:
            raise FieldError('density perturbation must be compact-in-omega')

    @classmethod
    def zeros(cls, grid: Grid) -> 'Perturbation':
        return cls(TensorField.zeros(grid), ScalarField.zeros(grid))

    @classmethod
    def from_isotropic(cls, lam: ScalarField, mu: ScalarField, rho: ScalarField) -> 'Perturbation':
        return cls(make_isotropic(lam, mu), rho, (lam, mu))

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    def parameters(self) -> tuple[ScalarField, ...]:
        """The 22 parameter fields in column order."""
        return tuple(self.C.components[key] for key in VOIGT_KEYS) + (self.rho,)

    def __add__(self, other: 'Perturbation') -> 'Perturbation':
        iso = None
        if self.isotropic is not None and other.isotropic is not None:
            iso = (self.isotropic[0] + other.isotropic[0], self.isotropic[1] + other.isotropic[1])
        return Perturbation(self.C + other.C, self.rho + other.rho, iso)

    def __mul__(self, scalar: float) -> 'Perturbation':
        iso = None if self.isotropic is None else (self.isotropic[0] * scalar, self.isotropic[1] * scalar)
        return Perturbation(self.C * scalar, self.rho * scalar, iso)

    __rmul__ = __mul__


def make_isotropic(lam: ScalarField, mu: ScalarField) -> TensorField:
    """lam d_ij d_kl + mu (d_ik d_jl + d_il d_jk) in Voigt storage."""
    if lam.grid != mu.grid:
        raise GridMismatchError('lambda and mu grids differ')
    grid = lam.grid
    components = {}
    for a in (1, 2, 3):
        components[(a, a)] = lam + mu * 2.0
        for b in range(a + 1, 4):
            components[(a, b)] = lam
    for a in (4, 5, 6):
        components[(a, a)] = mu
    return TensorField.from_components(grid, components)


type Slot = Direction | None


def _slot_indices(slot: Slot, is_div: bool, position: int) -> list[tuple[int, float, bool]]:
    if is_div:
        if slot is not None:
            raise SlotSpecError(f'slot {position} is contracted with grad and takes no vector')
        return [(m, 1.0, True) for m in (1, 2, 3)]
    if slot is None:
        raise SlotSpecError(f'slot {position} needs an axis vector')
    slot = Direction.parse(slot)
    return [(slot.axis, float(slot.sign), False)]


def _contract(
    C: TensorField,
    slots: Sequence[list[tuple[int, float, bool]]],
    backend: Backend | str | None,
) -> ScalarField:
    # group terms by (storage key, derivative) so each field is differentiated once
    grouped: dict[tuple[VoigtKey, tuple[int, int, int]], float] = {}
    for combo in itertools.product(*slots):
        beta = [0, 0, 0]
        weight = 1.0
        for index, factor, is_div in combo:
            weight *= factor
            if is_div:
                beta[index - 1] += 1
        key = voigt_key(*(index for index, _, _ in combo))
        grouped[(key, tuple(beta))] = grouped.get((key, tuple(beta)), 0.0) + weight
    out = ScalarField.zeros(C.grid)
    for (key, beta), weight in grouped.items():
        if weight == 0.0:
            continue
        f = C.components[key]
        term = f if beta == (0, 0, 0) else diff(f, beta, backend)
        out = out + term * weight
    return out


def _check_div_slots(div_slots: Sequence[int], allowed: set[int]) -> set[int]:
    chosen = set(div_slots)
    if not chosen <= allowed:
        raise SlotSpecError(f'divergence slots {sorted(chosen)} not within {sorted(allowed)}')
    return chosen


def contract(
    C: TensorField,
    a: Slot,
    b: Slot,
    c: Slot,
    d: Slot,
    div_slots: Sequence[int] = (),
    backend: Backend | str | None = None,
) -> ScalarField:
    """sum c_ijkl a_i b_j c_k d_l, with slots in div_slots contracted with grad."""
    chosen = _check_div_slots(div_slots, {1, 2})
    slots = [_slot_indices(s, n in chosen, n) for n, s in enumerate((a, b, c, d), start=1)]
    return _contract(C, slots, backend)


def contract_vec(
    C: TensorField,
    b: Slot,
    c: Slot,
    d: Slot,
    div_slots: Sequence[int] = (),
    backend: Backend | str | None = None,
) -> VectorField:
    """V_p = sum c_pjkl b_j c_k d_l with the first index free."""
    chosen = _check_div_slots(div_slots, {2})
    tail = [_slot_indices(s, n in chosen, n) for n, s in enumerate((b, c, d), start=2)]
    return VectorField(tuple(_contract(C, [[(p, 1.0, False)], *tail], backend) for p in (1, 2, 3)))


def curl(V: VectorField, backend: Backend | str | None = None) -> VectorField:
    """(curl V)_i = e_ijk d_j V_k."""

    def d(component: int, axis: int) -> ScalarField:
        beta = [0, 0, 0]
        beta[axis] = 1
        return diff(V[component], tuple(beta), backend)

    return VectorField((d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)))


def _check_permutation(sigma: Sequence[int]) -> Permutation:
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != [1, 2, 3]:
        raise ValueError(f'not a permutation of (1, 2, 3): {sigma}')
    return sigma


def permute_field(f: ScalarField, sigma: Sequence[int]) -> ScalarField:
    """f'(y) = f(x) with y_sigma(a) = x_a."""
    sigma = _check_permutation(sigma)
    inverse = {s: a for a, s in enumerate(sigma, start=1)}
    values = np.transpose(f.values, [inverse[n] - 1 for n in (1, 2, 3)])
    return ScalarField(f.grid, values, f.support_tag, None if f.upstream is None else Direction(sigma[f.upstream.index], f.upstream.sign))


def permute_axes(P: Perturbation, sigma: Sequence[int]) -> Perturbation:
    """Relabel axes: c'_{sigma(i)sigma(j)sigma(k)sigma(l)}(sigma x) = c_ijkl(x)."""
    sigma = _check_permutation(sigma)
    inverse = {s: a for a, s in enumerate(sigma, start=1)}
    components = {}
    for a, b in VOIGT_KEYS:
        i, j = VOIGT_PAIR[a]
        k, l = VOIGT_PAIR[b]
        source = P.C.c(inverse[i], inverse[j], inverse[k], inverse[l])
        components[(a, b)] = permute_field(source, sigma)
    iso = None
    if P.isotropic is not None:
        iso = (permute_field(P.isotropic[0], sigma), permute_field(P.isotropic[1], sigma))
    return Perturbation(TensorField(components), permute_field(P.rho, sigma), iso)
