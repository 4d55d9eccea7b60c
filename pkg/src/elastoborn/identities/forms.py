"""Linear differential forms in the 22 perturbation parameters."""
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
import itertools

import numpy as np

from elastoborn.calculus import Backend, Direction, ScalarField, SymbolPolynomial, apply_symbol
from elastoborn.tensors import PARAMETER_COUNT, RHO_COLUMN, Perturbation, column, column_label

type Slot = Direction | int | str
GRAD = 'grad'

_ONE = SymbolPolynomial.constant(1.0)


@dataclass(frozen=True)
class LinearForm:
    """sum over columns of p_col(d) applied to parameter col."""

    terms: tuple[tuple[int, SymbolPolynomial], ...] = ()

    def __post_init__(self):
        merged: dict[int, SymbolPolynomial] = {}
        for col, p in self.terms:
            if not 0 <= col < PARAMETER_COUNT:
                raise ValueError(f'column {col} out of range')
            merged[col] = merged.get(col, SymbolPolynomial()) + p
        object.__setattr__(self, 'terms', tuple(sorted((c, p) for c, p in merged.items() if p)))

    @classmethod
    def from_mapping(cls, terms: Mapping[int, SymbolPolynomial]) -> 'LinearForm':
        return cls(tuple(terms.items()))

    @classmethod
    def c(cls, i: int, j: int, k: int, l: int, op: SymbolPolynomial = _ONE) -> 'LinearForm':
        return cls(((column(i, j, k, l), op),))

    @classmethod
    def unit(cls, col: int, op: SymbolPolynomial = _ONE) -> 'LinearForm':
        return cls(((col, op),))

    @classmethod
    def rho(cls, op: SymbolPolynomial = _ONE) -> 'LinearForm':
        return cls(((RHO_COLUMN, op),))

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.terms)

    @property
    def degree(self) -> int:
        return max((p.degree for _, p in self.terms), default=0)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: 'LinearForm') -> 'LinearForm':
        return LinearForm(self.terms + other.terms)

    def __neg__(self) -> 'LinearForm':
        return LinearForm(tuple((c, -p) for c, p in self.terms))

    def __sub__(self, other: 'LinearForm') -> 'LinearForm':
        return self + (-other)

    def __mul__(self, other: SymbolPolynomial | float) -> 'LinearForm':
        """Compose with a scalar operator (constant coefficients commute)."""
        return LinearForm(tuple((c, p * other) for c, p in self.terms))

    __rmul__ = __mul__

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        """Symbol row of length 22 at frequency xi."""
        row = np.zeros(PARAMETER_COUNT, dtype=np.complex128)
        for col, p in self.terms:
            row[col] = p.evaluate(np.asarray(xi, dtype=np.float64))
        return row

    def apply(self, P: Perturbation, backend: Backend | str | None = None) -> ScalarField:
        """Evaluate the form on a perturbation in physical space."""
        parameters = P.parameters()
        out = ScalarField.zeros(P.grid)
        for col, p in self.terms:
            out = out + apply_symbol(parameters[col], p, backend)
        return out

    def __str__(self) -> str:
        if not self.terms:
            return '0'
        return ' + '.join(f'[{p}]{column_label(c)}' for c, p in self.terms)


def _slot_range(slot: Slot) -> list[tuple[int, float, int | None]]:
    """(index, weight, derivative axis) choices for one tensor slot."""
    if isinstance(slot, str):
        if slot != GRAD:
            raise ValueError(f'unknown slot {slot!r}')
        return [(m, 1.0, m) for m in (1, 2, 3)]
    if isinstance(slot, Direction):
        return [(slot.axis, float(slot.sign), None)]
    return [(int(slot), 1.0, None)]


def tensor_form(a: Slot, b: Slot, c: Slot, d: Slot) -> LinearForm:
    """c_ijkl contracted slotwise with directions, fixed indices or grad."""
    terms = []
    for combo in itertools.product(*(_slot_range(s) for s in (a, b, c, d))):
        weight = 1.0
        op = _ONE
        for _, factor, axis in combo:
            weight *= factor
            if axis is not None:
                op = op * SymbolPolynomial.partial(axis)
        terms.append((column(*(index for index, _, _ in combo)), op * weight))
    return LinearForm(tuple(terms))


def rho_form(op: SymbolPolynomial = _ONE) -> LinearForm:
    return LinearForm.rho(op)


def total(forms: Iterable[LinearForm]) -> LinearForm:
    out = LinearForm()
    for form in forms:
        out = out + form
    return out
