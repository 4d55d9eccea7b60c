"""The zero-data identity rows for every axis choice of (theta, alpha).

Each row is generated from a covariant template written for theta = e1
(and alpha = e2 for S incidence) and moved to the other axes with the six
coordinate permutations; rows that land on the same label are kept once.
Rotation components use the observable e_ipq d_q u_p.
"""
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache
import itertools
import logging

from elastoborn.calculus import LAPLACIAN, Direction, SymbolPolynomial
from elastoborn.identities.forms import GRAD, LinearForm, rho_form, tensor_form, total
from elastoborn.tensors import Background, levi_civita

logger = logging.getLogger(__name__)


class Family(StrEnum):
    PP = 'pp'
    SP = 'sp'
    PS = 'ps'
    SS = 'ss'


class Kind(StrEnum):
    BIHARMONIC = 'biharmonic'
    TRANSPORT = 'transport'
    ELLIPTIC = 'elliptic'


@dataclass(frozen=True)
class IdentityRow:
    family: Family
    kind: Kind
    theta: Direction
    alpha: Direction | None
    component: int | None
    form: LinearForm

    @property
    def label(self) -> str:
        return row_label(self.family, self.kind, self.theta, self.alpha, self.component)

    @property
    def degree(self) -> int:
        return self.form.degree


def row_label(family: Family, kind: Kind, theta: Direction, alpha: Direction | None, component: int | None) -> str:
    axes = f'e{theta.axis}' if alpha is None else f'e{theta.axis},e{alpha.axis}'
    label = f'{family}.{kind}[{axes}]'
    return label if component is None else f'{label}(i={component})'


def _d(axis: int) -> SymbolPolynomial:
    return SymbolPolynomial.partial(axis)


def _floats(direction: Direction) -> list[float]:
    return [float(x) for x in direction.vector]


def _rotation_terms(i: int):
    """(p, q, e_ipq) for the nonzero Levi-Civita entries with first index i."""
    for p, q in itertools.product((1, 2, 3), repeat=2):
        sign = levi_civita(i, p, q)
        if sign:
            yield p, q, float(sign)


def pp_biharmonic(bg: Background, theta: Direction) -> LinearForm:
    L = SymbolPolynomial.directional(theta)
    lap = LAPLACIAN
    cp2 = bg.cp2
    return (
        tensor_form(GRAD, GRAD, theta, theta) * (4.0 * L * L)
        + tensor_form(theta, theta, theta, theta) * (lap * lap)
        - tensor_form(GRAD, theta, theta, theta) * (4.0 * L * lap)
        + rho_form(lap * lap * -cp2 + L * L * lap * (2.0 * cp2))
    )


def sp_transport(bg: Background, theta: Direction, alpha: Direction) -> LinearForm:
    L = SymbolPolynomial.directional(theta)
    ratio = bg.cp2 / (bg.cp2 - bg.cs2)
    return (
        tensor_form(theta, theta, theta, alpha) * (2.0 * ratio * L)
        - tensor_form(GRAD, theta, theta, alpha) * 2.0
        + rho_form(SymbolPolynomial.directional(alpha) * bg.cs2)
    )


def sp_elliptic(bg: Background, theta: Direction, alpha: Direction) -> LinearForm:
    ratio = bg.cp2 / (bg.cp2 - bg.cs2)
    return tensor_form(theta, theta, theta, alpha) * (ratio * LAPLACIAN) - tensor_form(GRAD, GRAD, theta, alpha)


def ps_transport(bg: Background, theta: Direction, i: int) -> LinearForm:
    L = SymbolPolynomial.directional(theta)
    ratio = bg.cs2 / (bg.cp2 - bg.cs2)
    t = _floats(theta)
    forms = []
    for p, q, e in _rotation_terms(i):
        forms.append(tensor_form(p, theta, theta, theta) * (e * (-2.0 * ratio * t[q - 1] * L - _d(q))))
        forms.append(tensor_form(p, GRAD, theta, theta) * (-e * t[q - 1]))
        forms.append(rho_form(_d(q) * (e * bg.cp2 * t[p - 1])))
    return total(forms)


def ps_elliptic(bg: Background, theta: Direction, i: int) -> LinearForm:
    ratio = bg.cs2 / (bg.cp2 - bg.cs2)
    t = _floats(theta)
    forms = []
    for p, q, e in _rotation_terms(i):
        forms.append(tensor_form(p, theta, theta, theta) * (LAPLACIAN * (e * ratio * t[q - 1])))
        forms.append(tensor_form(p, GRAD, theta, theta) * (_d(q) * e))
    return total(forms)


def ss_biharmonic(bg: Background, theta: Direction, alpha: Direction, i: int) -> LinearForm:
    L = SymbolPolynomial.directional(theta)
    lap = LAPLACIAN
    t, a = _floats(theta), _floats(alpha)
    cs2 = bg.cs2
    forms = []
    for p, q, e in _rotation_terms(i):
        forms.append(tensor_form(p, GRAD, theta, alpha) * (e * (4.0 * L * L * _d(q) - 2.0 * t[q - 1] * L * lap)))
        forms.append(tensor_form(p, theta, theta, alpha) * (e * (t[q - 1] * lap * lap - 2.0 * L * lap * _d(q))))
        forms.append(rho_form(e * cs2 * a[p - 1] * (-t[q - 1] * lap * lap + 2.0 * L * lap * _d(q))))
    return total(forms)


def _template_rows(bg: Background, theta: Direction, alpha: Direction, i: int) -> list[IdentityRow]:
    """Rows of every family for one (theta, alpha) frame and rotation component i."""
    return [
        IdentityRow(Family.PP, Kind.BIHARMONIC, theta, None, None, pp_biharmonic(bg, theta)),
        IdentityRow(Family.SP, Kind.TRANSPORT, theta, alpha, None, sp_transport(bg, theta, alpha)),
        IdentityRow(Family.SP, Kind.ELLIPTIC, theta, alpha, None, sp_elliptic(bg, theta, alpha)),
        IdentityRow(Family.PS, Kind.TRANSPORT, theta, None, i, ps_transport(bg, theta, i)),
        IdentityRow(Family.PS, Kind.ELLIPTIC, theta, None, i, ps_elliptic(bg, theta, i)),
        IdentityRow(Family.SS, Kind.BIHARMONIC, theta, alpha, i, ss_biharmonic(bg, theta, alpha, i)),
    ]


@lru_cache(maxsize=8)
def identity_inventory(bg: Background) -> tuple[IdentityRow, ...]:
    """All rows in family order, deduplicated by label."""
    rows: dict[str, IdentityRow] = {}
    for sigma in itertools.permutations((1, 2, 3)):
        theta, alpha = Direction(sigma[0]), Direction(sigma[1])
        for component in (1, 2, 3):
            for row in _template_rows(bg, theta, alpha, sigma[component - 1]):
                rows.setdefault(row.label, row)
    order = list(Family)
    inventory = tuple(sorted(rows.values(), key=lambda r: (order.index(r.family), r.label)))
    logger.debug('identity inventory: %d rows', len(inventory))
    return inventory


def select_rows(bg: Background, families=None, drop_families=()) -> tuple[IdentityRow, ...]:
    keep = set(Family) if families is None else {Family(f) for f in families}
    keep -= {Family(f) for f in drop_families}
    return tuple(row for row in identity_inventory(bg) if row.family in keep)
