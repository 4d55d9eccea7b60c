"""Base channel interface and the result record every channel produces."""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import StrEnum

from elastoborn.calculus import Direction, Field, relative_difference
from elastoborn.errors import DegenerateSpeedsError, DirectionError
from elastoborn.tensors import Background, Perturbation

DEFAULT_TOLERANCE = 1e-3


class Mode(StrEnum):
    P = 'P'
    S = 'S'


class Singularity(StrEnum):
    """Conormal singularity a wavefront coefficient multiplies."""

    DELTA_PRIME = "delta'"
    DELTA = 'delta'
    H0 = 'H0'
    H1 = 'H1'
    H2 = 'H2'


@dataclass(frozen=True)
class Channel:
    incident: Mode
    observed: Mode
    theta: Direction
    alpha: Direction | None = None

    def __post_init__(self):
        if self.alpha is not None and self.alpha.dot(self.theta) != 0:
            raise DirectionError(f'polarization {self.alpha} is not orthogonal to {self.theta}')
        if self.incident == Mode.S and self.alpha is None:
            raise DirectionError('S incidence needs a polarization')

    @property
    def name(self) -> str:
        return f'{self.incident}{self.observed}'.lower()


@dataclass(frozen=True, eq=False)
class ExpansionResult:
    """Wavefront coefficients of one channel with their self-check residuals."""

    channel: Channel
    coefficients: dict[Singularity, Field]
    labels: dict[Singularity, str]
    residuals: dict[str, float]
    front_identity: Field
    forced_zero: dict[str, Field] = field(default_factory=dict)
    sources: dict[str, Field] = field(default_factory=dict)

    def coefficient(self, label: str) -> Field:
        """Look a coefficient up by its index label, e.g. 'w2'."""
        for singularity, name in self.labels.items():
            if name == label:
                return self.coefficients[singularity]
        raise KeyError(label)

    def within(self, tolerance: float) -> bool:
        return all(value <= tolerance for value in self.residuals.values())


def residual_report(result: ExpansionResult) -> dict[str, float]:
    """Stored residuals in construction order."""
    return dict(result.residuals)


def identity_residual(lhs: Field, rhs: Field) -> float:
    """Relative L2(omega) mismatch of the two sides of an identity."""
    return relative_difference(lhs, rhs)


class BaseChannel(ABC):
    """Base class for the four scattering channels."""

    incident: Mode
    observed: Mode

    def __init__(
        self,
        perturbation: Perturbation,
        background: Background,
        theta: Direction,
        alpha: Direction | None = None,
        tolerance: float = DEFAULT_TOLERANCE,
    ):
        self.perturbation = perturbation
        self.background = background
        self.theta = Direction.parse(theta)
        self.alpha = None if alpha is None else Direction.parse(alpha)
        self.tolerance = tolerance

    @property
    @abstractmethod
    def name(self) -> str:
        """Channel name."""
        pass

    @abstractmethod
    def expand(self) -> ExpansionResult:
        """Compute coefficients and residuals."""
        pass

    @property
    def channel(self) -> Channel:
        alpha = self.alpha if self.incident == Mode.S else None
        return Channel(self.incident, self.observed, self.theta, alpha)

    def is_applicable(self) -> bool:
        """S incidence needs a polarization orthogonal to theta."""
        if self.incident == Mode.P:
            return True
        return self.alpha is not None and self.alpha.dot(self.theta) == 0

    def check_speeds(self) -> None:
        bg = self.background
        if abs(bg.cp - bg.cs) < 1e-9:
            raise DegenerateSpeedsError(bg.cp, bg.cs)
