"""Configuration and report models."""
from enum import StrEnum
from typing import Annotated, Any, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from elastoborn.calculus import Direction, Grid
from elastoborn.tensors import Background

type ChannelName = Literal["pp", "sp", "ps", "ss"]
type FamilyName = Literal["pp", "sp", "ps", "ss"]
type CommandName = Literal[
    "forward",
    "reconstruct",
    "roundtrip",
    "kernel-test",
    "verify-identities",
    "stability",
]

BUMP_SUPPORT_RADIUS = 0.95


class Status(StrEnum):
    """Outcome of a command."""

    PASS = "PASS"
    FAIL = "FAIL"
    ERROR = "ERROR"


class BumpSpec(BaseModel):
    """a * exp(1 - 1 / (1 - |x - c|^2 / r^2)) inside the ball of radius r around c."""

    model_config = ConfigDict(frozen=True)

    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = Field(default=0.5, gt=0.0)
    amplitude: float = 1.0

    @model_validator(mode='after')
    def _check_support(self) -> 'BumpSpec':
        reach = float(np.linalg.norm(self.center)) + self.radius
        if reach > BUMP_SUPPORT_RADIUS + 1e-12:
            raise ValueError(f'bump support reaches |x| = {reach:.3f} > {BUMP_SUPPORT_RADIUS}')
        return self


class BumpsPerturbation(BaseModel):
    """Per-component bump lists keyed by Voigt pair, e.g. "16" for c_1112."""

    kind: Literal["bumps"] = "bumps"
    components: dict[str, list[BumpSpec]] = Field(default_factory=dict)
    rho: list[BumpSpec] = Field(default_factory=list)

    @field_validator('components')
    @classmethod
    def _check_keys(cls, value: dict[str, list[BumpSpec]]) -> dict[str, list[BumpSpec]]:
        for key in value:
            if len(key) != 2 or not key.isdigit() or not 1 <= int(key[0]) <= int(key[1]) <= 6:
                raise ValueError(f'component key {key!r} is not a Voigt pair AB with 1 <= A <= B <= 6')
        return value


class IsotropicPerturbation(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    kind: Literal["isotropic"] = "isotropic"
    lambda_: list[BumpSpec] = Field(default_factory=list, alias='lambda')
    mu: list[BumpSpec] = Field(default_factory=list)
    rho: list[BumpSpec] = Field(default_factory=list)


class RandomPerturbation(BaseModel):
    kind: Literal["random"] = "random"
    seed: int = 0
    isotropic: bool = False
    bumps: int = Field(default=2, ge=1)


class FilesPerturbation(BaseModel):
    kind: Literal["files"] = "files"
    path: str


type PerturbationSpec = Annotated[
    BumpsPerturbation | IsotropicPerturbation | RandomPerturbation | FilesPerturbation,
    Field(discriminator='kind'),
]


class KernelOptions(BaseModel):
    samples: int = Field(default=200, ge=1)
    seed: int = 0
    tolerance: float = 1e-6
    drop_families: list[FamilyName] = Field(default_factory=list)
    replay_samples: int = Field(default=20, ge=0)
    replay_tolerance: float = 1e-8


class IdentityOptions(BaseModel):
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    tolerance: float = 1e-3
    fourier_tolerance: float = 1e-3


class ReconstructionOptions(BaseModel):
    truncation: float = Field(default=1.0, gt=0.0)
    mask_margin: int = Field(default=6, ge=0)
    mask_radius: float = 1.2
    elliptic_tolerance: float = 1e-2


class RoundtripOptions(BaseModel):
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    mu_tolerance: float = 0.01
    rho_tolerance: float = 0.05
    lambda_tolerance: float = 0.05
    coarse_N: Optional[int] = 32
    convergence_factor: float = Field(default=2.0, gt=0.0)


class StabilityOptions(BaseModel):
    samples: int = Field(default=20, ge=1)
    seed: int = 0
    scale: float = 7.0
    floor: float = 1e-3


class RunConfig(BaseModel):
    """Everything a command needs; all defaults are written back as the effective config."""

    grid: Grid = Field(default_factory=Grid)
    background: Background = Field(default_factory=Background)
    perturbation: PerturbationSpec = Field(default_factory=RandomPerturbation)
    channels: list[ChannelName] = Field(default_factory=lambda: ["pp", "sp", "ps", "ss"])
    direction: str = "+e1"
    polarization: Optional[str] = "+e2"
    kernel: KernelOptions = Field(default_factory=KernelOptions)
    identities: IdentityOptions = Field(default_factory=IdentityOptions)
    reconstruction: ReconstructionOptions = Field(default_factory=ReconstructionOptions)
    roundtrip: RoundtripOptions = Field(default_factory=RoundtripOptions)
    stability: StabilityOptions = Field(default_factory=StabilityOptions)
    data_dir: Optional[str] = None
    output_dir: str = "results"
    threads: Optional[int] = Field(default=None, ge=1)

    @field_validator('direction', 'polarization')
    @classmethod
    def _check_direction(cls, value: str | None) -> str | None:
        if value is None:
            return value
        try:
            return str(Direction.parse(value))
        except Exception as e:
            raise ValueError(str(e)) from e

    @model_validator(mode='after')
    def _check_polarization(self) -> 'RunConfig':
        if self.polarization is not None and Direction.parse(self.polarization).dot(Direction.parse(self.direction)) != 0:
            raise ValueError(f'polarization {self.polarization} is not orthogonal to direction {self.direction}')
        return self

    @property
    def theta(self) -> Direction:
        return Direction.parse(self.direction)

    @property
    def alpha(self) -> Direction | None:
        return None if self.polarization is None else Direction.parse(self.polarization)


class KernelSampleModel(BaseModel):
    """Smallest normalized singular value at one frequency."""

    xi: tuple[float, float, float]
    sigma_min: float
    rows: int


class KernelReportModel(BaseModel):
    samples: Sequence[KernelSampleModel] = Field(default_factory=list)
    min_sigma: float
    tolerance: float
    passed: bool
    dropped_families: Sequence[str] = Field(default_factory=list)


class EliminationStepModel(BaseModel):
    index: int
    name: str
    families: Sequence[str]
    targets: Sequence[str]
    residuals: Sequence[float]
    passed: bool


class ReplayReportModel(BaseModel):
    xi: tuple[float, float, float]
    steps: Sequence[EliminationStepModel] = Field(default_factory=list)
    tolerance: float
    passed: bool
    dropped_families: Sequence[str] = Field(default_factory=list)


class ReconstructionReportModel(BaseModel):
    """Stage residuals and, when the truth is known, relative L2 errors."""

    stage_residuals: dict[str, float] = Field(default_factory=dict)
    errors: dict[str, float] = Field(default_factory=dict)
    consistency: dict[str, float] = Field(default_factory=dict)
    mask_radius: float
    passed: bool
    warnings: Sequence[str] = Field(default_factory=list)


class StabilityReportModel(BaseModel):
    ratios: Sequence[float] = Field(default_factory=list)
    max_ratio: float
    median_ratio: float
    homogeneity_defect: float
    min_data_fraction: float
    floor: float
    passed: bool


class RunReport(BaseModel):
    """Top-level report written as report.json by every command."""

    command: CommandName
    status: Status
    message: Optional[str] = None
    details: dict[str, Any] = Field(default_factory=dict)
    elapsed_seconds: Optional[float] = None
