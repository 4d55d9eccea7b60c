"""Scattering channel implementations."""
from elastoborn.channels.base import (
    BaseChannel,
    Channel,
    ExpansionResult,
    Mode,
    Singularity,
    residual_report,
)
from elastoborn.channels.pp import PPChannel, pp_expansion
from elastoborn.channels.ps import PSChannel, ps_expansion
from elastoborn.channels.sp import SPChannel, sp_expansion
from elastoborn.channels.ss import SSChannel, ss_expansion

__all__ = [
    "BaseChannel",
    "Channel",
    "ExpansionResult",
    "Mode",
    "Singularity",
    "residual_report",
    "PPChannel",
    "SPChannel",
    "PSChannel",
    "SSChannel",
    "pp_expansion",
    "sp_expansion",
    "ps_expansion",
    "ss_expansion",
]
