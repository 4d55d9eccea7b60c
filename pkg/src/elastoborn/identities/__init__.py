"""Zero-data identities as Fourier symbols."""
from elastoborn.identities.forms import GRAD, LinearForm, tensor_form
from elastoborn.identities.inventory import Family, IdentityRow, Kind, identity_inventory, select_rows
from elastoborn.identities.system import (
    EliminationStep,
    FrequencySample,
    SymbolMatrix,
    chain_conclusions,
    elimination_replay,
    elimination_steps,
    evaluate_zero_data_identities,
    family_ablation,
    fourier_consistency,
    isotropic_lambda_vector,
    kernel_certificate,
    kernel_vector_residual,
    projection_residual,
    sphere_samples,
    symbol_matrix,
)

__all__ = [
    "GRAD",
    "EliminationStep",
    "Family",
    "FrequencySample",
    "IdentityRow",
    "Kind",
    "LinearForm",
    "SymbolMatrix",
    "chain_conclusions",
    "elimination_replay",
    "elimination_steps",
    "evaluate_zero_data_identities",
    "family_ablation",
    "fourier_consistency",
    "identity_inventory",
    "isotropic_lambda_vector",
    "kernel_certificate",
    "kernel_vector_residual",
    "projection_residual",
    "select_rows",
    "sphere_samples",
    "symbol_matrix",
    "tensor_form",
]
