"""Field files, test perturbations and report writers."""
from elastoborn.utils.field_io import (
    read_field,
    read_metadata,
    read_perturbation,
    read_vector_field,
    write_any,
    write_field,
    write_perturbation,
    write_vector_field,
)
from elastoborn.utils.perturbations import (
    bump,
    bump_sum,
    generate_perturbation,
    random_anisotropic,
    random_isotropic,
)
from elastoborn.utils.reports import generate_summary_table, read_report, write_kernel_csv, write_report, write_summary

__all__ = [
    "bump",
    "bump_sum",
    "generate_perturbation",
    "generate_summary_table",
    "random_anisotropic",
    "random_isotropic",
    "read_field",
    "read_metadata",
    "read_perturbation",
    "read_report",
    "read_vector_field",
    "write_any",
    "write_field",
    "write_kernel_csv",
    "write_perturbation",
    "write_report",
    "write_summary",
    "write_vector_field",
]
