"""Canonical positive-definite completion of partially specified kernels.

A kernel known only on part of a finite index set (a symmetric pattern
containing the diagonal) admits many positive-semidefinite completions.  On
serrated and junction-tree patterns there is a distinguished one — the
canonical completion — that routes every unspecified pair through a
separator, maximizes the log-determinant, and has an inverse vanishing off
the pattern.  This package computes it, bounds the alternatives, and
extends stationary positive-definite functions through the same machinery.
"""

from .errors import (
    MembershipError,
    NumericalError,
    PdCompleteError,
    StructuralError,
)
from .kernelcore import (
    KernelMatrix,
    PsdResult,
    RkhsElement,
    contraction_apply,
    minnorm_interpolate,
    projection_apply,
    projection_matrix,
    pseudo_inverse,
    psd_check,
    rkhs_norm_sq,
    schur_complement,
)
from .graphdomain import (
    DomainPattern,
    JunctionTree,
    SerratedCover,
    band_cover,
    strided_band_cover,
    validate_domain,
    validate_junction_tree,
    validate_serrated,
    verify_separator,
)
from .completion import (
    CompletionReport,
    PartialKernel,
    RefinementTable,
    SeparationCheck,
    canonical_2serrated,
    canonical_junction_tree,
    canonical_norm_sq,
    canonical_serrated,
    canonical_via_duality,
    completion_from_contraction,
    completion_interval_2serrated,
    feasible_interval_single_entry,
    generator_variational,
    maxdet_oracle,
    precision_assembly,
    refine_serrated,
    sample_completion,
    verify_canonical,
)
from .stationary import (
    DiscreteSemigroup,
    StationaryExtension,
    StationaryFunction,
    band_partial,
    canonical_extension_grid,
    generator_on_test,
    nagy_eval,
    semigroup_compose_check,
    semigroup_step,
)

__version__ = "0.1.0"

__all__ = [
    "PdCompleteError",
    "StructuralError",
    "MembershipError",
    "NumericalError",
    "KernelMatrix",
    "RkhsElement",
    "PsdResult",
    "psd_check",
    "pseudo_inverse",
    "rkhs_norm_sq",
    "schur_complement",
    "projection_apply",
    "projection_matrix",
    "minnorm_interpolate",
    "contraction_apply",
    "DomainPattern",
    "SerratedCover",
    "JunctionTree",
    "validate_domain",
    "validate_serrated",
    "validate_junction_tree",
    "verify_separator",
    "band_cover",
    "strided_band_cover",
    "PartialKernel",
    "CompletionReport",
    "SeparationCheck",
    "RefinementTable",
    "canonical_2serrated",
    "canonical_serrated",
    "canonical_junction_tree",
    "precision_assembly",
    "canonical_norm_sq",
    "canonical_via_duality",
    "generator_variational",
    "completion_interval_2serrated",
    "feasible_interval_single_entry",
    "completion_from_contraction",
    "sample_completion",
    "maxdet_oracle",
    "verify_canonical",
    "refine_serrated",
    "StationaryFunction",
    "StationaryExtension",
    "DiscreteSemigroup",
    "band_partial",
    "canonical_extension_grid",
    "semigroup_step",
    "semigroup_compose_check",
    "nagy_eval",
    "generator_on_test",
    "__version__",
]
