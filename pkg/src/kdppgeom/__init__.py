"""Exact computation and identifiability analysis for DPPs and k-DPPs."""

__version__ = "0.1.0"

from .combinatorics import ESPTable, SubsetIndex, enumerate_subsets, esp, esp_leave_out, rank_subset, unrank_subset
from .dpp import cardinality_law, dpp_distribution, dpp_probability, inclusion_probability, marginal_kernel
from .errors import (
    BoundaryMLEError,
    CapacityError,
    DegenerateStratumError,
    DomainError,
    KdppError,
    KernelFileError,
    NotProjectionError,
    SingularKernelError,
)
from .exterior import compound, inclusion_via_exterior, plucker_check, scale_invariance_contrast
from .identifiability import (
    InvarianceTransform,
    apply_invariance,
    build_phi,
    check_kdpp_invariance,
    h_rho,
    identifiability_report,
    sample_commuting_rotation,
    score,
)
from .kdpp import (
    fisher_information,
    fisher_symmetry_check,
    from_minimal,
    kdpp_cauchy_binet,
    kdpp_distribution,
    log_partition,
    mean_parameter,
    minimality_check,
    to_minimal,
)
from .linalg import cluster_eigenvalues, eig_sym, principal_minor, rank_and_nullspace, rectangular_minor
from .mle import FitConfig, fit, gradient, log_likelihood
