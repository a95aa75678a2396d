"""Toolkit for robust group-sparse recovery by l1-norm minimization.

Provides group structures and sparsity indices, exact/sampled restricted
isometry constants, the convex polytope decomposition, null-space-property
certificates with residual error bounds, and l1 decoders for noiseless and
noisy linear measurements.
"""

from gsparse.core import (
    GroupStructure,
    GroupKSparseSet,
    SparsityIndexResult,
    make_group_structure,
    singleton_groups,
    group_project,
    lp_norm,
    gl_norm,
    sgl_norm,
    sparsity_index,
    group_sparsity_index,
    enumerate_gks,
    is_group_k_sparse,
)
from gsparse.sensing import (
    SensingMatrix,
    IsometryReport,
    gaussian_matrix,
    grip_constant,
    rip_constant,
    grip_lower_bound,
)
from gsparse.decomposition import (
    ConvexDecomposition,
    DecompositionCheck,
    group_support,
    polytope_decompose,
    check_decomposition,
)
from gsparse.certify import (
    GrnspCertificate,
    ErrorBudget,
    FalsificationReport,
    mu_of_t,
    delta_threshold,
    grnsp_constants,
    grnsp_holds_sampled,
    error_bounds,
    theorem1_witness,
)
from gsparse.decode import (
    DecodeResult,
    InfeasibleSystemError,
    decode_bp,
    decode_bpdn,
    residual_norms,
    BasisPursuitDecoder,
)

__version__ = "0.1.0"

__all__ = [
    "GroupStructure",
    "GroupKSparseSet",
    "SparsityIndexResult",
    "make_group_structure",
    "singleton_groups",
    "group_project",
    "lp_norm",
    "gl_norm",
    "sgl_norm",
    "sparsity_index",
    "group_sparsity_index",
    "enumerate_gks",
    "is_group_k_sparse",
    "SensingMatrix",
    "IsometryReport",
    "gaussian_matrix",
    "grip_constant",
    "rip_constant",
    "grip_lower_bound",
    "ConvexDecomposition",
    "DecompositionCheck",
    "group_support",
    "polytope_decompose",
    "check_decomposition",
    "GrnspCertificate",
    "ErrorBudget",
    "FalsificationReport",
    "mu_of_t",
    "delta_threshold",
    "grnsp_constants",
    "grnsp_holds_sampled",
    "error_bounds",
    "theorem1_witness",
    "DecodeResult",
    "InfeasibleSystemError",
    "decode_bp",
    "decode_bpdn",
    "residual_norms",
    "BasisPursuitDecoder",
]
