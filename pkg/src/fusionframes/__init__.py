"""fusionframes: a finite-dimensional laboratory for weighted subspace
frames, operator-relative frames and atomic decompositions.

Construct weighted subspace systems, compute their operators and optimal
bounds, verify or refute operator-relative frame properties through exact
range factorizations, produce atomic decompositions, and certify
perturbation stability.  Batch CLI: ``fusionframes --help``.
"""

from .errors import (
    InadmissibleError,
    InputError,
    NotPSDError,
    PreconditionError,
    RangeInclusionError,
)
from .fusion_systems import (
    BoundsReport,
    CoefficientBundle,
    Member,
    Verdict,
    WeightedSubspaceSystem,
    coordinate_lines,
)
from .generator import Flavor, GenSpec, Rng, generate
from .kfusion import (
    AtomicDecomposition,
    KFusionReport,
    atomic_decompose,
    douglas_factor,
    frame_operator_atomic_check,
    frame_operator_chain_check,
    kfusion_verify,
    range_transfer_check,
    refutation_witness,
)
from .constructions import (
    ConsistencyReport,
    ImageConstructReport,
    PerturbationParams,
    TransformConstructReport,
    basis_image_system,
    commuting_transform_construct,
    invertibility_consistency_check,
    operator_image_construct,
    perturbation_estimate,
    perturbation_predict,
    surjectivity_consistency_check,
    transform_system,
)
from .subspaces import Subspace
from .vector_frames import (
    LocalGlobalReport,
    VectorFrame,
    kframe_verify,
    local_to_global_check,
    vector_frame_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicDecomposition",
    "BoundsReport",
    "CoefficientBundle",
    "ConsistencyReport",
    "Flavor",
    "GenSpec",
    "ImageConstructReport",
    "InadmissibleError",
    "InputError",
    "KFusionReport",
    "LocalGlobalReport",
    "Member",
    "NotPSDError",
    "PerturbationParams",
    "PreconditionError",
    "RangeInclusionError",
    "Rng",
    "Subspace",
    "TransformConstructReport",
    "Verdict",
    "VectorFrame",
    "WeightedSubspaceSystem",
    "atomic_decompose",
    "basis_image_system",
    "commuting_transform_construct",
    "coordinate_lines",
    "douglas_factor",
    "frame_operator_atomic_check",
    "frame_operator_chain_check",
    "generate",
    "invertibility_consistency_check",
    "kframe_verify",
    "kfusion_verify",
    "local_to_global_check",
    "operator_image_construct",
    "perturbation_estimate",
    "perturbation_predict",
    "range_transfer_check",
    "refutation_witness",
    "surjectivity_consistency_check",
    "transform_system",
    "vector_frame_bounds",
]
