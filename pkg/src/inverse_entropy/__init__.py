"""iel: exact and Monte-Carlo inverse metric entropy for non-invertible maps.

The library computes forward entropy, folding entropy and inverse entropy
(the decay rate of inverse-Bowen-ball measures along backward trajectories)
for five endomorphism families, cross-validating every Monte-Carlo estimate
against the identity ``forward = inverse + folding`` and the closed forms of
the linear cases.
"""

__version__ = "0.1.0"

from .estimators import (
    BallMeasureEstimate,
    DimensionReport,
    EntropyReport,
    EstimatorConfig,
    EstimatorError,
    FatBakerReport,
    FoldingUnavailableError,
    InsufficientResolutionError,
    InvariantReport,
    check_entropy_identity,
    estimate_ball_measure,
    estimate_fat_baker_inverse_entropy,
    estimate_folding_entropy,
    estimate_forward_entropy,
    estimate_inverse_entropy,
    estimate_lyapunov_spectrum,
    estimate_pointwise_dimension,
)
from .exact import (
    FatBakerExact,
    InvariantPair,
    RigidityPair,
    TsujiiExact,
    fat_baker_inverse_from_dimension,
    rigidity_pair,
    toral_invariants,
    tsujii_invariants,
)
from .numerics import RngStream, SlopeEstimate, SquareMatrix, determinant, eigenvalues, fit_slope
from .prehistory import (
    BowenQuery,
    Prehistory,
    count_admissible_branches,
    is_in_forward_bowen_ball,
    is_in_inverse_bowen_ball,
    sample_prehistory,
)
from .systems import (
    BERNOULLI,
    HAAR,
    SRB,
    ExpandingCircle,
    FatBaker,
    FullShift,
    NotSmoothError,
    System,
    SystemError_,
    ToralLinear,
    Tsujii,
    bernoulli_convolution_batch,
    make_system,
)

__all__ = [name for name in dir() if not name.startswith("_")]
