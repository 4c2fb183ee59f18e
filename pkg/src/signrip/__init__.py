"""Robust low-rank matrix recovery from sparsely corrupted measurements.

Core pieces: instance generation (model), the robust l1 objective and its
subgradient (loss), Monte-Carlo RIP certifiers and the scaling function
(rip), subgradient descent with spectral initialization (optim),
signal/error diagnostics (diagnostics), and a sweep/plot/CLI harness
(experiments).
"""

from .diagnostics import Decomposition, ErrorBoundReport, check_error_bound, decompose, error_frobenius
from .loss import (
    SubgradientResult,
    f_r_norm,
    grad_l2,
    loss_l1,
    loss_l2,
    residual,
    sign_weighted_adjoint,
    subgrad_l1,
)
from .model import (
    GroundTruth,
    MeasurementEnsemble,
    NoiseSpec,
    NoiseVector,
    apply_operator,
    gen_ensemble,
    gen_ground_truth,
    gen_noise,
    measure,
    stream_ensemble,
)
from .optim import (
    Constant,
    Geometric,
    InitSpec,
    InverseSqrtT,
    InverseT,
    QNormGeometric,
    RandomGaussian,
    ResidualProportional,
    RunRecord,
    Spectral,
    StationaryClass,
    StepPolicy,
    StepSizeSingularity,
    ZeroAdjacent,
    classify_stationary,
    gd_l2,
    make_init,
    random_init,
    schedule_alpha,
    schedule_iterations,
    schedule_rho,
    spectral_init,
    subgd,
)
from .rip import (
    SQRT_2_OVER_PI,
    QDeviation,
    RipEstimate,
    ScalingFunction,
    estimate_l1l2_rip,
    estimate_l2_rip,
    estimate_sign_rip,
    q_deviation_l2,
    scaling_phi,
    sign_rip_deficiency,
)

__all__ = [
    "Constant",
    "Decomposition",
    "ErrorBoundReport",
    "Geometric",
    "GroundTruth",
    "InitSpec",
    "InverseSqrtT",
    "InverseT",
    "MeasurementEnsemble",
    "NoiseSpec",
    "NoiseVector",
    "QDeviation",
    "QNormGeometric",
    "RandomGaussian",
    "ResidualProportional",
    "RipEstimate",
    "RunRecord",
    "SQRT_2_OVER_PI",
    "ScalingFunction",
    "Spectral",
    "StationaryClass",
    "StepPolicy",
    "StepSizeSingularity",
    "SubgradientResult",
    "ZeroAdjacent",
    "apply_operator",
    "check_error_bound",
    "classify_stationary",
    "decompose",
    "error_frobenius",
    "estimate_l1l2_rip",
    "estimate_l2_rip",
    "estimate_sign_rip",
    "f_r_norm",
    "gd_l2",
    "gen_ensemble",
    "gen_ground_truth",
    "gen_noise",
    "grad_l2",
    "loss_l1",
    "loss_l2",
    "make_init",
    "measure",
    "q_deviation_l2",
    "random_init",
    "residual",
    "scaling_phi",
    "schedule_alpha",
    "schedule_iterations",
    "schedule_rho",
    "sign_rip_deficiency",
    "sign_weighted_adjoint",
    "spectral_init",
    "stream_ensemble",
    "subgd",
    "subgrad_l1",
]

__version__ = "0.1.0"
