"""The Voigt (Gauss-Cauchy convolution) distribution."""

from .density import (
    ConditionalMoments,
    ScoreVector,
    VoigtParams,
    as_params,
    conditional_cumulants,
    conditional_density_z_given_y,
    conditional_moments,
    hessian,
    log_pdf,
    pdf,
    pdf_mills,
    sample,
    score,
)
from .approx import BestApproximations, OptimizerError, best_approximations
from .fisher import FisherInfo, QuadratureError, fisher_information, precision_ratio

__all__ = [
    "BestApproximations",
    "OptimizerError",
    "best_approximations",
    "ConditionalMoments",
    "FisherInfo",
    "QuadratureError",
    "ScoreVector",
    "VoigtParams",
    "as_params",
    "conditional_cumulants",
    "conditional_density_z_given_y",
    "conditional_moments",
    "fisher_information",
    "hessian",
    "log_pdf",
    "pdf",
    "pdf_mills",
    "precision_ratio",
    "sample",
    "score",
]
