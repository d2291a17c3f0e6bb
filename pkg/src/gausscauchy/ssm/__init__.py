"""AR(1) state with Gaussian, Cauchy, GCC, Normal-Laplace, Student-t or Huber measurement error."""

from .filters import (Decomposition, FilterResult, FilterStep, SimulatedPath, SmootherResult,
                      SmootherStep, decompose, gcc_filter, gcc_update, generic_filter, simulate_ssm,
                      smoother)
from .params import FAMILIES, SsmParams, normalise_family
from .qmle import (QmleBox, QmleResult, asymptotic_std, bootstrap_se, criterion_scores,
                   criterion_terms, qmle, qmle_mc_study, sandwich)

__all__ = [
    "FAMILIES", "SsmParams", "normalise_family",
    "FilterStep", "FilterResult", "SmootherStep", "SmootherResult", "Decomposition", "SimulatedPath",
    "gcc_filter", "generic_filter", "smoother", "decompose", "simulate_ssm", "gcc_update",
    "QmleBox", "QmleResult", "qmle", "qmle_mc_study", "criterion_terms", "criterion_scores",
    "sandwich", "bootstrap_se", "asymptotic_std",
]
