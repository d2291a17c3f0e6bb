"""
Increments of the Brownian-plus-Cauchy Lévy process ``X_t = sigma W_t + theta Y_t``.

Over an interval ``delta`` the increment is ``V(0, sigma sqrt(delta),
|theta| delta)``, so densities, scores and information follow from the Voigt
module through the two scale maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .voigt import VoigtParams, fisher_information, log_pdf, score

__all__ = ["LevyParams", "LevyScore", "increment_logpdf", "increment_score", "increment_fisher",
           "voigt_params"]


@dataclass(frozen=True)
class LevyParams:
    """Brownian scale ``sigma_bm``, Cauchy scale ``theta_levy`` (sign allowed, non-zero) and interval ``delta``."""

    sigma_bm: float
    theta_levy: float
    delta: float

    def __post_init__(self):
        for name in ("sigma_bm", "theta_levy", "delta"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if self.sigma_bm <= 0:
            raise ValueError("sigma_bm must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.theta_levy == 0:
            raise ValueError("theta_levy = 0 leaves the Voigt family; use a Gaussian model")


class LevyScore(NamedTuple):
    d_sigma: np.ndarray | float
    d_theta: np.ndarray | float


def voigt_params(params: LevyParams) -> VoigtParams:
    """The increment law ``V(0, sigma sqrt(delta), |theta| delta)``."""
    return VoigtParams(0.0, params.sigma_bm * math.sqrt(params.delta),
                       abs(params.theta_levy) * params.delta)


def _jacobian(params: LevyParams) -> np.ndarray:
    """d(sigma_V, gamma_V) / d(sigma, theta)."""
    return np.diag([math.sqrt(params.delta), math.copysign(params.delta, params.theta_levy)])


def increment_logpdf(x, params: LevyParams):
    """Log density of an increment over ``delta``."""
    return log_pdf(x, voigt_params(params))


def increment_score(x, params: LevyParams) -> LevyScore:
    """Derivatives of :func:`increment_logpdf` in ``(sigma_bm, theta_levy)``.

    ``d_sigma = sqrt(delta) s_sigma`` and ``d_theta = sign(theta) delta s_gamma``
    with the Voigt scores at the mapped parameters.
    """
    s = score(x, voigt_params(params))
    jac = _jacobian(params)
    return LevyScore(jac[0, 0] * s.s_sigma, jac[1, 1] * s.s_gamma)


def increment_fisher(params: LevyParams, n_quadrature: int | None = None) -> np.ndarray:
    """Per-increment information over ``(sigma_bm, theta_levy)``.

    ``J' I_V J`` with ``I_V`` the Voigt information over (sigma, gamma); the
    location block drops out because it is orthogonal to the scales.

    Parameters
    ----------
    params : LevyParams
    n_quadrature : int, optional
        Cap on the quadrature panels used for the Voigt information.
    """
    kw = {} if n_quadrature is None else {"max_panels": int(n_quadrature)}
    info = fisher_information(voigt_params(params), **kw).matrix[1:, 1:]
    jac = _jacobian(params)
    return jac.T @ info @ jac
