"""
Closest Student-t and pseudo-Voigt laws to a Voigt distribution in the
Kullback-Leibler sense, ``min_g KL(V || g)``, with ``g`` sharing the location.

The cross-entropy ``-E_V[log g]`` is integrated on the tan-mapped
Gauss-Legendre rule used for the Fisher information; the minimisation runs
in log/logit coordinates with Nelder-Mead.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, gammaln

from .density import as_params, log_pdf, pdf
from .fisher import tan_quadrature

__all__ = ["BestApproximations", "best_approximations", "student_t_logpdf",
           "pseudo_voigt_logpdf", "OptimizerError"]

_PANELS = 512


class OptimizerError(RuntimeError):
    """Derivative-free search did not converge."""


class BestApproximations(NamedTuple):
    student_t: tuple[float, float]
    pseudo_voigt: tuple[float, float, float]
    kl_student_t: float
    kl_pseudo_voigt: float


def student_t_logpdf(y, loc, scale, dof):
    z = (np.asarray(y) - loc) / scale
    return (gammaln(0.5 * (dof + 1.0)) - gammaln(0.5 * dof) - 0.5 * np.log(dof * np.pi)
            - np.log(scale) - 0.5 * (dof + 1.0) * np.log1p(z * z / dof))


def pseudo_voigt_logpdf(y, loc, eta, sigma_p, gamma_p):
    """``log[(1 - eta) N(y; loc, sigma_p^2) + eta Cauchy(y; loc, gamma_p)]``."""
    x = np.asarray(y) - loc
    log_norm = -0.5 * (x / sigma_p) ** 2 - np.log(sigma_p) - 0.5 * np.log(2.0 * np.pi)
    log_cauchy = np.log(gamma_p / np.pi) - np.log(x * x + gamma_p * gamma_p)
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log1p(-eta) + log_norm, np.log(eta) + log_cauchy)


def _minimise(objective, x0, bounds):
    res = minimize(objective, x0, method="Nelder-Mead", bounds=bounds,
                   options={"xatol": 1e-8, "fatol": 1e-14, "maxiter": 4000, "maxfev": 8000})
    if not res.success:
        raise OptimizerError(res.message)
    return res


def best_approximations(params) -> BestApproximations:
    """KL-closest Student-t ``(scale, dof)`` and pseudo-Voigt ``(eta, sigma_p, gamma_p)``.

    Parameters
    ----------
    params : VoigtParams or (mu, sigma, gamma)

    Returns
    -------
    BestApproximations
        Minimisers together with the attained divergences.
    """
    p = as_params(params)
    y, w = tan_quadrature(_PANELS, p.mu, np.hypot(p.sigma, p.gamma))
    fw = pdf(y, p) * w
    entropy = float(np.dot(fw, log_pdf(y, p)))
    width = p.sigma + p.gamma

    def kl_t(z):
        return entropy - float(np.dot(fw, student_t_logpdf(y, p.mu, np.exp(z[0]), np.exp(z[1]))))

    def kl_pv(z):
        return entropy - float(np.dot(fw, pseudo_voigt_logpdf(
            y, p.mu, expit(z[0]), np.exp(z[1]), np.exp(z[2]))))

    log_w = np.log(width)
    res_t = _minimise(kl_t, np.array([log_w, np.log(2.0)]),
                      [(log_w - 12.0, log_w + 12.0), (np.log(0.05), np.log(1e5))])
    res_pv = _minimise(kl_pv, np.array([0.0, log_w, log_w]),
                       [(-30.0, 30.0), (log_w - 12.0, log_w + 12.0), (log_w - 12.0, log_w + 12.0)])
    zt, zp = res_t.x, res_pv.x
    return BestApproximations(
        student_t=(float(np.exp(zt[0])), float(np.exp(zt[1]))),
        pseudo_voigt=(float(expit(zp[0])), float(np.exp(zp[1])), float(np.exp(zp[2]))),
        kl_student_t=float(res_t.fun),
        kl_pseudo_voigt=float(res_pv.fun),
    )
