"""
Compiled scalar cores shared by the distribution code and the filters.

``voigt_derivs`` returns the score and Hessian of ``log f(x; 0, sigma, gamma)``
from ``u + i v`` on the Voigt line.  Close to the centre the closed forms in
``u, v`` are used directly.  Once ``rho = |x - i gamma|`` exceeds ``TAIL_RATIO``
(or more when gamma << sigma) Gaussian scales those closed forms lose digits to cancellation (the leading
Cauchy terms cancel), so the density is instead written as the heat-semigroup
series around the Cauchy kernel,

    pi f = sum_n (2n-1)!! sigma^(2n) Im (x - i gamma)^-(2n+1),

and every ratio ``d f / f`` is formed from Chebyshev polynomials in
``cos(arg)``, which carry no cancellation.  The series error at the switch is
below ``(2N-1)!! / TAIL_RATIO^(2N)``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TAIL_RATIO = 12.0
N_TERMS = 32
# the switch also waits until the Gaussian core is negligible next to the
# Cauchy mass, which matters when gamma << sigma
_CORE_LOG = 44.0
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_NCHEB = 2 * N_TERMS + 4


@njit(cache=True)
def _derivs_centre(x, sigma, gamma, u, v):
    r = v / u
    s2 = sigma * sigma
    s_mu = (x + gamma * r) / s2
    s_sigma = ((x * x - gamma * gamma - s2) + 2.0 * gamma * x * r
               + SQRT_2_OVER_PI * sigma * gamma / u) / (s2 * sigma)
    s_gamma = (gamma - x * r - SQRT_2_OVER_PI * sigma / u) / s2
    h_mm = s_sigma / sigma - s_mu * s_mu
    h_gg = -s_sigma / sigma - s_gamma * s_gamma
    h_mg = (x * s_gamma + r + gamma * s_mu) / s2 - s_mu * s_gamma
    h_ms = -(s_mu + gamma * h_mg - x * h_mm) / sigma
    h_gs = -(s_gamma + gamma * h_gg - x * h_mg) / sigma
    h_ss = -(s_sigma + gamma * h_gs - x * h_ms) / sigma
    return s_mu, s_sigma, s_gamma, h_mm, h_ms, h_mg, h_ss, h_gs, h_gg


@njit(cache=True)
def _derivs_tail(x, sigma, gamma):
    rho = math.hypot(x, gamma)
    c = x / rho
    sn = gamma / rho
    cheb_t = np.empty(_NCHEB)
    cheb_u = np.empty(_NCHEB)
    cheb_t[0] = 1.0
    cheb_t[1] = c
    cheb_u[0] = 1.0
    cheb_u[1] = 2.0 * c
    for m in range(2, _NCHEB):
        cheb_t[m] = 2.0 * c * cheb_t[m - 1] - cheb_t[m - 2]
        cheb_u[m] = 2.0 * c * cheb_u[m - 1] - cheb_u[m - 2]

    q2 = (sigma / rho) ** 2
    pn = 1.0  # (2n-1)!! (sigma/rho)^(2n)
    f_hat = 0.0
    a_mu = 0.0
    a_ga = 0.0
    a_si = 0.0
    a_mm = 0.0
    a_mg = 0.0
    a_ss = 0.0
    a_sm = 0.0
    a_sg = 0.0
    for n in range(N_TERMS + 1):
        k = 2 * n
        f_hat += pn * cheb_u[k]
        a_mu += pn * (k + 1) * cheb_u[k + 1]
        a_ga += pn * (k + 1) * cheb_t[k + 2]
        a_mm += pn * (k + 1) * (k + 2) * cheb_u[k + 2]
        a_mg += pn * (k + 1) * (k + 2) * cheb_t[k + 3]
        if n > 0:
            a_si += pn * k * cheb_u[k]
            a_ss += pn * k * (k - 1) * cheb_u[k]
            a_sm += pn * k * (k + 1) * cheb_u[k + 1]
            a_sg += pn * k * (k + 1) * cheb_t[k + 2]
        pn *= (2 * n + 1) * q2

    s_mu = a_mu / (rho * f_hat)
    s_gamma = a_ga / (rho * sn * f_hat)
    s_sigma = a_si / (sigma * f_hat)
    f_mm = a_mm / (rho * rho * f_hat)
    f_mg = a_mg / (rho * rho * sn * f_hat)
    f_ss = a_ss / (sigma * sigma * f_hat)
    f_sm = a_sm / (sigma * rho * f_hat)
    f_sg = a_sg / (sigma * rho * sn * f_hat)
    h_mm = f_mm - s_mu * s_mu
    h_gg = -f_mm - s_gamma * s_gamma
    h_mg = f_mg - s_mu * s_gamma
    h_ms = f_sm - s_mu * s_sigma
    h_gs = f_sg - s_gamma * s_sigma
    h_ss = f_ss - s_sigma * s_sigma
    return s_mu, s_sigma, s_gamma, h_mm, h_ms, h_mg, h_ss, h_gs, h_gg


def in_tail(x, sigma, gamma):
    """Boolean mask of the points where :func:`voigt_derivs` uses the tail series."""
    ratio = TAIL_RATIO
    if gamma < sigma:
        ratio = max(ratio, math.sqrt(2.0 * (_CORE_LOG + math.log(sigma / gamma))))
    return np.hypot(x, gamma) >= ratio * sigma


@njit(cache=True)
def voigt_derivs(x, sigma, gamma, u, v):
    """Score and Hessian entries of ``log f(x; 0, sigma, gamma)``.

    Returns ``(s_mu, s_sigma, s_gamma, h_mm, h_ms, h_mg, h_ss, h_gs, h_gg)``.
    """
    rho = math.hypot(x, gamma)
    ratio = TAIL_RATIO
    if gamma < sigma:
        ratio = max(ratio, math.sqrt(2.0 * (_CORE_LOG + math.log(sigma / gamma))))
    if rho >= ratio * sigma:
        return _derivs_tail(x, sigma, gamma)
    return _derivs_centre(x, sigma, gamma, u, v)


@njit(cache=True)
def voigt_derivs_array(x, sigma, gamma, u, v):
    n = x.shape[0]
    out = np.empty((9, n))
    for i in range(n):
        res = voigt_derivs(x[i], sigma, gamma, u[i], v[i])
        for j in range(9):
            out[j, i] = res[j]
    return out
