"""
Compiled filter recursions for the AR(1) state with six measurement laws.

Every family shares the Masreliez update

    x_f = x_p + h_p psi(e),     h_f = h_p - h_p^2 psi'(e),

with ``psi = -d log f_e / de`` for the family's prediction-error density
``f_e``.  The GCC kernel also carries the derivative of the whole recursion
with respect to ``(mu, phi, tau, sigma, gamma)`` (forward mode), which gives
per-step scores for the criterion without finite differences.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, objmode
from scipy.special import wofz

from .._kernels import voigt_derivs

GAUSSIAN, CAUCHY, GCC, NORMAL_LAPLACE, STUDENT_T, HUBER = range(6)

LOG_2PI = math.log(2.0 * math.pi)
SQRT2 = math.sqrt(2.0)
_LOG_NDTR_SWITCH = -37.0
# floor for filtered variances of families whose psi' can exceed 1/h
H_FLOOR = 1e-10


def _wofz_py(z):
    return complex(wofz(z))


@njit(cache=True)
def erfcx_line(e, d, g):
    """``u, v`` at ``w = (g + i e) / (d sqrt 2)``, i.e. wofz(i w)."""
    z = complex(-e / (d * SQRT2), g / (d * SQRT2))
    with objmode(r="complex128"):
        r = _wofz_py(z)
    return r.real, r.imag


@njit(cache=True)
def log_ndtr(x):
    if x > _LOG_NDTR_SWITCH:
        return math.log(0.5 * math.erfc(-x / SQRT2))
    x2 = x * x
    return (-0.5 * x2 - math.log(-x) - 0.5 * LOG_2PI
            + math.log1p(-1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)))


@njit(cache=True)
def _inv_mills(x):
    """phi(x) / Phi(x)."""
    return math.exp(-0.5 * x * x - 0.5 * LOG_2PI - log_ndtr(x))


@njit(cache=True)
def normal_laplace_terms(e, d, b):
    """log f, -dlog f/de, -d2 log f/de2 for N(0, d^2) + Laplace(0, b)."""
    base = 0.5 * (d / b) ** 2
    x1 = e / d - d / b
    x2 = -e / d - d / b
    a1 = base - e / b + log_ndtr(x1)
    a2 = base + e / b + log_ndtr(x2)
    top = max(a1, a2)
    lse = top + math.log(math.exp(a1 - top) + math.exp(a2 - top))
    w1 = math.exp(a1 - lse)
    w2 = math.exp(a2 - lse)
    l1 = _inv_mills(x1)
    l2 = _inv_mills(x2)
    d1 = -1.0 / b + l1 / d
    d2 = 1.0 / b - l2 / d
    dd1 = -l1 * (x1 + l1) / (d * d)
    dd2 = -l2 * (x2 + l2) / (d * d)
    dlog = w1 * d1 + w2 * d2
    d2log = w1 * (dd1 + d1 * d1) + w2 * (dd2 + d2 * d2) - dlog * dlog
    return lse - math.log(2.0 * b), -dlog, -d2log


@njit(cache=True)
def huber_const(k):
    return math.sqrt(2.0 * math.pi) * math.erf(k / SQRT2) + (2.0 / k) * math.exp(-0.5 * k * k)


@njit(cache=True)
def measurement_step(code, e, h, sigma, gamma, extra):
    """Per-step ``(ll, psi, psi_prime, delta2)`` for one family.

    ``gamma`` is the Cauchy scale (Cauchy, GCC) or the Laplace scale
    (Normal-Laplace); ``extra`` is nu (Student-t) or k (Huber).
    """
    if code == GAUSSIAN:
        s = h + sigma * sigma
        return -0.5 * (LOG_2PI + math.log(s) + e * e / s), e / s, 1.0 / s, s
    if code == CAUCHY or code == GCC:
        d2 = h + sigma * sigma
        d = math.sqrt(d2)
        u, v = erfcx_line(e, d, gamma)
        r = voigt_derivs(e, d, gamma, u, v)
        return -0.5 * LOG_2PI - math.log(d) + math.log(u), r[0], -r[3], d2
    if code == NORMAL_LAPLACE:
        d2 = h + sigma * sigma
        ll, psi, psip = normal_laplace_terms(e, math.sqrt(d2), gamma)
        return ll, psi, psip, d2
    if code == STUDENT_T:
        nu = extra
        s2 = h + sigma * sigma
        q = nu * s2 + e * e
        ll = (math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu)
              - 0.5 * math.log(nu * math.pi) - 0.5 * math.log(s2)
              - 0.5 * (nu + 1.0) * math.log1p(e * e / (nu * s2)))
        return ll, (nu + 1.0) * e / q, (nu + 1.0) * (nu * s2 - e * e) / (q * q), s2
    # Huber
    k = extra
    s2 = h + sigma * sigma
    s = math.sqrt(s2)
    r = e / s
    if abs(r) <= k:
        rho = 0.5 * r * r
        psi = r / s
        psip = 1.0 / s2
    else:
        rho = k * abs(r) - 0.5 * k * k
        psi = math.copysign(k, r) / s
        psip = 0.0
    return -math.log(s * huber_const(k)) - rho, psi, psip, s2


@njit(cache=True)
def run_filter(code, y, mu, phi, tau, sigma, gamma, extra):
    """Forward pass; returns a (10, T) array of per-step quantities.

    Rows: x_pred, h_pred, e, delta2, psi, psi_prime, x_filt, h_filt, ll, floored.
    """
    n = y.shape[0]
    out = np.empty((10, n))
    xp = mu
    hp = tau * tau / (1.0 - phi * phi)
    for t in range(n):
        e = y[t] - xp
        ll, psi, psip, d2 = measurement_step(code, e, hp, sigma, gamma, extra)
        xf = xp + hp * psi
        hf = hp - hp * hp * psip
        floored = 0.0
        if hf < H_FLOOR * hp:
            hf = H_FLOOR * hp
            floored = 1.0
        out[0, t] = xp
        out[1, t] = hp
        out[2, t] = e
        out[3, t] = d2
        out[4, t] = psi
        out[5, t] = psip
        out[6, t] = xf
        out[7, t] = hf
        out[8, t] = ll
        out[9, t] = floored
        xp = (1.0 - phi) * mu + phi * xf
        hp = phi * phi * hf + tau * tau
    return out


@njit(cache=True)
def loglik_terms(code, y, mu, phi, tau, sigma, gamma, extra):
    """Per-step log-likelihood contributions only."""
    return run_filter(code, y, mu, phi, tau, sigma, gamma, extra)[8].copy()


@njit(cache=True)
def gcc_loglik_grad(y, mu, phi, tau, sigma, gamma):
    """Per-step criterion terms and their gradients for the Voigt prediction-error law.

    Returns ``(ll, grad)`` with ``grad`` of shape (T, 5) in the order
    (mu, phi, tau, sigma, gamma).  ``sigma = 0`` gives the Cauchy filter.
    """
    n = y.shape[0]
    ll = np.empty(n)
    grad = np.empty((n, 5))
    one_m = 1.0 - phi * phi
    xp = mu
    hp = tau * tau / one_m
    dx = np.zeros(5)
    dh = np.zeros(5)
    dx[0] = 1.0
    dh[1] = 2.0 * phi * tau * tau / (one_m * one_m)
    dh[2] = 2.0 * tau / one_m
    dpsi = np.empty(5)
    dpsip = np.empty(5)
    for t in range(n):
        e = y[t] - xp
        d2 = hp + sigma * sigma
        d = math.sqrt(d2)
        u, v = erfcx_line(e, d, gamma)
        s_m, s_s, s_g, h_mm, h_ms, h_mg, h_ss, h_gs, h_gg = voigt_derivs(e, d, gamma, u, v)
        ll[t] = -0.5 * LOG_2PI - math.log(d) + math.log(u)
        psi = s_m
        psip = -h_mm
        # partials of psi and psi' in (e, delta, gamma); third derivatives via
        # the heat identity H_mm = s_sigma / sigma - s_mu^2
        psi_e = -h_mm
        psi_d = h_ms
        psi_g = h_mg
        psip_e = h_ms / d - 2.0 * s_m * h_mm
        psip_d = -(h_ss / d - s_s / d2 - 2.0 * s_m * h_ms)
        psip_g = -(h_gs / d - 2.0 * s_m * h_mg)
        for k in range(5):
            de = -dx[k]
            dd = dh[k]
            if k == 3:
                dd += 2.0 * sigma
            dd /= 2.0 * d
            dg = 1.0 if k == 4 else 0.0
            grad[t, k] = -psi * de + s_s * dd + s_g * dg
            dpsi[k] = psi_e * de + psi_d * dd + psi_g * dg
            dpsip[k] = psip_e * de + psip_d * dd + psip_g * dg
        xf = xp + hp * psi
        hf = hp - hp * hp * psip
        for k in range(5):
            dxf = dx[k] + dh[k] * psi + hp * dpsi[k]
            dhf = dh[k] - 2.0 * hp * dh[k] * psip - hp * hp * dpsip[k]
            nx = phi * dxf
            nh = phi * phi * dhf
            if k == 0:
                nx += 1.0 - phi
            elif k == 1:
                nx += xf - mu
                nh += 2.0 * phi * hf
            elif k == 2:
                nh += 2.0 * tau
            dx[k] = nx
            dh[k] = nh
        xp = (1.0 - phi) * mu + phi * xf
        hp = phi * phi * hf + tau * tau
    return ll, grad


@njit(cache=True)
def gcc_update_array(e, h, sigma, gamma):
    """Vectorised single GCC update: returns (psi, psi_prime, h_filt) arrays."""
    n = e.shape[0]
    psi = np.empty(n)
    psip = np.empty(n)
    hf = np.empty(n)
    for i in range(n):
        d = math.sqrt(h[i] + sigma * sigma)
        u, v = erfcx_line(e[i], d, gamma)
        r = voigt_derivs(e[i], d, gamma, u, v)
        psi[i] = r[0]
        psip[i] = -r[3]
        hf[i] = h[i] - h[i] * h[i] * psip[i]
    return psi, psip, hf
