"""
Density, derivatives and latent-Gaussian conditional moments of V(mu, sigma, gamma).

All functions broadcast over ``y``.  With ``yt = y - mu`` and
``u + i v = erfcx((gamma + i yt) / (sigma sqrt 2))``:

    f(y)      = u / sqrt(2 pi sigma^2)
    s_mu      = (yt + gamma v/u) / sigma^2
    s_sigma   = ((yt^2 - gamma^2 - sigma^2) + 2 gamma yt v/u + c sigma gamma / u) / sigma^3
    s_gamma   = (gamma - yt v/u - c sigma / u) / sigma^2,         c = sqrt(2/pi)

The Hessian follows from the heat and Laplace equations satisfied by ``u``
together with the scale homogeneity ``sigma s_sigma + gamma s_gamma - yt s_mu = -1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .._kernels import in_tail, voigt_derivs_array
from ..rng import rng as make_rng
from ..special_fn import erfcx_complex, erfcx_derivative, voigt_line_argument, voigt_line_eval

__all__ = [
    "VoigtParams",
    "ScoreVector",
    "ConditionalMoments",
    "as_params",
    "pdf",
    "pdf_mills",
    "log_pdf",
    "score",
    "hessian",
    "conditional_moments",
    "conditional_density_z_given_y",
    "conditional_cumulants",
    "sample",
]

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class VoigtParams:
    """Location ``mu``, Gaussian scale ``sigma`` and Cauchy scale ``gamma``."""

    mu: float
    sigma: float
    gamma: float

    def __post_init__(self):
        for name in ("mu", "sigma", "gamma"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.sigma, self.gamma])


def as_params(params) -> VoigtParams:
    if isinstance(params, VoigtParams):
        return params
    mu, sigma, gamma = params
    return VoigtParams(mu, sigma, gamma)


class ScoreVector(NamedTuple):
    s_mu: np.ndarray | float
    s_sigma: np.ndarray | float
    s_gamma: np.ndarray | float


class ConditionalMoments(NamedTuple):
    mean: np.ndarray | float
    variance: np.ndarray | float


def _line(y, p: VoigtParams):
    u, v = voigt_line_eval(y, p.mu, p.sigma, p.gamma)
    return np.asarray(y, dtype=float) - p.mu, u, v


def pdf(y, params):
    """Voigt density via the real part of erfcx on the Voigt line."""
    p = as_params(params)
    u = voigt_line_eval(y, p.mu, p.sigma, p.gamma).u
    return u / (np.sqrt(2.0 * np.pi) * p.sigma)


def pdf_mills(y, params):
    """Voigt density through the complex Mills ratio ``m(t) = Phi(-t)/phi(t)``.

    ``f(y) = Re m((gamma + i (y - mu)) / sigma) / (pi sigma)`` with
    ``m(t) = sqrt(pi/2) erfcx(t / sqrt 2)``.
    """
    p = as_params(params)
    y_arr = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y_arr)):
        raise ValueError("observations must be finite")
    t = (p.gamma + 1j * (y_arr - p.mu)) / p.sigma
    m = np.sqrt(np.pi / 2.0) * erfcx_complex(t / np.sqrt(2.0))
    return np.real(m) / (np.pi * p.sigma)


def log_pdf(y, params):
    """Log-density ``log u - log sigma - log sqrt(2 pi)``; finite far into the tails."""
    p = as_params(params)
    u = voigt_line_eval(y, p.mu, p.sigma, p.gamma).u
    return np.log(u) - np.log(p.sigma) - LOG_SQRT_2PI


def _derivs(y, p: VoigtParams):
    """(9, n) array of score and Hessian entries plus the flattened shape."""
    yt, u, v = _line(y, p)
    shape = np.shape(yt)
    d = voigt_derivs_array(np.atleast_1d(yt).astype(float).ravel(), p.sigma, p.gamma,
                           np.atleast_1d(u).ravel(), np.atleast_1d(v).ravel())
    return d, shape


def score(y, params) -> ScoreVector:
    """Score of the log-density with respect to (mu, sigma, gamma)."""
    p = as_params(params)
    d, shape = _derivs(y, p)
    if shape == ():
        return ScoreVector(float(d[0, 0]), float(d[1, 0]), float(d[2, 0]))
    return ScoreVector(d[0].reshape(shape), d[1].reshape(shape), d[2].reshape(shape))


def hessian(y, params) -> np.ndarray:
    """Hessian of the log-density, shape ``y.shape + (3, 3)``, order (mu, sigma, gamma).

    Built from the heat identity ``H_mm = s_sigma/sigma - s_mu^2``, the Laplace
    identity ``H_mm + s_mu^2 + H_gg + s_gamma^2 = 0`` and the derivatives of the
    scale homogeneity relation.
    """
    p = as_params(params)
    d, shape = _derivs(y, p)
    h_mm, h_ms, h_mg, h_ss, h_gs, h_gg = d[3:]
    out = np.empty((d.shape[1], 3, 3))
    out[:, 0, 0] = h_mm
    out[:, 1, 1] = h_ss
    out[:, 2, 2] = h_gg
    out[:, 0, 1] = out[:, 1, 0] = h_ms
    out[:, 0, 2] = out[:, 2, 0] = h_mg
    out[:, 1, 2] = out[:, 2, 1] = h_gs
    return out.reshape(shape + (3, 3))


def conditional_moments(y, params) -> ConditionalMoments:
    """Mean and variance of the Gaussian component Z given Y = y.

    ``E[Z|y] = (y - mu) + gamma v/u`` and
    ``V[Z|y] = sqrt(2/pi) sigma gamma / u - gamma^2 (1 + v^2/u^2)``; in the far
    tails, where these cancel, the equivalent Tweedie forms
    ``sigma^2 s_mu`` and ``sigma^2 + sigma^4 H_mumu`` are used.
    """
    p = as_params(params)
    yt, u, v = _line(y, p)
    r = v / u
    mean = yt + p.gamma * r
    var = SQRT_2_OVER_PI * p.sigma * p.gamma / u - p.gamma ** 2 * (1.0 + r * r)
    tail = in_tail(yt, p.sigma, p.gamma)
    if np.any(tail):
        # far out the closed forms cancel; use Tweedie with the tail-series derivatives
        y_arr = np.asarray(y, dtype=float)
        d, _ = _derivs(y_arr[tail] if y_arr.ndim else y_arr, p)
        s2 = p.sigma ** 2
        mean_t, var_t = s2 * d[0], s2 + s2 * s2 * d[3]
        if np.ndim(yt) == 0:
            return ConditionalMoments(float(mean_t[0]), float(var_t[0]))
        mean, var = np.array(mean, dtype=float), np.array(var, dtype=float)
        mean[tail], var[tail] = mean_t, var_t
    return ConditionalMoments(mean, var)


def conditional_density_z_given_y(z, y, params):
    """Density of Z at ``z`` given Y = ``y`` (Gaussian prior times Cauchy likelihood)."""
    p = as_params(params)
    u = voigt_line_eval(y, p.mu, p.sigma, p.gamma).u
    z = np.asarray(z, dtype=float)
    x = (np.asarray(y, dtype=float) - p.mu - z) / p.gamma
    return np.exp(-0.5 * (z / p.sigma) ** 2) / (p.gamma * np.pi * u * (1.0 + x * x))


def _log_u_derivatives(y, p: VoigtParams, order: int):
    """y-derivatives of log u up to ``order`` (list, first to ``order``-th)."""
    w = voigt_line_argument(y, p.mu, p.sigma, p.gamma)
    c = 1j / (p.sigma * np.sqrt(2.0))
    u = voigt_line_eval(y, p.mu, p.sigma, p.gamma).u
    # ratios a_k = u^(k) / u
    a = [np.real(c ** k * erfcx_derivative(w, k)) / u for k in range(1, order + 1)]
    l1 = a[0]
    out = [l1, a[1] - l1 ** 2]
    if order >= 3:
        out.append(a[2] - 3.0 * a[1] * l1 + 2.0 * l1 ** 3)
    if order >= 4:
        out.append(a[3] - 4.0 * a[2] * l1 - 3.0 * a[1] ** 2
                   + 12.0 * a[1] * l1 ** 2 - 6.0 * l1 ** 4)
    return out


def conditional_cumulants(y, params, max_order: int = 4) -> list:
    """Cumulants kappa_1..kappa_r of Z given Y = y, ``r`` in {3, 4}.

    kappa_1 and kappa_2 are the closed-form conditional mean and variance;
    higher orders are ``(-sigma^2)^r d^r/dy^r log f(y)``, evaluated through
    the erfcx derivative chain.
    """
    if max_order not in (3, 4):
        raise ValueError("max_order must be 3 or 4")
    p = as_params(params)
    m = conditional_moments(y, p)
    dl = _log_u_derivatives(y, p, max_order)
    s2 = p.sigma ** 2
    kappas = [m.mean, m.variance, -s2 ** 3 * dl[2]]
    if max_order == 4:
        kappas.append(s2 ** 4 * dl[3])
    return kappas


def sample(params, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """Draw ``n`` observations ``mu + sigma N + gamma tan(pi (U - 1/2))``."""
    p = as_params(params)
    if n < 1:
        raise ValueError("n must be at least 1")
    g = make_rng(seed, stream)
    z = g.standard_normal(n)
    unif = g.random(n)
    return p.mu + p.sigma * z + p.gamma * np.tan(np.pi * (unif - 0.5))

