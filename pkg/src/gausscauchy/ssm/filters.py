"""
Filtering, smoothing, measurement-error decomposition and simulation for the
AR(1)-plus-noise model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr, ndtri

from ..rng import rng
from . import _recursions as rec
from .params import SsmParams

__all__ = [
    "FilterStep",
    "FilterResult",
    "SmootherStep",
    "SmootherResult",
    "Decomposition",
    "SimulatedPath",
    "gcc_filter",
    "generic_filter",
    "smoother",
    "decompose",
    "simulate_ssm",
    "gcc_update",
]


class FilterStep(NamedTuple):
    x_pred: float
    h_pred: float
    e: float
    delta2: float
    psi: float
    psi_prime: float
    x_filt: float
    h_filt: float
    ll: float


@dataclass(frozen=True)
class FilterResult:
    """Per-step filter output stored as arrays of length T."""

    params: SsmParams
    y: np.ndarray
    x_pred: np.ndarray
    h_pred: np.ndarray
    e: np.ndarray
    delta2: np.ndarray
    psi: np.ndarray
    psi_prime: np.ndarray
    x_filt: np.ndarray
    h_filt: np.ndarray
    ll: np.ndarray
    floored: np.ndarray

    @property
    def loglik(self) -> float:
        return float(self.ll.sum())

    def __len__(self) -> int:
        return self.y.shape[0]

    def step(self, t: int) -> FilterStep:
        return FilterStep(*(float(getattr(self, f)[t]) for f in FilterStep._fields))


class SmootherStep(NamedTuple):
    x_smooth: float
    h_smooth: float
    gain: float


@dataclass(frozen=True)
class SmootherResult:
    x_smooth: np.ndarray
    h_smooth: np.ndarray
    gain: np.ndarray

    def step(self, t: int) -> SmootherStep:
        return SmootherStep(float(self.x_smooth[t]), float(self.h_smooth[t]), float(self.gain[t]))


class Decomposition(NamedTuple):
    """Filtered shares of the prediction error: state, Gaussian noise, Cauchy noise."""

    e_state: np.ndarray | float
    e_gauss_noise: np.ndarray | float
    e_cauchy: np.ndarray | float


def _as_series(y) -> np.ndarray:
    y = np.ascontiguousarray(np.asarray(y, dtype=float))
    if y.ndim != 1 or y.size == 0:
        raise ValueError("observations must be a non-empty one-dimensional sequence")
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        raise ValueError(f"non-finite observation at index {bad[0]}")
    return y


def generic_filter(y, params: SsmParams) -> FilterResult:
    """Masreliez filter for any measurement family.

    Parameters
    ----------
    y : array_like
        Observations.
    params : SsmParams

    Returns
    -------
    FilterResult
        Predictive and filtered moments, prediction errors, ``psi`` and
        ``psi'`` and the per-step criterion terms.
    """
    if not isinstance(params, SsmParams):
        raise TypeError("params must be an SsmParams")
    y = _as_series(y)
    out = rec.run_filter(*params.kernel_args()[:1], y, *params.kernel_args()[1:])
    return FilterResult(params, y, *out[:9], out[9].astype(bool))


def gcc_filter(y, params: SsmParams) -> FilterResult:
    """Filter with a Voigt prediction-error law ``V(0, sqrt(h + sigma^2), gamma)``."""
    if not isinstance(params, SsmParams) or params.family != "gcc":
        raise ValueError("gcc_filter requires SsmParams with the gcc family")
    return generic_filter(y, params)


def smoother(result: FilterResult) -> SmootherResult:
    """Backward fixed-interval smoother on the Gaussian state equation.

    ``x_{t|T} = x_{t|t} + c_t (x_{t+1|T} - x_{t+1|t})`` with
    ``c_t = phi h_{t|t} / h_{t+1|t}``.
    """
    phi = result.params.phi
    n = len(result)
    xs = result.x_filt.copy()
    hs = result.h_filt.copy()
    gain = np.zeros(n)
    if n > 1:
        gain[:-1] = phi * result.h_filt[:-1] / result.h_pred[1:]
    for t in range(n - 2, -1, -1):
        c = gain[t]
        xs[t] = result.x_filt[t] + c * (xs[t + 1] - result.x_pred[t + 1])
        hs[t] = result.h_filt[t] + c * c * (hs[t + 1] - result.h_pred[t + 1])
    return SmootherResult(xs, hs, gain)


def decompose(step, params: SsmParams) -> Decomposition:
    """Split the prediction error into filtered state, Gaussian and Cauchy parts.

    ``E[xi|F_t] = h psi`` and ``E[Z|F_t] = sigma^2 psi``; the Cauchy share is
    what remains, which equals ``-gamma v / u``.

    Parameters
    ----------
    step : FilterStep or FilterResult
    params : SsmParams
        GCC (or Cauchy, where the Gaussian share is zero) measurement.
    """
    if params.family not in ("gcc", "cauchy"):
        raise ValueError("decompose is defined for the gcc (or cauchy) measurement family")
    sigma2 = params.sigma ** 2 if params.family == "gcc" else 0.0
    e, h, psi = step.e, step.h_pred, step.psi
    e_state = np.multiply(h, psi)
    e_gauss = np.multiply(sigma2, psi)
    e_cauchy = np.subtract(e, e_state + e_gauss)
    if np.ndim(e) == 0:
        return Decomposition(float(e_state), float(e_gauss), float(e_cauchy))
    return Decomposition(e_state, e_gauss, e_cauchy)


def gcc_update(e, h_pred, sigma: float, gamma: float):
    """One GCC measurement update on arrays of errors and predictive variances.

    Returns ``(psi, psi_prime, h_filt)``.
    """
    e = np.ascontiguousarray(e, dtype=float).ravel()
    h = np.ascontiguousarray(np.broadcast_to(np.asarray(h_pred, dtype=float), e.shape)).ravel()
    return rec.gcc_update_array(e, h, float(sigma), float(gamma))


class SimulatedPath(NamedTuple):
    y: np.ndarray
    x: np.ndarray
    components: dict


def _huber_draws(gen, k: float, size: int) -> np.ndarray:
    core = np.sqrt(2.0 * np.pi) * (2.0 * ndtr(k) - 1.0) / rec.huber_const(k)
    in_core = gen.random(size) < core
    lo = ndtr(-k)
    out = ndtri(lo + gen.random(size) * (1.0 - 2.0 * lo))
    tail = k + gen.exponential(1.0 / k, size)
    sign = np.where(gen.random(size) < 0.5, -1.0, 1.0)
    return np.where(in_core, out, sign * tail)


def simulate_ssm(params: SsmParams, T: int, seed: int, stream: int = 0) -> SimulatedPath:
    """Draw one path of length ``T``; ``x_1`` comes from the stationary law.

    Returns
    -------
    SimulatedPath
        ``y``, ``x`` and the innovations: ``eps`` (state shocks, ``eps[0]`` the
        standardised initial draw) plus the measurement pieces (``gauss`` and
        ``cauchy`` for GCC, ``laplace`` for Normal-Laplace, ``noise`` for the
        Student-t and Huber laws).
    """
    if T < 1:
        raise ValueError("T must be positive")
    gen = rng(seed, stream)
    p = params
    eps = gen.standard_normal(T)
    x = np.empty(T)
    x[0] = p.mu + np.sqrt(p.stationary_variance) * eps[0]
    for t in range(1, T):
        x[t] = (1.0 - p.phi) * p.mu + p.phi * x[t - 1] + p.tau * eps[t]
    comp = {"eps": eps}
    fam = p.family
    if fam == "gaussian":
        comp["gauss"] = p.sigma * gen.standard_normal(T)
    elif fam == "cauchy":
        comp["cauchy"] = p.gamma * gen.standard_cauchy(T)
    elif fam == "gcc":
        comp["gauss"] = p.sigma * gen.standard_normal(T)
        comp["cauchy"] = p.gamma * gen.standard_cauchy(T)
    elif fam == "normal_laplace":
        comp["gauss"] = p.sigma * gen.standard_normal(T)
        comp["laplace"] = gen.laplace(0.0, p.laplace_scale, T)
    elif fam == "student_t":
        comp["noise"] = p.sigma * gen.standard_t(p.nu, T)
    else:
        comp["noise"] = p.sigma * _huber_draws(gen, p.k, T)
    noise = sum(v for key, v in comp.items() if key != "eps")
    return SimulatedPath(x + noise, x, comp)
