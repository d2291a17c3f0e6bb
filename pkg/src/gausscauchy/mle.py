"""
Exact maximum likelihood for V(mu, sigma, gamma) and its Monte Carlo harness.

The mean log-likelihood is maximised over a compact box in the coordinates
``(mu, log sigma, log gamma)``.  A bounded quasi-Newton search with the
analytic score does the bulk of the work; a few projected Newton steps with
the analytic Hessian then polish the optimum to the gradient tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.optimize import minimize

from .montecarlo import McSummary, map_ordered, summarize, worker_count
from .voigt import VoigtParams, as_params, fisher_information, hessian, log_pdf, sample, score

__all__ = ["ParamBox", "MleResult", "ConvergenceError", "DegenerateDataError", "fit",
           "initial_values", "mc_study", "PARAM_NAMES"]

PARAM_NAMES = ("mu", "sigma", "gamma")
_BOUNDARY_TOL = 1e-6


class ConvergenceError(RuntimeError):
    """Raised when the optimiser stops short of the tolerance; carries the last iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateDataError(ValueError):
    """All observations equal (or no spread to estimate scales from)."""


@dataclass(frozen=True)
class ParamBox:
    """Compact parameter set ``|mu| <= mu_max``, scales in closed intervals."""

    mu_max: float
    sigma_min: float
    sigma_max: float
    gamma_min: float
    gamma_max: float

    def __post_init__(self):
        if not self.mu_max > 0:
            raise ValueError("mu_max must be positive")
        if not 0 < self.sigma_min <= self.sigma_max:
            raise ValueError("need 0 < sigma_min <= sigma_max")
        if not 0 < self.gamma_min <= self.gamma_max:
            raise ValueError("need 0 < gamma_min <= gamma_max")

    @classmethod
    def default_for(cls, data) -> "ParamBox":
        """``|mu| <= |median| + 10 IQR``; both scales in ``[1e-6, 1e3] * IQR``."""
        x = np.asarray(data, dtype=float)
        med = float(np.median(x))
        iqr = _iqr(x)
        return cls(abs(med) + 10.0 * iqr, 1e-6 * iqr, 1e3 * iqr, 1e-6 * iqr, 1e3 * iqr)

    def z_bounds(self) -> list[tuple[float, float]]:
        return [(-self.mu_max, self.mu_max),
                (np.log(self.sigma_min), np.log(self.sigma_max)),
                (np.log(self.gamma_min), np.log(self.gamma_max))]

    def contains(self, theta: VoigtParams) -> bool:
        return (abs(theta.mu) <= self.mu_max
                and self.sigma_min <= theta.sigma <= self.sigma_max
                and self.gamma_min <= theta.gamma <= self.gamma_max)


@dataclass
class MleResult:
    """Outcome of :func:`fit`.

    ``loglik`` is the mean log-likelihood; ``std_errors`` are
    ``sqrt(diag(I(theta_hat)^-1) / n)``; ``boundary`` names the parameters
    sitting on the box.
    """

    theta_hat: VoigtParams
    loglik: float
    std_errors: np.ndarray
    converged: bool
    iterations: int
    gradient_norm: float
    n: int
    boundary: tuple[str, ...] = ()
    trace: list = field(default_factory=list, repr=False)

    @property
    def at_boundary(self) -> bool:
        return bool(self.boundary)


def _iqr(x: np.ndarray) -> float:
    q1, q3 = np.percentile(x, [25.0, 75.0])
    return float(q3 - q1)


def _validate(data) -> np.ndarray:
    x = np.asarray(data, dtype=float).ravel()
    if x.size < 10:
        raise ValueError("need at least 10 observations")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise ValueError(f"non-finite observation at index {bad[0]}")
    if np.all(x == x[0]):
        raise DegenerateDataError("all observations are equal")
    if _iqr(x) <= 0:
        raise DegenerateDataError("interquartile range is zero")
    return x


def _kde_hwhm(x: np.ndarray, centre: float, iqr: float) -> float:
    """Half-width at half-maximum of a binned Gaussian kernel density estimate."""
    bw = 0.9 * (iqr / 1.349) * x.size ** -0.2
    lo, hi = centre - 5.0 * iqr, centre + 5.0 * iqr
    nbins = 2048
    counts, edges = np.histogram(x, bins=nbins, range=(lo, hi))
    dx = edges[1] - edges[0]
    half = int(np.ceil(4.0 * bw / dx))
    kern = np.exp(-0.5 * (np.arange(-half, half + 1) * dx / bw) ** 2)
    dens = np.convolve(counts.astype(float), kern, mode="same")
    mids = 0.5 * (edges[1:] + edges[:-1])
    top = int(np.argmax(dens))
    level = 0.5 * dens[top]
    right = top + np.argmax(dens[top:] < level) if np.any(dens[top:] < level) else nbins - 1
    left = top - np.argmax(dens[top::-1] < level) if np.any(dens[top::-1] < level) else 0
    return 0.5 * (mids[right] - mids[left])


def initial_values(data, box: ParamBox) -> VoigtParams:
    """Robust start: median, half the KDE half-width, and the IQR scale net of gamma."""
    x = np.asarray(data, dtype=float)
    med = float(np.median(x))
    iqr = _iqr(x)
    gamma0 = max(0.5 * _kde_hwhm(x, med, iqr), box.gamma_min)
    s_iqr = iqr / 1.349
    sigma0 = np.sqrt(max(s_iqr ** 2 - gamma0 ** 2, (0.1 * s_iqr) ** 2))
    sigma0 = float(np.clip(sigma0, box.sigma_min, box.sigma_max))
    gamma0 = float(np.clip(gamma0, box.gamma_min, box.gamma_max))
    mu0 = float(np.clip(med, -box.mu_max, box.mu_max))
    return VoigtParams(mu0, sigma0, gamma0)


def _objective(z, x):
    """Negative mean log-likelihood and its gradient in (mu, log sigma, log gamma)."""
    theta = VoigtParams(z[0], np.exp(z[1]), np.exp(z[2]))
    ll = float(np.mean(log_pdf(x, theta)))
    s = score(x, theta)
    g = np.array([np.mean(s.s_mu), theta.sigma * np.mean(s.s_sigma),
                  theta.gamma * np.mean(s.s_gamma)])
    return -ll, -g


def _z_hessian(z, x):
    """Hessian of the mean log-likelihood in (mu, log sigma, log gamma)."""
    theta = VoigtParams(z[0], np.exp(z[1]), np.exp(z[2]))
    h = hessian(x, theta).mean(axis=0)
    s = score(x, theta)
    jac = np.array([1.0, theta.sigma, theta.gamma])
    hz = h * np.outer(jac, jac)
    hz[1, 1] += theta.sigma * np.mean(s.s_sigma)
    hz[2, 2] += theta.gamma * np.mean(s.s_gamma)
    return hz


def _free_mask(z, grad, bounds):
    """Coordinates not held at a bound by a gradient pointing outward (ascent direction)."""
    free = np.ones(3, dtype=bool)
    for i, (lo, hi) in enumerate(bounds):
        span = hi - lo
        if z[i] <= lo + _BOUNDARY_TOL * max(1.0, span) and grad[i] < 0:
            free[i] = False
        if z[i] >= hi - _BOUNDARY_TOL * max(1.0, span) and grad[i] > 0:
            free[i] = False
    return free


def fit(data, box: ParamBox | None = None, init=None, max_iter: int = 500,
        record_trace: bool = False) -> MleResult:
    """Maximum likelihood estimate of (mu, sigma, gamma).

    Parameters
    ----------
    data : array_like
        At least 10 finite observations.
    box : ParamBox, optional
        Compact parameter set; defaults to :meth:`ParamBox.default_for`.
    init : VoigtParams or tuple, optional
        Starting value; defaults to :func:`initial_values`.
    max_iter : int
        Iteration cap for the quasi-Newton stage.
    record_trace : bool
        Keep the sequence of accepted mean log-likelihood values.

    Returns
    -------
    MleResult

    Raises
    ------
    ConvergenceError
        If the gradient tolerance is not met; ``exc.result`` holds the last iterate.
    DegenerateDataError
        If the data carry no spread.
    """
    x = _validate(data)
    box = box or ParamBox.default_for(x)
    start = as_params(init) if init is not None else initial_values(x, box)
    bounds = box.z_bounds()
    z0 = np.array([start.mu, np.log(start.sigma), np.log(start.gamma)])
    z0 = np.clip(z0, [b[0] for b in bounds], [b[1] for b in bounds])

    trace = []
    if record_trace:
        trace.append(-_objective(z0, x)[0])

    def callback(intermediate_result):
        if record_trace:
            trace.append(-float(intermediate_result.fun))

    res = minimize(_objective, z0, args=(x,), jac=True, method="L-BFGS-B", bounds=bounds,
                   callback=callback,
                   options={"maxiter": max_iter, "ftol": 1e-15, "gtol": 1e-12, "maxls": 50})
    z = res.x.copy()
    f, g = _objective(z, x)
    iterations = int(res.nit)

    # projected Newton polish with the analytic Hessian
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    tol = 1e-8 * (1.0 + abs(f))
    for _ in range(30):
        free = _free_mask(z, -g, bounds)
        gnorm = np.abs(g[free]).max() if free.any() else 0.0
        if gnorm <= tol:
            break
        hz = _z_hessian(z, x)[np.ix_(free, free)]
        try:
            step_free = np.linalg.solve(hz, g[free])  # Newton step for -ll: -H^-1 (-g)
        except np.linalg.LinAlgError:
            break
        step = np.zeros(3)
        step[free] = step_free
        if np.dot(step, -g) <= 0:  # not an ascent direction for ll
            step = np.zeros(3)
            step[free] = -g[free]
        accepted = False
        t = 1.0
        for _ in range(40):
            z_new = np.clip(z + t * step, lo, hi)
            f_new, g_new = _objective(z_new, x)
            if f_new <= f:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        moved = np.abs(z_new - z).max()
        z, f, g = z_new, f_new, g_new
        iterations += 1
        if record_trace:
            trace.append(-f)
        if moved <= 1e-10:
            break

    free = _free_mask(z, -g, bounds)
    gnorm = float(np.abs(g[free]).max()) if free.any() else 0.0
    converged = gnorm <= 1e-8 * (1.0 + abs(f))
    theta = VoigtParams(z[0], np.exp(z[1]), np.exp(z[2]))
    boundary = tuple(
        name for name, zi, (blo, bhi) in zip(PARAM_NAMES, z, bounds)
        if zi <= blo + _BOUNDARY_TOL * max(1.0, bhi - blo) or zi >= bhi - _BOUNDARY_TOL * max(1.0, bhi - blo)
    )
    try:
        se = fisher_information(theta).astd / np.sqrt(x.size)
    except (np.linalg.LinAlgError, RuntimeError):
        se = np.full(3, np.nan)
    result = MleResult(theta, -f, se, converged, iterations, gnorm, x.size, boundary, trace)
    if not converged:
        raise ConvergenceError(f"gradient norm {gnorm:.3e} above tolerance after "
                               f"{iterations} iterations", result)
    return result


def _mc_replication(r, true_params, n, box, seed):
    data = sample(true_params, n, seed, stream=r)
    try:
        res = fit(data, box)
    except (ConvergenceError, DegenerateDataError):
        return np.full(3, np.nan)
    return res.theta_hat.as_array()


def mc_study(true_params, n: int, reps: int, box: ParamBox | None = None, seed: int = 0,
             workers: int | None = None) -> McSummary:
    """Finite-sample behaviour of the MLE over ``reps`` simulated samples of size ``n``.

    Replication ``r`` draws its sample from stream ``r`` of ``seed``, so the
    result does not depend on the number of workers.  Non-converged
    replications are excluded and counted in ``n_failed``.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if n < 10:
        raise ValueError("n must be at least 10")
    theta0 = as_params(true_params)
    job = partial(_mc_replication, true_params=theta0, n=n, box=box, seed=seed)
    est = np.array(map_ordered(job, range(reps), worker_count(workers)))
    astd = fisher_information(theta0).astd / np.sqrt(n)
    return summarize(PARAM_NAMES, theta0.as_array(), est, n, astd)
