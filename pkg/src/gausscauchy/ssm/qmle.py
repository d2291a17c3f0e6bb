"""
Quasi-maximum likelihood for the state-space model.

The criterion is the sum of the filter's one-step log prediction-error
densities.  It is maximised in the coordinates (mu, atanh phi, log of every
scale, log nu, log k) inside a compact box.  For the Voigt families (GCC,
Cauchy) the gradient comes from the forward-mode recursion; the other
families use central differences.  Standard errors are reported both from
the inverse Hessian and from the sandwich ``J^-1 I J^-1`` with ``I`` the
outer product of per-step scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.optimize import minimize

from ..montecarlo import McSummary, map_ordered, summarize, worker_count
from . import _recursions as rec
from .filters import _as_series, simulate_ssm
from .params import FAMILIES, SsmParams, normalise_family

__all__ = ["QmleBox", "QmleResult", "qmle", "qmle_mc_study", "criterion_terms",
           "criterion_scores", "sandwich", "bootstrap_se", "asymptotic_std", "start_candidates"]

_LOG_SCALES = ("tau", "sigma", "gamma", "laplace_scale", "k", "nu")
_FD_STEP = 1e-5
_FD_STEP_ROUGH = 1e-3
_BOUNDARY_TOL = 1e-6
_MIN_T = 50
_ASTD_T = 100_000
_NAMES = {f: ("mu", "phi", "tau", *extra) for f, extra in FAMILIES.items()}


@dataclass(frozen=True)
class QmleBox:
    """``|mu| <= mu_max``, ``|phi| <= phi_max`` and closed intervals for the rest."""

    mu_max: float
    phi_max: float = 0.9999
    scale_min: float = 1e-6
    scale_max: float = 1e3
    nu_min: float = 0.1
    nu_max: float = 1e4
    k_min: float = 0.01
    k_max: float = 50.0

    def __post_init__(self):
        if not self.mu_max > 0:
            raise ValueError("mu_max must be positive")
        if not 0 < self.phi_max < 1:
            raise ValueError("need 0 < phi_max < 1")
        if not 0 < self.scale_min < self.scale_max:
            raise ValueError("need 0 < scale_min < scale_max")
        if not 0 < self.nu_min < self.nu_max or not 0 < self.k_min < self.k_max:
            raise ValueError("invalid nu or k interval")

    @classmethod
    def default_for(cls, y) -> "QmleBox":
        """``|mu| <= |median| + 10 IQR`` and scales in ``[1e-6, 1e3] * IQR``."""
        y = np.asarray(y, dtype=float)
        q1, med, q3 = np.percentile(y, [25.0, 50.0, 75.0])
        iqr = float(q3 - q1)
        if iqr <= 0:
            raise ValueError("observations have zero interquartile range")
        return cls(mu_max=abs(float(med)) + 10.0 * iqr, scale_min=1e-6 * iqr, scale_max=1e3 * iqr)

    def z_bounds(self, names) -> list[tuple[float, float]]:
        out = []
        for n in names:
            if n == "mu":
                out.append((-self.mu_max, self.mu_max))
            elif n == "phi":
                a = float(np.arctanh(self.phi_max))
                out.append((-a, a))
            elif n == "nu":
                out.append((np.log(self.nu_min), np.log(self.nu_max)))
            elif n == "k":
                out.append((np.log(self.k_min), np.log(self.k_max)))
            else:
                out.append((np.log(self.scale_min), np.log(self.scale_max)))
        return out


@dataclass
class QmleResult:
    """Outcome of :func:`qmle`.

    ``loglik`` is the criterion summed over steps.  Standard errors for
    parameters on the box boundary are NaN.  The Huber criterion jumps
    whenever an error crosses the threshold, so it is searched
    derivative-free, ``gradient_norm`` is NaN and the curvature-based
    standard errors are NaN; use :func:`bootstrap_se` instead.
    """

    params_hat: SsmParams
    loglik: float
    sandwich_se: np.ndarray
    inverse_info_se: np.ndarray
    converged: bool
    boundary: tuple[str, ...]
    iterations: int
    gradient_norm: float
    T: int
    floored_steps: int = 0

    @property
    def names(self) -> tuple[str, ...]:
        return self.params_hat.names

    def as_dict(self) -> dict:
        return {
            "family": self.params_hat.family,
            "params": {n: getattr(self.params_hat, n) for n in self.names},
            "sandwich_se": dict(zip(self.names, map(float, self.sandwich_se))),
            "inverse_info_se": dict(zip(self.names, map(float, self.inverse_info_se))),
            "criterion": self.loglik,
            "converged": self.converged,
            "boundary": list(self.boundary),
            "closed_form": self.params_hat.family in ("gaussian", "gcc", "cauchy", "normal_laplace"),
            "smooth_criterion": _smooth(self.params_hat.family),
            "T": self.T,
        }


def _to_z(names, theta):
    z = np.array(theta, dtype=float)
    for i, n in enumerate(names):
        if n == "phi":
            z[i] = np.arctanh(theta[i])
        elif n in _LOG_SCALES:
            z[i] = np.log(theta[i])
    return z


def _from_z(names, z):
    theta = np.array(z, dtype=float)
    jac = np.ones_like(theta)
    for i, n in enumerate(names):
        if n == "phi":
            theta[i] = np.tanh(z[i])
            jac[i] = 1.0 - theta[i] ** 2
        elif n in _LOG_SCALES:
            theta[i] = np.exp(z[i])
            jac[i] = theta[i]
    return theta, jac


def _params(family, theta) -> SsmParams:
    return SsmParams.from_vector(family, theta)


def criterion_terms(y, params: SsmParams) -> np.ndarray:
    """Per-step criterion contributions."""
    code, *rest = params.kernel_args()
    return rec.loglik_terms(code, y, *rest)


def _analytic(family) -> bool:
    return family in ("gcc", "cauchy")


def _analytic_scores(y, params: SsmParams):
    sigma = params.sigma if params.family == "gcc" else 0.0
    ll, g = rec.gcc_loglik_grad(y, params.mu, params.phi, params.tau, sigma, params.gamma)
    cols = [0, 1, 2, 3, 4] if params.family == "gcc" else [0, 1, 2, 4]
    return ll, g[:, cols]


def _fd_steps(theta, family="gcc"):
    """Difference steps; the sandwich Hessian uses ten times these, which must stay inside the space."""
    # a wider step averages over the jumps of a non-smooth criterion
    base = _FD_STEP if _smooth(family) else _FD_STEP_ROUGH
    steps = base * np.maximum(np.abs(theta), 0.1)
    for i, n in enumerate(_NAMES[normalise_family(family)]):
        if n in _LOG_SCALES:
            steps[i] = base * abs(theta[i])  # relative, so tiny scales stay positive
        elif n == "phi":
            steps[i] = min(steps[i], 0.05 * (1.0 - abs(theta[i])))
    return steps


def criterion_scores(y, params: SsmParams):
    """Per-step criterion terms and their gradients in the natural parameters.

    Returns ``(ll, scores)`` with ``scores`` of shape (T, p).
    """
    y = _as_series(y)
    if _analytic(params.family):
        return _analytic_scores(y, params)
    theta = params.as_vector()
    steps = _fd_steps(theta, params.family)
    scores = np.empty((y.size, theta.size))
    for i in range(theta.size):
        up, dn = theta.copy(), theta.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        scores[:, i] = (criterion_terms(y, _params(params.family, up))
                        - criterion_terms(y, _params(params.family, dn))) / (2.0 * steps[i])
    return criterion_terms(y, params), scores


def _total_score(y, family, theta):
    return criterion_scores(y, _params(family, theta))[1].sum(axis=0)


def sandwich(y, params: SsmParams, free=None):
    """``(J, I)``: negative criterion Hessian and outer product of per-step scores.

    The Hessian is a central difference of the total score.
    """
    y = _as_series(y)
    theta = params.as_vector()
    p = theta.size
    free = np.ones(p, dtype=bool) if free is None else np.asarray(free, dtype=bool)
    _, scores = criterion_scores(y, params)
    info = scores.T @ scores
    steps = 10.0 * _fd_steps(theta, params.family)
    hess = np.zeros((p, p))
    for i in np.flatnonzero(free):
        up, dn = theta.copy(), theta.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        try:
            hess[:, i] = (_total_score(y, params.family, up)
                          - _total_score(y, params.family, dn)) / (2.0 * steps[i])
        except ValueError:  # step left the parameter space; one-sided instead
            hess[:, i] = (_total_score(y, params.family, up)
                          - _total_score(y, params.family, theta)) / steps[i]
    hess = 0.5 * (hess + hess.T)
    return -hess, info


def _standard_errors(y, params, free):
    jmat, imat = sandwich(y, params, free)
    p = free.size
    se_s = np.full(p, np.nan)
    se_i = np.full(p, np.nan)
    idx = np.ix_(free, free)
    try:
        jinv = np.linalg.inv(jmat[idx])
    except np.linalg.LinAlgError:
        return se_s, se_i
    cov_s = jinv @ imat[idx] @ jinv
    with np.errstate(invalid="ignore"):
        se_i[free] = np.sqrt(np.diag(jinv))
        se_s[free] = np.sqrt(np.diag(cov_s))
    return se_s, se_i


def _objective(z, y, family, names):
    """Negative mean criterion and its gradient in z."""
    theta, jac = _from_z(names, z)
    try:
        params = _params(family, theta)
    except ValueError:
        return np.inf, np.zeros_like(z)
    T = y.size
    if _analytic(family):
        ll, g = _analytic_scores(y, params)
        f = ll.sum()
        grad = g.sum(axis=0) * jac
    else:
        f = criterion_terms(y, params).sum()
        grad = np.empty_like(z)
        for i in range(z.size):
            up, dn = z.copy(), z.copy()
            up[i] += _FD_STEP
            dn[i] -= _FD_STEP
            fu = criterion_terms(y, _params(family, _from_z(names, up)[0])).sum()
            fd = criterion_terms(y, _params(family, _from_z(names, dn)[0])).sum()
            grad[i] = (fu - fd) / (2.0 * _FD_STEP)
    if not np.isfinite(f):
        return np.inf, np.zeros_like(z)
    return -f / T, -grad / T


def _objective_value(z, y, family, names):
    try:
        params = _params(family, _from_z(names, z)[0])
    except ValueError:
        return np.inf
    f = criterion_terms(y, params).sum()
    return -f / y.size if np.isfinite(f) else np.inf


def _smooth(family) -> bool:
    # the Huber psi' jumps at the threshold, so its filtered variances and
    # hence the criterion are discontinuous in the parameters
    return family != "huber"


def _measurement_start(family, noise_var):
    s = np.sqrt(noise_var)
    return {
        "gaussian": {"sigma": s},
        "cauchy": {"gamma": 0.5 * s},
        "gcc": {"sigma": 0.9 * s, "gamma": 0.1 * s},
        "normal_laplace": {"sigma": 0.7 * s, "laplace_scale": 0.5 * s},
        "student_t": {"sigma": 0.8 * s, "nu": 5.0},
        "huber": {"sigma": 0.8 * s, "k": 1.5},
    }[family]


def start_candidates(y, family: str, box: QmleBox) -> list[SsmParams]:
    """Moment-based starting values from winsorised autocorrelations."""
    q1, med, q3 = np.percentile(y, [25.0, 50.0, 75.0])
    robust_sd = (q3 - q1) / 1.349
    w = np.clip(y, med - 5.0 * robust_sd, med + 5.0 * robust_sd)
    w = w - w.mean()
    var = float(w.var())
    r1 = float(np.dot(w[1:], w[:-1]) / (w.size * var))
    r2 = float(np.dot(w[2:], w[:-2]) / (w.size * var))
    phis = [0.5, 0.9, 0.97]
    if r1 > 0.05:
        phis.insert(0, float(np.clip(r2 / r1, 0.05, 0.995)))
    out = []
    lo, hi = box.scale_min, box.scale_max
    for phi in phis:
        share = float(np.clip(max(r1, 0.05) / phi, 0.05, 0.95))
        signal = share * var
        tau = float(np.clip(np.sqrt(signal * (1.0 - phi ** 2)), 2 * lo, 0.5 * hi))
        noise = max(var - signal, 0.05 * var)
        meas = {k: float(np.clip(v, 2 * lo, 0.5 * hi)) if k not in ("nu", "k") else v
                for k, v in _measurement_start(family, noise).items()}
        mu = float(np.clip(med, -box.mu_max, box.mu_max))
        out.append(SsmParams(mu, phi, tau, family, **meas))
    return out


def _free_mask(z, grad, bounds):
    free = np.ones(z.size, dtype=bool)
    for i, (lo, hi) in enumerate(bounds):
        tol = _BOUNDARY_TOL * max(1.0, hi - lo)
        if (z[i] <= lo + tol and grad[i] > 0) or (z[i] >= hi - tol and grad[i] < 0):
            free[i] = False
    return free


def qmle(y, family: str = "gcc", box: QmleBox | None = None, init: SsmParams | None = None,
         max_iter: int = 1000, n_starts: int = 2) -> QmleResult:
    """Quasi-maximum likelihood estimate for one measurement family.

    Parameters
    ----------
    y : array_like
        At least 50 finite observations.
    family : str
        Measurement family.
    box : QmleBox, optional
        Defaults to :meth:`QmleBox.default_for`.
    init : SsmParams, optional
        Starting value; otherwise the best ``n_starts`` moment-based
        candidates are each optimised and the highest criterion kept.

    Returns
    -------
    QmleResult
        ``converged`` is False when the projected gradient stays above
        tolerance; ``boundary`` names parameters on the box.
    """
    family = normalise_family(family)
    y = _as_series(y)
    if y.size < _MIN_T:
        raise ValueError(f"need at least {_MIN_T} observations")
    box = box or QmleBox.default_for(y)
    names = ("mu", "phi", "tau") + FAMILIES[family]
    bounds = box.z_bounds(names)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    if init is not None:
        if normalise_family(init.family) != family:
            raise ValueError("init family does not match")
        starts = [init]
    else:
        cands = start_candidates(y, family, box)
        vals = [_objective(np.clip(_to_z(names, c.as_vector()), lo, hi), y, family, names)[0]
                for c in cands]
        order = np.argsort(vals)
        starts = [cands[i] for i in order[:max(1, n_starts)]]

    best = None
    for start in starts:
        z0 = np.clip(_to_z(names, start.as_vector()), lo, hi)
        if _smooth(family):
            res = minimize(_objective, z0, args=(y, family, names), jac=True, method="L-BFGS-B",
                           bounds=bounds,
                           options={"maxiter": max_iter, "ftol": 1e-14, "gtol": 1e-9, "maxls": 50})
        else:
            res = minimize(lambda z: _objective_value(z, y, family, names), z0, method="Powell",
                           bounds=bounds, options={"maxiter": max_iter, "xtol": 1e-8, "ftol": 1e-13})
        if best is None or res.fun < best.fun:
            best = res
    z = best.x
    if _smooth(family):
        f, g = _objective(z, y, family, names)
        free = _free_mask(z, g, bounds)
        gnorm = float(np.abs(g[free]).max()) if free.any() else 0.0
        converged = bool(np.isfinite(f) and gnorm <= 1e-5)
    else:
        f = _objective_value(z, y, family, names)
        gnorm = float("nan")
        converged = bool(best.success and np.isfinite(f))
    theta = _from_z(names, z)[0]
    params = _params(family, theta)
    boundary = tuple(n for n, zi, (blo, bhi) in zip(names, z, bounds)
                     if zi <= blo + _BOUNDARY_TOL * max(1.0, bhi - blo)
                     or zi >= bhi - _BOUNDARY_TOL * max(1.0, bhi - blo))
    on_box = np.array([n in boundary for n in names])
    if _smooth(family):
        se_s, se_i = _standard_errors(y, params, ~on_box)
    else:
        se_s = se_i = np.full(len(names), np.nan)
    code, *rest = params.kernel_args()
    floored = int(rec.run_filter(code, y, *rest)[9].sum())
    return QmleResult(params, -f * y.size, se_s, se_i, converged, boundary, int(best.nit),
                      gnorm, int(y.size), floored)


def bootstrap_se(result: QmleResult, reps: int = 100, seed: int = 0,
                 workers: int | None = None) -> np.ndarray:
    """Parametric bootstrap standard errors: refit on paths simulated at the estimate."""
    if reps < 2:
        raise ValueError("reps must be at least 2")
    job = partial(_mc_replication, true_params=result.params_hat, T=result.T, box=None, seed=seed)
    est = np.array(map_ordered(job, range(reps), worker_count(workers)))
    ok = np.all(np.isfinite(est), axis=1)
    return est[ok].std(axis=0, ddof=1)


def _mc_replication(r, true_params, T, box, seed):
    path = simulate_ssm(true_params, T, seed, stream=r)
    try:
        res = qmle(path.y, true_params.family, box)
    except (ValueError, FloatingPointError):
        return np.full(len(true_params.names), np.nan)
    if not res.converged:
        return np.full(len(true_params.names), np.nan)
    return res.params_hat.as_vector()


def asymptotic_std(true_params: SsmParams, T_long: int = _ASTD_T, seed: int = 0) -> np.ndarray:
    """Per-observation sandwich standard deviations at the truth, from one long path."""
    path = simulate_ssm(true_params, T_long, seed, stream=2 ** 31)
    jmat, imat = sandwich(path.y, true_params)
    jinv = np.linalg.inv(jmat / T_long)
    return np.sqrt(np.diag(jinv @ (imat / T_long) @ jinv))


def qmle_mc_study(true_params: SsmParams, T: int, reps: int, seed: int = 0,
                  box: QmleBox | None = None, workers: int | None = None,
                  astd_T: int = _ASTD_T) -> McSummary:
    """Finite-sample behaviour of the QMLE over ``reps`` simulated paths.

    Path ``r`` comes from stream ``r`` of ``seed``; non-converged fits count
    as failures.  ``astd`` is the sandwich standard deviation at the truth,
    evaluated on one long path of length ``astd_T`` and scaled to ``T``.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if T < _MIN_T:
        raise ValueError(f"T must be at least {_MIN_T}")
    job = partial(_mc_replication, true_params=true_params, T=T, box=box, seed=seed)
    est = np.array(map_ordered(job, range(reps), worker_count(workers)))
    astd = asymptotic_std(true_params, astd_T, seed) / np.sqrt(T) if astd_T else np.full(est.shape[1], np.nan)
    return summarize(true_params.names, true_params.as_vector(), est, T, astd)
