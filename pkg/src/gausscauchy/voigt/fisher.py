"""
Fisher information of V(mu, sigma, gamma) by quadrature.

The integrals ``E[s s']`` and ``-E[H]`` are taken over the real line after
the substitution ``y = mu + c tan(pi t / 2)``, ``t in (-1, 1)``.  Under this
map the Cauchy-tailed integrands become bounded and smooth at the end
points, so composite Gauss-Legendre converges quickly.  The panel count is
doubled until successive estimates agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .density import as_params, hessian, pdf, score

__all__ = ["FisherInfo", "QuadratureError", "fisher_information", "precision_ratio",
           "tan_quadrature"]

_GL_ORDER = 20


class QuadratureError(RuntimeError):
    """Quadrature failed to reach its tolerance."""


@dataclass(frozen=True)
class FisherInfo:
    """Per-observation information ``E[s s']`` and companions.

    Attributes
    ----------
    matrix : ndarray (3, 3)
        Outer-product form ``E[s s']`` in (mu, sigma, gamma) order.
    neg_hessian : ndarray (3, 3)
        ``-E[H]``; equal to `matrix` by the information-matrix equality.
    inverse : ndarray (3, 3)
        Inverse of `matrix`.
    astd : ndarray (3,)
        Per-observation asymptotic standard deviations ``sqrt(diag(inverse))``.
    equality_gap : float
        ``max |E[s s'] + E[H]|``.
    mass : float
        Quadrature of the density itself (should be 1).
    """

    matrix: np.ndarray
    neg_hessian: np.ndarray
    inverse: np.ndarray
    astd: np.ndarray
    equality_gap: float
    mass: float


@lru_cache(maxsize=None)
def _panel_rule(panels: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(_GL_ORDER)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def tan_quadrature(panels: int, loc: float, scale: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``y`` and weights for integrals over the real line.

    Includes the Jacobian ``dy/dt = scale (pi/2) sec^2(pi t / 2)``.
    """
    t, w = _panel_rule(panels)
    ang = 0.5 * np.pi * t
    y = loc + scale * np.tan(ang)
    jac = scale * 0.5 * np.pi / np.cos(ang) ** 2
    return y, w * jac


def _integrals(p, panels: int, scale: float):
    y, w = tan_quadrature(panels, p.mu, scale)
    f = pdf(y, p)
    s = np.stack(score(y, p), axis=-1)
    fw = f * w
    opg = np.einsum("n,ni,nj->ij", fw, s, s)
    neg_h = -np.einsum("n,nij->ij", fw, hessian(y, p))
    return opg, neg_h, fw.sum()


def fisher_information(params, rtol: float = 1e-11, max_panels: int = 4096) -> FisherInfo:
    """Per-observation Fisher information of the Voigt family.

    Parameters
    ----------
    params : VoigtParams or (mu, sigma, gamma)
    rtol : float
        Panel doubling stops when successive estimates differ by less than
        ``rtol`` relative to the largest entry.
    max_panels : int
        Upper bound on the number of Gauss-Legendre panels.
    """
    p = as_params(params)
    scale = np.hypot(p.sigma, p.gamma)
    panels = 16
    prev = _integrals(p, panels, scale)
    while True:
        panels *= 2
        cur = _integrals(p, panels, scale)
        size = np.abs(cur[0]).max()
        # convergence is judged on E[s s'] (the returned matrix); -E[H] carries
        # more rounding from the Hessian recursions and serves only as a check
        diff = np.abs(cur[0] - prev[0]).max()
        if diff <= rtol * size:
            break
        if panels >= max_panels:
            raise QuadratureError(f"Fisher quadrature did not converge (last change {diff:.3e})")
        prev = cur
    opg, neg_h, mass = cur
    # the mu row vanishes by symmetry; quadrature leaves only rounding there
    inv = np.linalg.inv(opg)
    return FisherInfo(
        matrix=opg,
        neg_hessian=neg_h,
        inverse=inv,
        astd=np.sqrt(np.diag(inv)),
        equality_gap=float(np.abs(opg - neg_h).max()),
        mass=float(mass),
    )


def precision_ratio(lam: float) -> float:
    """Ratio aStd(sigma) / aStd(gamma) at (sigma, gamma) = (1, lam)."""
    if not (1e-3 <= lam <= 1e2):
        raise ValueError("lambda must lie in [1e-3, 1e2]")
    astd = fisher_information((0.0, 1.0, lam)).astd
    return float(astd[1] / astd[2])
