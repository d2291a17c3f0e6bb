"""
Scaled complementary error function on the right half-plane.

``erfcx(w) = exp(w**2) * erfc(w)`` evaluated at complex ``w`` with
``Re(w) >= 0``.  The core evaluation goes through the Faddeeva function
``wofz`` (``erfcx(w) = wofz(1j * w)``), which combines a Taylor region, a
rational approximation region and a continued fraction for large ``|w|``.
Far out along the Voigt line the leading terms of the asymptotic series are
used directly so the real part never underflows.

Derivatives use the closure identity ``e'(w) = 2 w e(w) - 2/sqrt(pi)``,
iterated through the polynomial pair ``e^(n) = p_n e + q_n``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import wofz

__all__ = [
    "DomainError",
    "VoigtLineValue",
    "erfcx_complex",
    "erfcx_derivative",
    "voigt_line_eval",
    "MAX_DERIVATIVE_ORDER",
]

TWO_OVER_SQRT_PI = 2.0 / np.sqrt(np.pi)
INV_SQRT_PI = 1.0 / np.sqrt(np.pi)
MAX_DERIVATIVE_ORDER = 6

# beyond this modulus the three-term asymptotic series is exact to double
# precision (the next term is O(|w|^-7) relative)
_ASYMPTOTIC_RADIUS = 1.0e8


class DomainError(ValueError):
    """Argument outside the right half-plane or not finite."""


class VoigtLineValue(NamedTuple):
    """Real and imaginary parts of erfcx on the Voigt line."""

    u: np.ndarray | float
    v: np.ndarray | float


def _check_domain(w: np.ndarray) -> None:
    if not np.all(np.isfinite(w)):
        raise DomainError("erfcx argument must have finite components")
    if np.any(w.real < 0):
        raise DomainError("erfcx argument must satisfy Re(w) >= 0")


def _erfcx_unchecked(w: np.ndarray) -> np.ndarray:
    out = wofz(1j * w)
    far = np.abs(w) > _ASYMPTOTIC_RADIUS
    if np.any(far):
        z = 1.0 / w[far]
        z2 = z * z
        out[far] = INV_SQRT_PI * z * (1.0 - z2 * (0.5 - 0.75 * z2))
    return out


def erfcx_complex(w):
    """Scaled complementary error function for ``Re(w) >= 0``.

    Parameters
    ----------
    w : complex or array_like of complex
        Argument(s) in the closed right half-plane.

    Returns
    -------
    complex or ndarray
        ``exp(w**2) * erfc(w)``, same shape as `w`.

    Raises
    ------
    DomainError
        If any argument has a negative real part or a non-finite component.
    """
    arr = np.asarray(w, dtype=complex)
    _check_domain(arr)
    out = _erfcx_unchecked(np.atleast_1d(arr).copy())
    if arr.ndim == 0:
        return complex(out[0])
    return out.reshape(arr.shape)


@lru_cache(maxsize=None)
def _closure_polynomials(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients (ascending powers of w) of p_n and q_n."""
    p = np.array([1.0])
    q = np.array([0.0])
    two_w = np.array([0.0, 2.0])
    for _ in range(order):
        p, q = (
            P.polyadd(P.polyder(p), P.polymul(two_w, p)),
            P.polysub(P.polyder(q) if q.size > 1 else np.array([0.0]), TWO_OVER_SQRT_PI * p),
        )
    return p, q


def erfcx_derivative(w, order: int = 1):
    """n-th derivative of erfcx from the closure identity.

    Parameters
    ----------
    w : complex or array_like of complex
        Argument(s) with ``Re(w) >= 0``.
    order : int
        Derivative order, ``1 <= order <= 6``.

    Returns
    -------
    complex or ndarray
        ``p_n(w) e(w) + q_n(w)``.
    """
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ValueError("derivative order must be a positive integer")
    if order > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order {order} unsupported (max {MAX_DERIVATIVE_ORDER})")
    arr = np.asarray(w, dtype=complex)
    e = erfcx_complex(arr)
    p, q = _closure_polynomials(int(order))
    out = P.polyval(arr, p) * e + P.polyval(arr, q)
    if arr.ndim == 0:
        return complex(out)
    return out


def voigt_line_argument(y, mu, sigma, gamma):
    """The point ``(gamma + i (y - mu)) / (sigma sqrt 2)`` on the Voigt line."""
    y = np.asarray(y, dtype=float)
    return (gamma + 1j * (y - mu)) / (sigma * np.sqrt(2.0))


def voigt_line_eval(y, mu: float, sigma: float, gamma: float) -> VoigtLineValue:
    """Evaluate ``u + i v = erfcx(w)`` on the Voigt line.

    Parameters
    ----------
    y : float or array_like
        Observation(s).
    mu, sigma, gamma : float
        Location, Gaussian scale (> 0) and Cauchy scale (> 0).

    Returns
    -------
    VoigtLineValue
        ``u > 0`` and ``v``, odd in ``y - mu``.
    """
    if not (np.isfinite(mu) and np.isfinite(sigma) and np.isfinite(gamma)):
        raise ValueError("Voigt parameters must be finite")
    if sigma <= 0 or gamma <= 0:
        raise ValueError("Voigt scales must be positive")
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("observations must be finite")
    e = _erfcx_unchecked(np.atleast_1d(voigt_line_argument(y, mu, sigma, gamma)).copy())
    if y.ndim == 0:
        return VoigtLineValue(float(e[0].real), float(e[0].imag))
    e = e.reshape(y.shape)
    return VoigtLineValue(e.real, e.imag)
