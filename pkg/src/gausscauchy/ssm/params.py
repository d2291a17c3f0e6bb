"""
Parameters of the AR(1)-plus-noise model

    x_t = (1 - phi) mu + phi x_{t-1} + tau eps_t,      y_t = x_t + eta_t,

with six laws for the measurement error ``eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _recursions as rec

__all__ = ["SsmParams", "FAMILIES", "normalise_family"]

# free measurement parameters per family, in estimation order
FAMILIES = {
    "gaussian": ("sigma",),
    "cauchy": ("gamma",),
    "gcc": ("sigma", "gamma"),
    "normal_laplace": ("sigma", "laplace_scale"),
    "student_t": ("sigma", "nu"),
    "huber": ("sigma", "k"),
}

_CODES = {
    "gaussian": rec.GAUSSIAN,
    "cauchy": rec.CAUCHY,
    "gcc": rec.GCC,
    "normal_laplace": rec.NORMAL_LAPLACE,
    "student_t": rec.STUDENT_T,
    "huber": rec.HUBER,
}


def normalise_family(name: str) -> str:
    key = str(name).strip().lower().replace("-", "_")
    aliases = {"normallaplace": "normal_laplace", "studentt": "student_t", "t": "student_t",
               "normal": "gaussian", "kalman": "gaussian"}
    key = aliases.get(key, key)
    if key not in FAMILIES:
        raise ValueError(f"unknown measurement family {name!r}; choose from {sorted(FAMILIES)}")
    return key


@dataclass(frozen=True)
class SsmParams:
    """State equation ``(mu, phi, tau)`` plus one measurement law.

    Parameters
    ----------
    mu, phi, tau : float
        State mean, autoregressive coefficient (``|phi| < 1``) and shock scale.
    family : str
        One of ``gaussian, cauchy, gcc, normal_laplace, student_t, huber``.
    sigma : float
        Gaussian scale (Gaussian, GCC, Normal-Laplace) or the density scale
        parameter of the Student-t and Huber laws.
    gamma : float
        Cauchy scale (Cauchy, GCC).
    laplace_scale : float
        Laplace scale ``b`` (Normal-Laplace).
    nu : float
        Student-t degrees of freedom.
    k : float
        Huber threshold.
    """

    mu: float
    phi: float
    tau: float
    family: str = "gcc"
    sigma: float = 0.0
    gamma: float = 0.0
    laplace_scale: float = 0.0
    nu: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", normalise_family(self.family))
        for name in ("mu", "phi", "tau", "sigma", "gamma", "laplace_scale", "nu", "k"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if not abs(self.phi) < 1.0:
            raise ValueError("stationarity requires |phi| < 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        for name in FAMILIES[self.family]:
            if getattr(self, name) <= 0:
                hint = ""
                if self.family == "gcc" and name == "gamma":
                    hint = "; for a purely Gaussian measurement use family 'gaussian'"
                if self.family == "gcc" and name == "sigma":
                    hint = "; for a purely Cauchy measurement use family 'cauchy'"
                raise ValueError(f"{self.family} measurement requires {name} > 0{hint}")

    @property
    def names(self) -> tuple[str, ...]:
        return ("mu", "phi", "tau") + FAMILIES[self.family]

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.names])

    @classmethod
    def from_vector(cls, family: str, values) -> "SsmParams":
        family = normalise_family(family)
        names = ("mu", "phi", "tau") + FAMILIES[family]
        values = np.asarray(values, dtype=float)
        if values.shape != (len(names),):
            raise ValueError(f"{family} needs {len(names)} values {names}")
        return cls(family=family, **{n: float(v) for n, v in zip(names, values)})

    def with_values(self, **kw) -> "SsmParams":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return {"family": self.family, **{n: getattr(self, n) for n in self.names}}

    def kernel_args(self) -> tuple:
        """``(code, mu, phi, tau, sigma, scale2, extra)`` for the compiled recursion."""
        fam = self.family
        sigma = 0.0 if fam == "cauchy" else self.sigma
        scale2 = self.laplace_scale if fam == "normal_laplace" else self.gamma
        extra = self.nu if fam == "student_t" else self.k
        return _CODES[fam], self.mu, self.phi, self.tau, sigma, scale2, extra

    @property
    def stationary_variance(self) -> float:
        return self.tau ** 2 / (1.0 - self.phi ** 2)
