"""Explicit constants and exponent bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

RHO = math.sqrt(3) / math.pi - 1 / 3


@dataclass(frozen=True)
class RhoResult:
    value: float
    defect: float  # value - closed form


def _rho_integrand(theta: np.ndarray) -> np.ndarray:
    return np.maximum(1.0, 2.0 + 2.0 * np.cos(theta))


def compute_rho(panels: int = 4096) -> RhoResult:
    """Mean of ``max(1, |1 + e^{i t}|^2)`` over the circle, minus 2.

    Composite Simpson on the three pieces cut at ``t = +-2 pi / 3``, where
    ``|1 + e^{i t}|^2 = 1`` and the integrand has its kinks.
    """
    if panels < 64:
        raise ValueError(f"panels must be >= 64, got {panels}")
    cuts = (-math.pi, -2 * math.pi / 3, 2 * math.pi / 3, math.pi)
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        m = max(2, 2 * round(panels * (b - a) / (4 * math.pi)))
        t = np.linspace(a, b, m + 1)
        total += simpson(_rho_integrand(t), x=t)
    value = total / (2 * math.pi) - 2.0
    value = float(value)
    return RhoResult(value, value - RHO)


def kappa(r: int) -> float:
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    k = np.arange(r)
    return float(np.maximum(1.0, 2.0 + 2.0 * np.cos(2 * np.pi * k / r)).sum() / r)


@dataclass(frozen=True)
class ExponentParams:
    y: float
    rho: float
    m: float
    nexp: float
    kappa_r: float | None = None

    @property
    def thm11_exponent(self) -> float:
        """Upper-bound exponent ``max(y-1, (rho+2)y-2, 3y-3)``."""
        return self.nexp - 2

    @property
    def crossover(self) -> float:
        return 1 / (1 - self.rho)


def m_exponent(y: float, rho: float = RHO) -> float:
    return max(3 * y - 1, (rho + 2) * y)


def exponent_params(y: float, r: int | None = None, rho: float = RHO) -> ExponentParams:
    if y <= 0:
        raise ValueError(f"y must be positive, got {y}")
    m = m_exponent(y, rho)
    return ExponentParams(y, rho, m, max(y + 1, m), kappa(r) if r else None)


def lower_exponent_nonprincipal(y: float) -> float:
    """Lower exponent when ``chi1 * conj(chi2)`` is not principal."""
    return max(y - 1, 3 * y - 3)


def lower_exponent_principal(y: float) -> float:
    """Lower exponent when ``chi1 = chi2``."""
    return max(y - 1, 5 * y - 4)


def mathcal_L(x: float) -> float:
    if x < 16:
        raise ValueError(f"x must be >= 16, got {x}")
    l2 = math.log(math.log(x))
    return math.exp(math.sqrt(l2 * math.log(l2)))


def mathcal_L1(sigma: float) -> float:
    if not 0 < sigma <= 0.1:
        raise ValueError(f"sigma must lie in (0, 1/10], got {sigma}")
    l1 = math.log(1 / sigma)
    return math.exp(math.sqrt(l1 * math.log(l1)))
