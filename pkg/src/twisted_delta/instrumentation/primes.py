"""Averages over primes of the local factors that drive the moment bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sieve import FactorSieve


@dataclass(frozen=True)
class TwistedAverage:
    mean: complex
    modulus: float
    count: int


def _primes(sieve: FactorSieve, x: int) -> np.ndarray:
    if x > sieve.limit:
        raise ValueError(f"x={x} exceeds the sieve limit {sieve.limit}")
    p = sieve.primes(x)
    if len(p) == 0:
        raise ValueError(f"no primes up to {x}")
    return p


def prime_average(sieve: FactorSieve, x: int, chi, theta: float) -> float:
    """``(1/pi(x)) sum_{p <= x} max(1, |1 + chi(p) p^{i theta}|^2)``."""
    p = _primes(sieve, x)
    z = chi.values(p) * np.exp(1j * theta * np.log(p))
    return float(np.maximum(1.0, np.abs(1 + z) ** 2).mean())


def prime_twisted_average(sieve: FactorSieve, x: int, chi, theta: float) -> TwistedAverage:
    """``(1/pi(x)) sum_{p <= x} chi(p) p^{i theta}``."""
    p = _primes(sieve, x)
    m = complex(np.mean(chi.values(p) * np.exp(1j * theta * np.log(p))))
    return TwistedAverage(m, abs(m), len(p))


def local_factor_mean(sieve: FactorSieve, x: int, chi1, chi2, theta1: float, theta2: float) -> float:
    """Mean over primes of ``|1 + chi1(p) p^{i t1} + chi2(p) p^{i t2}|^2``.

    This is the prime coefficient of the Euler product of
    ``mu^2(n) |tau(n, chi, t)|^2``; it tends to 3 when ``chi1 conj(chi2)``
    is not principal (and the phases are generic) and to 5 when
    ``chi1 = chi2`` and ``t1 = t2 = 0`` with ``chi1`` real.
    """
    p = _primes(sieve, x)
    lp = np.log(p)
    z = 1 + chi1.values(p) * np.exp(1j * theta1 * lp) + chi2.values(p) * np.exp(1j * theta2 * lp)
    return float(np.mean(np.abs(z) ** 2))
