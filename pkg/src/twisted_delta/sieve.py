"""Smallest-prime-factor sieve and per-integer divisor data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd, isqrt

import numpy as np

DEFAULT_MAX_SIEVE_BYTES = 1 << 30


class SieveResourceError(MemoryError):
    """The requested sieve would exceed the configured memory budget."""


@dataclass(frozen=True, eq=False)
class FactorSieve:
    limit: int
    spf: np.ndarray  # spf[n] for 2 <= n <= limit; spf[0] = spf[1] = 0

    def primes(self, upto: int | None = None) -> np.ndarray:
        upto = self.limit if upto is None else min(upto, self.limit)
        idx = np.arange(upto + 1)
        mask = self.spf[: upto + 1] == idx
        mask[:2] = False
        return np.flatnonzero(mask)


def build_sieve(limit: int, max_bytes: int = DEFAULT_MAX_SIEVE_BYTES) -> FactorSieve:
    """Eratosthenes-style smallest-prime-factor table up to ``limit``."""
    if limit < 2:
        raise ValueError(f"sieve limit must be >= 2, got {limit}")
    dtype = np.int32 if limit < 2**31 - 1 else np.int64
    need = (limit + 1) * np.dtype(dtype).itemsize
    if need > max_bytes:
        raise SieveResourceError(
            f"sieve up to {limit} needs {need} bytes, budget is {max_bytes}")
    spf = np.zeros(limit + 1, dtype=dtype)
    for p in range(2, isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[:2] = 0
    spf.setflags(write=False)
    return FactorSieve(limit, spf)


@dataclass(frozen=True, eq=False)
class FactoredInteger:
    """An integer together with its factorization and sorted divisors."""

    n: int
    factors: tuple[tuple[int, int], ...]
    divisors: tuple[int, ...] = field(repr=False)

    @classmethod
    def from_factors(cls, factors) -> FactoredInteger:
        factors = tuple(sorted((int(p), int(e)) for p, e in factors if e > 0))
        divs = [1]
        for p, e in factors:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        divs.sort()
        n = divs[-1]
        return cls(n, factors, tuple(divs))

    @cached_property
    def divisor_array(self) -> np.ndarray:
        return np.asarray(self.divisors, dtype=np.int64)

    @cached_property
    def logdivs(self) -> np.ndarray:
        return np.log(self.divisor_array.astype(np.float64))

    @property
    def tau(self) -> int:
        return len(self.divisors)

    @property
    def mu2(self) -> bool:
        return all(e == 1 for _, e in self.factors)

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def tau3(self) -> int:
        out = 1
        for _, e in self.factors:
            out *= (e + 1) * (e + 2) // 2
        return out

    def divisor(self, d: int) -> FactoredInteger:
        """Factorization of a divisor ``d`` of ``n``, read off ``factors``."""
        if d < 1 or self.n % d:
            raise ValueError(f"{d} does not divide {self.n}")
        fs = []
        for p, _ in self.factors:
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            fs.append((p, e))
        return FactoredInteger.from_factors(fs)

    def times_prime(self, p: int) -> FactoredInteger:
        fs = dict(self.factors)
        fs[p] = fs.get(p, 0) + 1
        return FactoredInteger.from_factors(fs.items())


def factorize(sieve: FactorSieve, n: int) -> FactoredInteger:
    if n < 1 or n > sieve.limit:
        raise ValueError(f"n={n} outside [1, {sieve.limit}]")
    spf = sieve.spf
    fs: list[tuple[int, int]] = []
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        fs.append((p, e))
    return FactoredInteger.from_factors(fs)


def factor_int(n: int) -> FactoredInteger:
    """Trial-division factorization for one-off integers outside a sieve."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    fs = []
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            fs.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        fs.append((n, 1))
    return FactoredInteger.from_factors(fs)


def E_of(fi: FactoredInteger) -> tuple[float, float]:
    """Least log-gap between divisors, and ``min(1, E)``.

    The minimum over all pairs ``d < d'`` is attained at consecutive
    divisors. ``n = 1`` has no pair: ``E = inf`` and ``E* = 1``.
    """
    if fi.tau < 2:
        return math.inf, 1.0
    e = min(math.log(b / a) for a, b in zip(fi.divisors, fi.divisors[1:]))
    return e, min(1.0, e)


def E_k(fi: FactoredInteger, k: int) -> float:
    return min(math.log(1.5) / (k + 1), E_of(fi)[0])


@dataclass(frozen=True)
class WeightSpec:
    """``g(n) = y^omega(n)``, gated on squarefreeness and coprimality."""

    y: float = 1.0
    coprime_to: int = 1
    squarefree_only: bool = True

    def __post_init__(self):
        if self.y <= 0:
            raise ValueError(f"y must be positive, got {self.y}")
        if self.coprime_to < 1:
            raise ValueError(f"coprime_to must be positive, got {self.coprime_to}")


def weight(ws: WeightSpec, fi: FactoredInteger) -> float:
    if ws.squarefree_only and not fi.mu2:
        return 0.0
    if gcd(fi.n, ws.coprime_to) != 1:
        return 0.0
    return ws.y ** fi.omega
