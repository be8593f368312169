"""Dirichlet characters with exact root-of-unity values.

A character mod q is stored as a table of exponents: ``exponents[a]`` is
``k`` when ``chi(a) = exp(2 i pi k / r)`` with ``r`` the order of the
character, and ``-1`` when ``gcd(a, q) > 1``.  Complex numbers only
appear at evaluation time.

Characters are built from the structure of ``(Z/qZ)*``: one cyclic
generator per odd prime power (its least primitive root), ``-1`` for
``4 || q`` and ``(-1, 5)`` for ``2^k || q`` with ``k >= 3``.  A character
is the exponent vector ``(k_1, ..., k_m)`` with ``chi(g_j) =
exp(2 i pi k_j / s_j)``; labels enumerate these vectors in lexicographic
order, so ``"q:0"`` is always the principal character.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import gcd, lcm

import numpy as np

ZERO = -1


def _factor(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _primitive_root(p: int, e: int) -> int:
    pe = p**e
    phi = pe - pe // p
    prime_divs = [r for r, _ in _factor(phi)]
    for g in range(2, pe):
        if g % p and all(pow(g, phi // r, pe) != 1 for r in prime_divs):
            return g
    raise AssertionError(f"no primitive root mod {p}^{e}")


@dataclass(frozen=True)
class _Component:
    modulus: int  # prime power p^e
    generators: tuple[int, ...]  # generators mod p^e
    orders: tuple[int, ...]
    logs: np.ndarray  # shape (p^e, len(generators)); -1 off the unit group


def _component(p: int, e: int) -> _Component:
    pe = p**e
    if p == 2 and e == 1:
        return _Component(pe, (), (), np.zeros((2, 0), dtype=np.int64))
    if p == 2 and e == 2:
        gens, orders = (3,), (2,)
    elif p == 2:
        gens, orders = (pe - 1, 5), (2, pe // 4)
    else:
        gens, orders = (_primitive_root(p, e),), (pe - pe // p,)
    logs = np.full((pe, len(gens)), -1, dtype=np.int64)
    # enumerate the group as products of generator powers
    for ks in itertools.product(*(range(s) for s in orders)):
        a = 1
        for g, k in zip(gens, ks):
            a = a * pow(g, k, pe) % pe
        if logs[a, 0] != -1:
            raise AssertionError(f"generators {gens} mod {pe} are not independent")
        logs[a] = ks
    if (logs[:, 0] >= 0).sum() != pe - pe // p:
        raise AssertionError(f"generators {gens} do not span (Z/{pe}Z)*")
    return _Component(pe, gens, orders, logs)


@dataclass(frozen=True)
class _GroupData:
    modulus: int
    orders: tuple[int, ...]  # s_j for each generator, in label order
    logs: np.ndarray  # shape (q, m): discrete log vector of each residue, -1 rows off group
    coprime: np.ndarray  # bool mask of the unit group


@lru_cache(maxsize=256)
def _group(q: int) -> _GroupData:
    comps = [_component(p, e) for p, e in _factor(q)]
    residues = np.arange(q, dtype=np.int64)
    cols = []
    orders: list[int] = []
    for c in comps:
        local = c.logs[residues % c.modulus]
        cols.append(local)
        orders.extend(c.orders)
    if cols:
        logs = np.concatenate(cols, axis=1)
    else:
        logs = np.zeros((q, 0), dtype=np.int64)
    coprime = np.array([gcd(int(a), q) == 1 for a in residues])
    logs[~coprime] = -1
    return _GroupData(q, tuple(orders), logs, coprime)


@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character mod ``modulus`` as an exponent table."""

    modulus: int
    order: int
    exponents: tuple[int, ...]
    conductor: int
    label: int

    @cached_property
    def table(self) -> np.ndarray:
        """Complex values indexed by residue (0 off the unit group)."""
        ex = np.asarray(self.exponents, dtype=np.int64)
        out = np.zeros(self.modulus, dtype=np.complex128)
        on = ex >= 0
        out[on] = _roots_of_unity(self.order)[ex[on]]
        return out

    @cached_property
    def exponent_array(self) -> np.ndarray:
        return np.asarray(self.exponents, dtype=np.int64)

    @property
    def spec(self) -> str:
        return f"{self.modulus}:{self.label}"

    def __call__(self, n: int) -> complex:
        return complex(self.table[n % self.modulus])

    def values(self, ns) -> np.ndarray:
        """Vectorized evaluation on an integer array."""
        return self.table[np.asarray(ns, dtype=np.int64) % self.modulus]

    def __repr__(self) -> str:
        return (f"DirichletCharacter({self.spec}, order={self.order}, "
                f"conductor={self.conductor})")


@lru_cache(maxsize=64)
def _roots_of_unity(r: int) -> np.ndarray:
    k = np.arange(r)
    z = np.exp(2j * np.pi * k / r)
    # exact values on the real and imaginary axes
    for kk in range(r):
        if (4 * kk) % r == 0:
            z[kk] = (1, 1j, -1, -1j)[(4 * kk // r) % 4]
    return z


def _build(q: int, ks: tuple[int, ...], label: int) -> DirichletCharacter:
    g = _group(q)
    if g.orders:
        big = lcm(*g.orders)
        order = lcm(*(s // gcd(s, k) for s, k in zip(g.orders, ks)))
        weights = np.array([k * (big // s) for s, k in zip(g.orders, ks)], dtype=np.int64)
        ex_big = (g.logs @ weights) % big
        ex = ex_big // (big // order)
    else:
        order = 1
        ex = np.zeros(q, dtype=np.int64)
    ex = np.where(g.coprime, ex, ZERO)
    exps = tuple(int(v) for v in ex)
    return DirichletCharacter(q, order, exps, _conductor(q, exps), label)


def _conductor(q: int, exps: tuple[int, ...]) -> int:
    ex = np.asarray(exps)
    for f in sorted(d for d in range(1, q + 1) if q % d == 0):
        a = np.arange(1, q + 1, f) % q
        vals = ex[a]
        on = vals != ZERO
        if np.all(vals[on] == 0):
            return f
    raise AssertionError("the modulus always induces the character")


def characters_mod(q: int) -> list[DirichletCharacter]:
    """All ``phi(q)`` characters mod ``q`` in label order."""
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    orders = _group(q).orders
    return [_build(q, ks, i)
            for i, ks in enumerate(itertools.product(*(range(s) for s in orders)))]


def character(q: int, index: int) -> DirichletCharacter:
    """The character labelled ``index`` mod ``q`` (no full enumeration)."""
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    orders = _group(q).orders
    total = 1
    for s in orders:
        total *= s
    if not 0 <= index < total:
        raise ValueError(f"label {index} out of range for modulus {q} ({total} characters)")
    ks = []
    rest = index
    for s in reversed(orders):
        rest, k = divmod(rest, s)
        ks.append(k)
    return _build(q, tuple(reversed(ks)), index)


def parse_character(spec: str) -> DirichletCharacter:
    """Parse ``"q:index"``; ``"1:0"`` is the all-ones weight."""
    try:
        q_s, i_s = spec.split(":")
        q, i = int(q_s), int(i_s)
    except ValueError:
        raise ValueError(f"bad character spec {spec!r}, expected 'q:index'") from None
    return character(q, i)


def is_principal(chi: DirichletCharacter) -> bool:
    return chi.order == 1


def conjugate(chi: DirichletCharacter) -> DirichletCharacter:
    ex = tuple(e if e == ZERO else (-e) % chi.order for e in chi.exponents)
    return _identify(chi.modulus, ex, chi.order)


def product(chi1: DirichletCharacter, chi2: DirichletCharacter) -> DirichletCharacter:
    """Pointwise product, as a character mod ``lcm(q1, q2)``."""
    q = lcm(chi1.modulus, chi2.modulus)
    big = lcm(chi1.order, chi2.order)
    a = np.arange(q)
    e1 = chi1.exponent_array[a % chi1.modulus]
    e2 = chi2.exponent_array[a % chi2.modulus]
    ex = (e1 * (big // chi1.order) + e2 * (big // chi2.order)) % big
    ex = np.where((e1 == ZERO) | (e2 == ZERO), ZERO, ex)
    on = ex != ZERO
    order = big // gcd(big, *(int(v) for v in np.unique(ex[on])))
    ex = np.where(on, ex // (big // order), ZERO)
    return _identify(q, tuple(int(v) for v in ex), order)


def _identify(q: int, exps: tuple[int, ...], order: int) -> DirichletCharacter:
    """Find the label of an exponent table among the characters mod q."""
    g = _group(q)
    if not g.orders:
        return _build(q, (), 0)
    ex = np.asarray(exps)
    # chi(g_j) determines k_j; generator residues have log vector e_j
    ks = []
    for j, s in enumerate(g.orders):
        target = np.zeros(len(g.orders), dtype=np.int64)
        target[j] = 1
        res = int(np.flatnonzero((g.logs == target).all(axis=1))[0])
        # chi(g_j) = zeta_order^ex[res] = zeta_s^k
        num = int(ex[res]) * s
        if num % order:
            raise AssertionError("exponent table is not a character mod q")
        ks.append((num // order) % s)
    label = 0
    for s, k in zip(g.orders, ks):
        label = label * s + k
    chi = _build(q, tuple(ks), label)
    if chi.exponents != exps:
        raise AssertionError("exponent table is not a character mod q")
    return chi
