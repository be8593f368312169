"""Exact values and suprema of the twisted Delta functions.

Every supremum over window positions reduces to a finite maximum: the set
of divisors ``{d | n : u < log d <= u + v}`` with ``0 <= v <= 1`` is either
empty or a contiguous run of divisors (in increasing order) whose log-span
is strictly below 1, and every such run is achievable.  The pair ``(1, 1)``
alone already gives modulus 1, so the empty run never wins.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .characters import DirichletCharacter
from .sieve import FactoredInteger

TIE_TOL = 1e-9
WITNESS_EPS = 1e-6
BRUTE_MAX_TAU = 96
MAX_K = 64


class OracleScopeError(ValueError):
    """The brute-force oracle refuses inputs beyond its size guard."""


def _tol(x: float) -> float:
    return 1e-12 * max(1.0, abs(x))


@dataclass(frozen=True)
class WindowRun:
    """Divisor ranks ``lo..hi`` (inclusive) with ``span = L[hi] - L[lo] < 1``."""

    lo: int
    hi: int
    span: float

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    def key(self) -> tuple[int, int]:
        return (self.lo, self.hi)


EMPTY = WindowRun(0, -1, 0.0)


@dataclass(frozen=True)
class DeltaResult:
    value: float
    arg_u: tuple[float, ...]
    arg_v: tuple[float, ...]
    runs: tuple[WindowRun, ...]


def window_runs(logdivs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All non-empty runs as ``(lo, hi)`` arrays, in lexicographic order."""
    t = len(logdivs)
    ends = np.searchsorted(logdivs, logdivs + 1.0, side="left") - 1
    counts = ends - np.arange(t) + 1
    lo = np.repeat(np.arange(t), counts)
    start = np.repeat(np.cumsum(counts) - counts, counts)
    hi = lo + (np.arange(len(lo)) - start)
    return lo, hi


def _runs_py(L: list[float]) -> list[tuple[int, int]]:
    out = []
    for lo in range(len(L)):
        hi = lo
        while hi < len(L) and L[hi] - L[lo] < 1.0:
            out.append((lo, hi))
            hi += 1
    return out


def run_witness(L: np.ndarray, lo: int, hi: int) -> tuple[float, float]:
    """A point ``(u, v)`` whose window holds exactly divisors ``lo..hi``."""
    span = float(L[hi] - L[lo])
    eps = WITNESS_EPS
    if lo > 0:
        eps = min(eps, (L[lo] - L[lo - 1]) / 2)
    if hi + 1 < len(L):
        eps = min(eps, (L[hi + 1] - L[hi]) / 2)
    eps = min(eps, (1.0 - span) / 2)
    return float(L[lo] - eps), span + 2 * eps


def _make_run(L, lo, hi) -> WindowRun:
    return WindowRun(int(lo), int(hi), float(L[hi] - L[lo]))


def window_ranks(L, u: float, v: float) -> tuple[int, int]:
    """Ranks ``lo..hi`` of divisors with ``u < log d <= u + v``."""
    lo = bisect_right(L, u + _tol(u))
    top = u + v
    hi = bisect_right(L, top + _tol(top)) - 1
    return lo, hi


class DivisorPairTable:
    """Grid ``chi1(d_i) chi2(d_j) [d_i d_j | n]`` with 2D prefix sums."""

    def __init__(self, fi: FactoredInteger, chi1: DirichletCharacter,
                 chi2: DirichletCharacter):
        self.fi = fi
        self.chi1 = chi1
        self.chi2 = chi2
        d = fi.divisor_array
        self.c1 = chi1.values(d)
        self.c2 = chi2.values(d)
        mask = (fi.n % np.multiply.outer(d, d)) == 0
        self.grid = np.where(mask, np.multiply.outer(self.c1, self.c2), 0)
        t = fi.tau
        self.prefix = np.zeros((t + 1, t + 1), dtype=np.complex128)
        self.prefix[1:, 1:] = self.grid.cumsum(axis=0).cumsum(axis=1)

    def rect(self, i1: int, i2: int, j1: int, j2: int) -> complex:
        """Inclusive rectangle sum; empty ranges give 0."""
        if i1 > i2 or j1 > j2:
            return 0j
        P = self.prefix
        return complex(P[i2 + 1, j2 + 1] - P[i1, j2 + 1] - P[i2 + 1, j1] + P[i1, j1])

    def rects(self, lo1, hi1, lo2, hi2) -> np.ndarray:
        """All rectangle sums for run lists on each axis, shape (R1, R2)."""
        P = self.prefix
        a, b = hi1 + 1, lo1
        c, d = hi2 + 1, lo2
        return (P[np.ix_(a, c)] - P[np.ix_(b, c)] - P[np.ix_(a, d)] + P[np.ix_(b, d)])

    @cached_property
    def total(self) -> complex:
        return complex(self.prefix[-1, -1])


def delta3_at(fi: FactoredInteger, chi1, chi2, u, v, table: DivisorPairTable | None = None) -> complex:
    if not (0.0 <= v[0] <= 1.0 and 0.0 <= v[1] <= 1.0):
        raise ValueError(f"window lengths must lie in [0, 1], got {v}")
    table = table or DivisorPairTable(fi, chi1, chi2)
    L = fi.logdivs
    lo1, hi1 = window_ranks(L, u[0], v[0])
    lo2, hi2 = window_ranks(L, u[1], v[1])
    return table.rect(lo1, hi1, lo2, hi2)


def _first_near_max(absvals: np.ndarray) -> int:
    m = absvals.max()
    return int(np.flatnonzero(absvals >= m - TIE_TOL)[0])


def delta3_sup(fi: FactoredInteger, chi1, chi2, table: DivisorPairTable | None = None) -> DeltaResult:
    table = table or DivisorPairTable(fi, chi1, chi2)
    L = fi.logdivs
    lo, hi = window_runs(L)
    vals = np.abs(table.rects(lo, hi, lo, hi))
    flat = _first_near_max(vals.ravel())
    r1, r2 = divmod(flat, len(lo))
    u1, v1 = run_witness(L, lo[r1], hi[r1])
    u2, v2 = run_witness(L, lo[r2], hi[r2])
    return DeltaResult(float(vals.max()), (u1, u2), (v1, v2),
                       (_make_run(L, lo[r1], hi[r1]), _make_run(L, lo[r2], hi[r2])))


def delta3_sup_value(fi: FactoredInteger, chi1, chi2) -> float:
    """Just the supremum; the hot path of moment scans."""
    table = DivisorPairTable(fi, chi1, chi2)
    lo, hi = window_runs(fi.logdivs)
    return float(np.abs(table.rects(lo, hi, lo, hi)).max())


def delta3_sup_bruteforce(fi: FactoredInteger, chi1, chi2, samples: int = 64,
                          seed: int = 0) -> DeltaResult:
    """Independent oracle: direct summation per run pair, no prefix sums.

    Also evaluates the window sum at ``samples`` random points ``(u, v)``
    and raises if any of them exceeds the reported supremum.
    """
    if fi.tau > BRUTE_MAX_TAU:
        raise OracleScopeError(f"tau({fi.n}) = {fi.tau} exceeds brute-force guard {BRUTE_MAX_TAU}")
    n, divs = fi.n, list(fi.divisors)
    L = [math.log(d) for d in divs]
    runs = _runs_py(L)

    def window_sum(r1, r2) -> complex:
        s = 0j
        for i in range(r1[0], r1[1] + 1):
            for j in range(r2[0], r2[1] + 1):
                if n % (divs[i] * divs[j]) == 0:
                    s += chi1(divs[i]) * chi2(divs[j])
        return s

    vals = {}
    for r1 in runs:
        for r2 in runs:
            vals[r1, r2] = abs(window_sum(r1, r2))
    best = max(vals.values())
    arg = next(k for k in vals if vals[k] >= best - TIE_TOL)  # dict keeps lexicographic order

    rng = random.Random(seed)
    top = L[-1] + 0.5
    for _ in range(samples):
        u = (rng.uniform(-1.0, top), rng.uniform(-1.0, top))
        v = (rng.random(), rng.random())
        r = []
        for ui, vi in zip(u, v):
            ids = [i for i, x in enumerate(L) if ui < x <= ui + vi]
            r.append((ids[0], ids[-1]) if ids else None)
        if None in r:
            continue
        if abs(window_sum(*r)) > best + TIE_TOL:
            raise AssertionError(f"sample {u}, {v} exceeds the reported sup for n={n}")

    Ls = np.asarray(L)
    (a1, b1), (a2, b2) = arg
    u1, v1 = run_witness(Ls, a1, b1)
    u2, v2 = run_witness(Ls, a2, b2)
    return DeltaResult(best, (u1, u2), (v1, v2), (_make_run(Ls, a1, b1), _make_run(Ls, a2, b2)))


def delta_char(fi: FactoredInteger, chi) -> DeltaResult:
    """One-window analogue: max over runs of ``|sum chi(d)|``."""
    L = fi.logdivs
    c = chi.values(fi.divisor_array)
    pre = np.concatenate(([0], np.cumsum(c)))
    lo, hi = window_runs(L)
    vals = np.abs(pre[hi + 1] - pre[lo])
    i = _first_near_max(vals)
    u, v = run_witness(L, lo[i], hi[i])
    return DeltaResult(float(vals.max()), (u,), (v,), (_make_run(L, lo[i], hi[i]),))


def delta_char_at(fi: FactoredInteger, chi, u: float, v: float) -> complex:
    lo, hi = window_ranks(fi.logdivs, u, v)
    return complex(sum(chi(d) for d in fi.divisors[lo:hi + 1]))


def delta_star(fi: FactoredInteger, chi) -> float:
    return max(delta_char(fi.divisor(d), chi).value for d in fi.divisors)


def tau_twisted(fi: FactoredInteger, chi, theta: float) -> complex:
    c = chi.values(fi.divisor_array)
    return complex(np.sum(c * np.exp(1j * theta * fi.logdivs)))


def tau_twisted2(fi: FactoredInteger, chi1, chi2, theta1: float, theta2: float,
                 table: DivisorPairTable | None = None) -> complex:
    table = table or DivisorPairTable(fi, chi1, chi2)
    L = fi.logdivs
    return complex(np.exp(1j * theta1 * L) @ table.grid @ np.exp(1j * theta2 * L))


# --- the weighted function with a polynomial factor ------------------------

def _k_coeffs(fi: FactoredInteger, chi1, chi2, theta: float,
              table: DivisorPairTable | None = None) -> np.ndarray:
    """``c_d = chi1(d) tau(n/d, chi2, theta)`` for every divisor ``d``."""
    table = table or DivisorPairTable(fi, chi1, chi2)
    return table.grid @ np.exp(1j * theta * fi.logdivs)


def _check_k(k: int):
    if not 0 <= k <= MAX_K:
        raise ValueError(f"k must lie in [0, {MAX_K}], got {k}")


def delta_k_at(fi: FactoredInteger, chi1, chi2, theta: float, k: int, u: float,
               v1: float, v2: float, table: DivisorPairTable | None = None) -> complex:
    _check_k(k)
    if not (0.0 <= v1 <= 1.0 and 0.0 <= v2 <= 1.0):
        raise ValueError(f"window lengths must lie in [0, 1], got {(v1, v2)}")
    c = _k_coeffs(fi, chi1, chi2, theta, table)
    L = fi.logdivs
    lo, hi = window_ranks(L, u, v1)
    if lo > hi:
        return 0j
    w = u + v1 - v2
    return complex(np.sum(c[lo:hi + 1] * (w - L[lo:hi + 1]) ** k))


def _run_w_interval(L: np.ndarray, lo: int, hi: int) -> tuple[float, float]:
    """Closure of the values of ``w = u + v1 - v2`` whose window is ``lo..hi``."""
    nxt = L[hi + 1] if hi + 1 < len(L) else math.inf
    return float(L[hi] - 1.0), float(min(nxt, L[lo] + 1.0))


def _poly_in_shift(c: np.ndarray, L: np.ndarray, a: float, k: int) -> np.ndarray:
    """Coefficients (ascending) of ``sum c_d (w - L_d)^k`` in powers of ``w - a``."""
    off = a - L
    binom = np.array([math.comb(k, j) for j in range(k + 1)], dtype=float)
    powers = off[None, :] ** (k - np.arange(k + 1))[:, None]
    return binom * (powers @ c)


def _maximize_sq(p: np.ndarray, length: float, grid_step: float | None = None) -> tuple[float, float]:
    """Max of ``|P(t)|^2`` over ``t`` in ``[0, length]``; returns ``(t, |P|^2)``."""
    k = len(p) - 1
    pv = np.polynomial.polynomial
    if k == 0:
        return 0.0, float(abs(p[0]) ** 2)
    dp = pv.polyder(p)
    # |P|^2 has derivative 2 Re(conj(P) P'); g below is half of it
    g = np.real(pv.polymul(np.conj(p), dp))
    cands = [0.0, length]
    ts = np.linspace(0.0, length, 64 * (k + 1) + 1)
    gs = pv.polyval(ts, g)
    idx = np.flatnonzero(np.sign(gs[:-1]) * np.sign(gs[1:]) < 0)
    if len(idx):
        a, b = ts[idx], ts[idx + 1]
        ga = gs[idx]
        while np.max(b - a) > 1e-10:
            m = (a + b) / 2
            gm = pv.polyval(m, g)
            same = np.sign(gm) == np.sign(ga)
            a = np.where(same, m, a)
            ga = np.where(same, gm, ga)
            b = np.where(same, b, m)
        cands.extend(((a + b) / 2).tolist())
    cands.extend(ts[gs == 0].tolist())
    g_trim = np.trim_zeros(g, "b")
    if len(g_trim) > 1:
        for r in np.roots(g_trim[::-1]):
            if abs(r.imag) < 1e-9 and 0.0 <= r.real <= length:
                cands.append(float(r.real))
    if grid_step:
        cands.extend(np.arange(0.0, length, grid_step).tolist())
    cands = np.asarray(cands)
    vals = np.abs(pv.polyval(cands, p)) ** 2
    i = int(np.argmax(vals))
    return float(cands[i]), float(vals[i])


def delta_k_sup(fi: FactoredInteger, chi1, chi2, theta: float, k: int,
                grid_step: float | None = None, table: DivisorPairTable | None = None) -> DeltaResult:
    """Sup over ``(u, v1, v2)`` of ``|delta_k_at|``.

    With ``w = u + v1 - v2`` the sum over a fixed run of ``d1`` is a
    polynomial of degree ``k`` in ``w``; each run admits a closed interval
    of ``w`` (see ``_run_w_interval``), on which ``|P(w)|^2`` is maximized
    at endpoints or critical points.  ``grid_step`` adds a dense grid of
    extra candidates, for audits.
    """
    _check_k(k)
    table = table or DivisorPairTable(fi, chi1, chi2)
    c = _k_coeffs(fi, chi1, chi2, theta, table)
    L = fi.logdivs
    lo, hi = window_runs(L)
    vals, ws = np.empty(len(lo)), np.empty(len(lo))
    for r in range(len(lo)):
        a, b = _run_w_interval(L, lo[r], hi[r])
        sl = slice(lo[r], hi[r] + 1)
        p = _poly_in_shift(c[sl], L[sl], a, k)
        t, vals[r] = _maximize_sq(p, b - a, grid_step)
        ws[r] = a + t
    r = _first_near_max(vals)
    val, w = float(vals.max()), float(ws[r])
    rlo, rhi = int(lo[r]), int(hi[r])
    u, v1, v2 = _k_witness(L, rlo, rhi, w)
    return DeltaResult(math.sqrt(val), (u,), (v1, v2), (_make_run(L, rlo, rhi),))


def _k_witness(L: np.ndarray, lo: int, hi: int, w: float) -> tuple[float, float, float]:
    nxt = L[hi + 1] if hi + 1 < len(L) else math.inf
    s_max = min(nxt, L[lo] + 1.0)
    delta = min(1e-10, (s_max - L[hi]) / 4)
    s = min(max(w, L[hi] + delta), s_max - delta)
    v2 = s - w
    if v2 < 0:
        v2 = 0.0
    elif v2 > 1:
        v2 = 1.0
    lower = max(L[lo - 1] if lo > 0 else -math.inf, s - 1.0)
    u = float((lower + L[lo]) / 2)
    return u, float(s - u), float(v2)


# --- recurrence audit -----------------------------------------------------

@dataclass(frozen=True)
class RecurrenceAudit:
    n: int
    p: int
    points: int
    max_defect: float
    max_defect_literal: float


def audit_recurrence_delta3(fi: FactoredInteger, p: int, chi1, chi2, samples: int = 1000,
                            seed: int = 0) -> RecurrenceAudit:
    """Check the prime-step identity for the two-window sum at many points.

    The shifted form is ``D(np; u, v) = D(n; u, v) + chi1(p) D(n; u1 - log p, u2, v)
    + chi2(p) D(n; u1, u2 - log p, v)``; the literal form, which omits the
    shift in the last term, is reported alongside.
    """
    if fi.n % p == 0:
        raise ValueError(f"p={p} divides n={fi.n}")
    fnp = fi.times_prime(p)
    t_n = DivisorPairTable(fi, chi1, chi2)
    t_np = DivisorPairTable(fnp, chi1, chi2)
    lp = math.log(p)
    cp1, cp2 = chi1(p), chi2(p)
    rng = np.random.default_rng(seed)
    top = float(fnp.logdivs[-1]) + 0.5
    pts = [(rng.uniform(-1.0, top, 2), rng.random(2)) for _ in range(samples)]
    for x in fnp.logdivs:
        for h in (-1e-7, 1e-7):
            v = rng.random(2)
            other = rng.uniform(-1.0, top)
            for base in (x + h, x - v[0] + h):
                pts.append((np.array([base, other]), v))
                pts.append((np.array([other, base]), v))
    worst = worst_lit = 0.0
    for u, v in pts:
        u, v = tuple(map(float, u)), tuple(map(float, v))
        lhs = delta3_at(fnp, chi1, chi2, u, v, t_np)
        a = delta3_at(fi, chi1, chi2, u, v, t_n)
        b = delta3_at(fi, chi1, chi2, (u[0] - lp, u[1]), v, t_n)
        c_shift = delta3_at(fi, chi1, chi2, (u[0], u[1] - lp), v, t_n)
        worst = max(worst, abs(lhs - (a + cp1 * b + cp2 * c_shift)))
        worst_lit = max(worst_lit, abs(lhs - (a + cp1 * b + cp2 * a)))
    return RecurrenceAudit(fi.n, p, len(pts), worst, worst_lit)
