"""Exact moment integrals of the window sums, and the C / D suprema.

For a fixed window length ``v`` the content of ``(u, u + v]`` is the run
``lo..hi`` exactly when

    max(L[hi] - v, L[lo-1]) <= u < min(L[lo], L[hi+1] - v),

so the u-measure of each run is a piecewise-linear function of ``v`` whose
kinks sit at ``v`` in ``{L[hi]-L[lo], L[hi+1]-L[lo], L[hi]-L[lo-1],
L[hi+1]-L[lo-1]}``.  Splitting ``[0, 1]`` at those kinks makes every
v-integral below a polynomial integral, computed exactly by Gauss-Legendre.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as P
from scipy.integrate import simpson

from ..delta import DivisorPairTable, _k_coeffs, _poly_in_shift, window_ranks, window_runs
from ..sieve import FactoredInteger


@dataclass(frozen=True)
class QuadratureSpec:
    theta_cutoff: float = 200.0
    panels: int = 64  # Simpson panels per unit length
    scheme: str = "exact"  # v-integrals: "exact" or "simpson"
    mc_samples: int = 100_000

    def __post_init__(self):
        if self.theta_cutoff <= 0 or self.panels < 1 or self.mc_samples < 1:
            raise ValueError(f"invalid quadrature settings {self}")
        if self.scheme not in ("exact", "simpson"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    samples: int


def _neighbors(L: np.ndarray, lo, hi):
    ext = np.concatenate(([-np.inf], L, [np.inf]))
    return ext[np.asarray(lo)], ext[np.asarray(hi) + 2]


def run_u_measure(L: np.ndarray, lo, hi, v) -> np.ndarray:
    """u-measure of ``{u : window (u, u+v] holds exactly lo..hi}``."""
    prev, nxt = _neighbors(L, lo, hi)
    a = np.maximum(L[hi] - v, prev)
    b = np.minimum(L[lo], nxt - v)
    return np.maximum(0.0, b - a)


def _run_kinks(L: np.ndarray, lo, hi) -> np.ndarray:
    """Sorted breakpoints in ``[0, 1]`` per run, shape ``(R, 6)``."""
    prev, nxt = _neighbors(L, lo, hi)
    k = np.stack([np.zeros(len(lo)), np.ones(len(lo)), L[hi] - L[lo],
                  nxt - L[lo], L[hi] - prev, nxt - prev], axis=1)
    return np.sort(np.clip(k, 0.0, 1.0), axis=1)


def run_measure_integrals(L: np.ndarray, lo, hi, quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """``A_R = int_0^1 m_R(v) dv`` for every run."""
    if quad.scheme == "simpson":
        m = 2 * max(1, (quad.panels + 1) // 2)
        v = np.linspace(0.0, 1.0, m + 1)
        vals = run_u_measure(L, np.asarray(lo)[:, None], np.asarray(hi)[:, None], v[None, :])
        return simpson(vals, x=v, axis=1)
    k = _run_kinks(L, lo, hi)
    mid = (k[:, 1:] + k[:, :-1]) / 2
    width = k[:, 1:] - k[:, :-1]
    lo2, hi2 = np.asarray(lo)[:, None], np.asarray(hi)[:, None]
    return (run_u_measure(L, lo2, hi2, mid) * width).sum(axis=1)


# --- second moments --------------------------------------------------------

def moment_M2q(fi: FactoredInteger, chi1, chi2, q: int, quad: QuadratureSpec = DEFAULT_QUAD,
               table: DivisorPairTable | None = None) -> float:
    """``int_{[0,1]^2} int_{R^2} |D3(u, v)|^{2q} du dv``.

    The window contents on the two axes vary independently, so the
    integral factors as ``sum_{R1,R2} |S(R1,R2)|^{2q} A_{R1} A_{R2}``.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    table = table or DivisorPairTable(fi, chi1, chi2)
    L = fi.logdivs
    lo, hi = window_runs(L)
    A = run_measure_integrals(L, lo, hi, quad)
    vals = np.abs(table.rects(lo, hi, lo, hi)) ** (2 * q)
    return float(A @ vals @ A)


def moment_M2_closed(fi: FactoredInteger, chi1, chi2) -> float:
    """Closed form of the q = 1 moment over pairs of grid entries."""
    table = DivisorPairTable(fi, chi1, chi2)
    i, j = np.nonzero(table.grid)
    a = table.grid[i, j]
    L = fi.logdivs
    d1 = np.abs(L[i][:, None] - L[i][None, :])
    d2 = np.abs(L[j][:, None] - L[j][None, :])
    w = (np.maximum(0, 1 - d1) ** 2 / 2) * (np.maximum(0, 1 - d2) ** 2 / 2)
    return float(np.real(np.conj(a) @ (w @ a)))


def moment_M2q_1d(fi: FactoredInteger, chi, q: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_0^1 int_R |sum_{u < log d <= u+v} chi(d)|^{2q} du dv``."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    L = fi.logdivs
    lo, hi = window_runs(L)
    pre = np.concatenate(([0], np.cumsum(chi.values(fi.divisor_array))))
    vals = np.abs(pre[hi + 1] - pre[lo]) ** (2 * q)
    return float(vals @ run_measure_integrals(L, lo, hi, quad))


def moment_M2q_dagger(fi: FactoredInteger, chi, q: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return math.fsum(moment_M2q_1d(fi.divisor(d), chi, q, quad) for d in fi.divisors)


def moment_M1h(fi: FactoredInteger, h: int) -> float:
    """``int_R (number of divisors in (u, u+1])^h du``."""
    L = fi.logdivs
    lo, hi = window_runs(L)
    return float(((hi - lo + 1.0) ** h) @ run_u_measure(L, lo, hi, 1.0))


def moment_Mj(fi: FactoredInteger, chi1, chi2, theta: float, j: int, q: int,
              table: DivisorPairTable | None = None) -> float:
    """``int_{[0,1]^2} int_R |D^(j)(u, v1, v2)|^{2q} du dv1 dv2``, exactly.

    On a run the integrand is ``|P(w)|^{2q}`` with ``w = u + v1 - v2`` and
    ``P`` of degree ``j``; integrating over ``u`` leaves a polynomial of
    degree ``2qj + 1`` in ``(v1, v2)`` on each kink-free piece of ``v1``.
    """
    if q < 1 or j < 0:
        raise ValueError(f"need q >= 1 and j >= 0, got q={q}, j={j}")
    table = table or DivisorPairTable(fi, chi1, chi2)
    c = _k_coeffs(fi, chi1, chi2, theta, table)
    L = fi.logdivs
    lo, hi = window_runs(L)
    prev, nxt = _neighbors(L, lo, hi)
    kinks = _run_kinks(L, lo, hi)
    x, w = legendre.leggauss(q * j + 1)
    v2, w2 = (x + 1) / 2, w / 2
    total = []
    for r in range(len(lo)):
        sl = slice(lo[r], hi[r] + 1)
        center = float(L[hi[r]] - 1.0)
        p = _poly_in_shift(c[sl], L[sl], center, j)
        Qi = P.polyint(P.polypow(np.real(P.polymul(p, np.conj(p))), q))
        for a, b in zip(kinks[r, :-1], kinks[r, 1:]):
            if b <= a:
                continue
            if run_u_measure(L, lo[r], hi[r], (a + b) / 2) <= 0:
                continue
            v1 = a + (b - a) * (x + 1) / 2
            lo_u = np.maximum(L[hi[r]] - v1, prev[r])
            hi_u = np.minimum(L[lo[r]], nxt[r] - v1)
            shift = (v1[:, None] - v2[None, :]) - center
            F = P.polyval(hi_u[:, None] + shift, Qi) - P.polyval(lo_u[:, None] + shift, Qi)
            total.append((b - a) / 2 * (w @ F @ w2))
    return math.fsum(total)


# --- the u1-integral and the C / D suprema ----------------------------------

def _overlap_form(b: np.ndarray, L: np.ndarray, v1) -> np.ndarray:
    """``sum_{i,i'} b_i conj(b_i') max(0, v1 - |L_i - L_i'|)`` per column of ``b``."""
    K = np.maximum(0.0, np.asarray(v1)[..., None, None] - np.abs(L[:, None] - L[None, :]))
    return np.real(np.einsum("ir,...ik,kr->...r", np.conj(b), K, b))


def integral_sq_u1(fi: FactoredInteger, chi1, chi2, u2: float, v, table: DivisorPairTable | None = None) -> float:
    """``int_R |D3(u1, u2, v)|^2 du1`` for fixed ``(u2, v)``."""
    table = table or DivisorPairTable(fi, chi1, chi2)
    L = fi.logdivs
    lo, hi = window_ranks(L, u2, v[1])
    if lo > hi:
        return 0.0
    b = table.grid[:, lo:hi + 1].sum(axis=1)
    return float(_overlap_form(b[:, None], L, v[0])[0])


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: tuple[float, ...]
    grid_value: float | None = None
    exhaustive: bool = True


def _column_run_sums(table: DivisorPairTable, lo, hi) -> np.ndarray:
    cum = np.concatenate((np.zeros((table.grid.shape[0], 1)), table.grid.cumsum(axis=1)), axis=1)
    return cum[:, hi + 1] - cum[:, lo]


def C_of(fi: FactoredInteger, chi1, chi2, grid: int = 50) -> SupResult:
    """Sup over ``(u2, v1, v2)`` of the exact u1-integral.

    Only the window-2 content matters through ``(u2, v2)``, and the
    integral is piecewise linear in ``v1`` with kinks at the log-gaps, so
    the maximum runs over window-2 runs and ``v1`` in
    ``{0, 1} | {|log(d/d')| < 1}``.  A ``grid**3`` search over the raw
    parameters must not beat it.
    """
    table = DivisorPairTable(fi, chi1, chi2)
    L = fi.logdivs
    lo, hi = window_runs(L)
    B = _column_run_sums(table, lo, hi)
    gaps = np.abs(L[:, None] - L[None, :]).ravel()
    v1s = np.unique(np.concatenate(([0.0, 1.0], gaps[gaps < 1])))
    vals = _overlap_form(B, L, v1s)  # (len(v1s), R)
    iv, ir = np.unravel_index(int(np.argmax(vals)), vals.shape)
    best = float(vals[iv, ir])
    u2, v2 = float(L[lo[ir]] - 1e-9), float(min(1.0, L[hi[ir]] - L[lo[ir]] + 2e-9))
    gval = None
    if grid:
        gval = _C_grid(table, L, grid)
        if gval > best + 1e-9:
            raise AssertionError(f"grid search beats the exact C for n={fi.n}: {gval} > {best}")
    return SupResult(best, (u2, float(v1s[iv]), v2), gval)


def _C_grid(table: DivisorPairTable, L: np.ndarray, m: int) -> float:
    us = np.linspace(L[0] - 1.0, L[-1], m)
    vs = np.linspace(0.0, 1.0, m)
    pairs = {window_ranks(L, u, v) for u in us for v in vs}
    pairs = sorted(p for p in pairs if p[0] <= p[1])
    lo = np.array([p[0] for p in pairs])
    hi = np.array([p[1] for p in pairs])
    B = _column_run_sums(table, lo, hi)
    return float(_overlap_form(B, L, vs).max())


def _pairs(table: DivisorPairTable, L: np.ndarray):
    i, j = np.nonzero(table.grid)
    a = table.grid[i, j]
    return L[i], L[j], np.real(np.conj(a)[:, None] * a[None, :])


def D_value(fi: FactoredInteger, chi1, chi2, u, v1: float, v2: float,
            table: DivisorPairTable | None = None) -> np.ndarray:
    """``int_R |D3(u - u1, u1, v)|^2 du1`` for an array of ``u``."""
    table = table or DivisorPairTable(fi, chi1, chi2)
    return _D_eval(*_pairs(table, fi.logdivs), np.atleast_1d(np.asarray(u, float)), v1, v2)


def _D_eval(Li, Lj, W, u, v1, v2, chunk=4096) -> np.ndarray:
    # u1 ranges over (max(u - Li, Lj - v2), min(u - Li + v1, Lj)]
    out = np.empty(len(u))
    for s in range(0, len(u), chunk):
        uu = u[s:s + chunk, None]
        lo = np.maximum(uu - Li, Lj - v2)
        hi = np.minimum(uu - Li + v1, Lj)
        ov = np.maximum(0.0, np.minimum(hi[:, :, None], hi[:, None, :])
                        - np.maximum(lo[:, :, None], lo[:, None, :]))
        out[s:s + chunk] = np.einsum("upq,pq->u", ov, W)
    return out


D_EXHAUSTIVE_MAX_TAU = 4


def D_of(fi: FactoredInteger, chi1, chi2, grid: int = 50) -> SupResult:
    """Sup over ``(u, v1, v2)`` of the exact u1-integral of the sheared sum.

    The integral is continuous and piecewise linear in ``(u, v1, v2)``,
    with kinks on the planes ``u + a.v = s`` (``a`` in ``{0,1}^2``, ``s`` a
    log of a divisor of ``n^2``) and ``v_i = const``, so its maximum sits
    on a vertex of that arrangement.  The full vertex set is enumerated
    when ``tau(n) <= 4``; beyond that the search uses ``v`` in
    ``{0, 1} | {log(d/d') < 1}`` per axis with all u-breakpoints, and the
    result is flagged as not exhaustive.
    """
    table = DivisorPairTable(fi, chi1, chi2)
    L = fi.logdivs
    Li, Lj, W = _pairs(table, L)
    S = np.unique(np.round(np.add.outer(L, L).ravel(), 12))
    exhaustive = fi.tau <= D_EXHAUSTIVE_MAX_TAU
    verts = _D_vertices(S) if exhaustive else _D_axis_candidates(L)
    alphas = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
    best, arg = -1.0, (0.0, 0.0, 0.0)
    for v1, v2 in verts:
        us = (S[:, None] - alphas @ np.array([v1, v2])).ravel()
        vals = _D_eval(Li, Lj, W, us, v1, v2)
        i = int(np.argmax(vals))
        if vals[i] > best + 1e-12:
            best, arg = float(vals[i]), (float(us[i]), float(v1), float(v2))
    gval = None
    if grid:
        vs = np.linspace(0.0, 1.0, grid)
        us = np.linspace(-2.0, 2 * L[-1], grid)
        gval = max(float(_D_eval(Li, Lj, W, us, a, b).max()) for a in vs for b in vs)
        if exhaustive and gval > best + 1e-9:
            raise AssertionError(f"grid search beats the exact D for n={fi.n}: {gval} > {best}")
    return SupResult(best, arg, gval, exhaustive)


def _D_axis_candidates(L: np.ndarray):
    gaps = np.abs(L[:, None] - L[None, :]).ravel()
    vs = np.unique(np.concatenate(([0.0, 1.0], gaps[gaps < 1])))
    return list(itertools.product(vs, vs))


def _D_vertices(S: np.ndarray):
    """Pairwise intersections in ``[0,1]^2`` of the lines ``c.v = kappa``."""
    kap = np.unique(np.round(np.subtract.outer(S, S).ravel(), 12))
    kap = kap[np.abs(kap) <= 2.0]
    lines = []  # (c1, c2, kappa)
    for c in ((1, 0), (0, 1), (1, 1), (1, -1)):
        for k in kap:
            lines.append((c[0], c[1], float(k)))
    for k in (0.0, 1.0):
        lines += [(1, 0, k), (0, 1, k)]
    lines = sorted(set(lines))
    out = set()
    for (a1, b1, k1), (a2, b2, k2) in itertools.combinations(lines, 2):
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        x = (k1 * b2 - k2 * b1) / det
        y = (a1 * k2 - a2 * k1) / det
        if -1e-12 <= x <= 1 + 1e-12 and -1e-12 <= y <= 1 + 1e-12:
            out.add((round(min(max(x, 0.0), 1.0), 12), round(min(max(y, 0.0), 1.0), 12)))
    return sorted(out)


# --- Monte Carlo cross-checks ----------------------------------------------

def _mc(values: np.ndarray, volume: float) -> MCEstimate:
    vals = values * volume
    return MCEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals))), len(vals))


def _rect_many(table: DivisorPairTable, L, u1, v1, u2, v2) -> np.ndarray:
    def ranks(u, v):
        lo = np.searchsorted(L, u + 1e-12 * np.maximum(1, np.abs(u)), side="right")
        top = u + v
        hi = np.searchsorted(L, top + 1e-12 * np.maximum(1, np.abs(top)), side="right") - 1
        return lo, hi
    lo1, hi1 = ranks(u1, v1)
    lo2, hi2 = ranks(u2, v2)
    Pf = table.prefix
    lo1c, hi1c = np.minimum(lo1, hi1 + 1), hi1
    lo2c, hi2c = np.minimum(lo2, hi2 + 1), hi2
    s = Pf[hi1c + 1, hi2c + 1] - Pf[lo1c, hi2c + 1] - Pf[hi1c + 1, lo2c] + Pf[lo1c, lo2c]
    return np.where((lo1 <= hi1) & (lo2 <= hi2), s, 0)


def mc_moment_M2q(fi: FactoredInteger, chi1, chi2, q: int, samples: int = 100_000, seed: int = 0) -> MCEstimate:
    table = DivisorPairTable(fi, chi1, chi2)
    L = fi.logdivs
    rng = np.random.default_rng(seed)
    a, b = L[0] - 1.0, L[-1]
    u = rng.uniform(a, b, (2, samples))
    v = rng.random((2, samples))
    vals = np.abs(_rect_many(table, L, u[0], v[0], u[1], v[1])) ** (2 * q)
    return _mc(vals, (b - a) ** 2)


def mc_integral_sq_u1(fi: FactoredInteger, chi1, chi2, u2: float, v, samples: int = 100_000,
                      seed: int = 0) -> MCEstimate:
    table = DivisorPairTable(fi, chi1, chi2)
    L = fi.logdivs
    rng = np.random.default_rng(seed)
    a, b = L[0] - 1.0, L[-1]
    u1 = rng.uniform(a, b, samples)
    vals = np.abs(_rect_many(table, L, u1, np.full(samples, v[0]), np.full(samples, u2),
                             np.full(samples, v[1]))) ** 2
    return _mc(vals, b - a)


def mc_moment_1d(fi: FactoredInteger, chi, q: int, samples: int = 100_000, seed: int = 0) -> MCEstimate:
    L = fi.logdivs
    pre = np.concatenate(([0], np.cumsum(chi.values(fi.divisor_array))))
    rng = np.random.default_rng(seed)
    a, b = L[0] - 1.0, L[-1]
    u = rng.uniform(a, b, samples)
    v = rng.random(samples)
    lo = np.searchsorted(L, u, side="right")
    hi = np.searchsorted(L, u + v, side="right") - 1
    vals = np.where(lo <= hi, np.abs(pre[np.maximum(hi, lo - 1) + 1] - pre[lo]), 0.0) ** (2 * q)
    return _mc(vals, b - a)

