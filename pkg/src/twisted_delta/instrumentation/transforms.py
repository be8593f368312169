"""Fourier-side quantities: weighted integrals of twisted divisor sums and
the two Parseval identities.

Every integrand here is ``|sum_P a_P e^{i theta L_P}|^2`` against an even
weight, so each integral collapses to ``sum_{P,P'} a_P conj(a_P') I(L_P - L_P')``
with ``I`` the cosine transform of the weight.  ``I`` is computed by
composite Simpson on ``[-Theta, Theta]`` plus the exact tail of the
weight's ``c / t^2`` leading term; the closed forms below serve as
independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as P
from scipy.integrate import simpson
from scipy.special import sici

from ..delta import DivisorPairTable, _k_coeffs, _poly_in_shift, window_runs
from ..sieve import FactoredInteger
from .moments import DEFAULT_QUAD, QuadratureSpec, _neighbors


@dataclass(frozen=True)
class QuadValue:
    value: float
    tail_bound: float


def theta_nodes(quad: QuadratureSpec) -> np.ndarray:
    T = quad.theta_cutoff
    m = 2 * math.ceil(T * quad.panels)
    return np.linspace(-T, T, m + 1)


def cosine_transform(weight: np.ndarray, theta: np.ndarray, omegas: np.ndarray,
                     chunk: int = 64) -> np.ndarray:
    """``int cos(omega t) weight(t) dt`` over the node span, per omega."""
    out = np.empty(len(omegas))
    for s in range(0, len(omegas), chunk):
        om = omegas[s:s + chunk, None]
        out[s:s + chunk] = simpson(np.cos(om * theta[None, :]) * weight[None, :], x=theta, axis=1)
    return out


def _pair_sum(a: np.ndarray, L: np.ndarray, transform) -> float:
    """``sum a_P conj(a_P') I(L_P - L_P')`` with ``I`` evaluated on unique gaps."""
    diff = np.round(np.abs(L[:, None] - L[None, :]), 13)
    uniq, inv = np.unique(diff, return_inverse=True)
    I = transform(uniq)[inv.reshape(diff.shape)]
    return float(np.real(np.conj(a) @ (I @ a)))


def _lorentz(theta: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + theta**2)


def lorentz_transform(omegas, quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """``int_R cos(omega t) / (1 + t^2) dt``: Simpson on the cutoff interval
    plus the exact tail of ``1 / t^2``; what is left out is at most
    ``2 / (3 Theta^3)``.
    """
    th = theta_nodes(quad)
    om = np.asarray(omegas, float)
    return cosine_transform(_lorentz(th), th, om) + _cos_over_sq_tail(om, quad.theta_cutoff)


def _lorentz_tail(quad: QuadratureSpec) -> float:
    return 2 / (3 * quad.theta_cutoff**3)


def _grid_pairs(table: DivisorPairTable):
    i, j = np.nonzero(table.grid)
    return table.grid[i, j], i, j


def tau_hat_1(fi: FactoredInteger, chi1, chi2, theta: float, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadValue:
    """``int |tau(n, chi, t, theta)|^2 dt / (1 + t^2)``."""
    _check_cutoff(quad)
    table = DivisorPairTable(fi, chi1, chi2)
    a, i, j = _grid_pairs(table)
    L = fi.logdivs
    diff = np.round(np.abs(L[i][:, None] - L[i][None, :]), 13)
    uniq, inv = np.unique(diff, return_inverse=True)
    I1 = lorentz_transform(uniq, quad)[inv.reshape(diff.shape)]
    ph = np.exp(1j * theta * (L[j][:, None] - L[j][None, :]))
    val = float(np.real(np.conj(a) @ ((I1 * ph.T) @ a)))
    return QuadValue(val, fi.tau3**2 * _lorentz_tail(quad))


def tau_hat_2(fi: FactoredInteger, chi1, chi2, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadValue:
    """``int_{R^2} |tau(n, chi, t1, t2)|^2 / ((1 + t1^2)(1 + t2^2)) dt``."""
    _check_cutoff(quad)
    table = DivisorPairTable(fi, chi1, chi2)
    a, i, j = _grid_pairs(table)
    L = fi.logdivs
    d1 = np.round(np.abs(L[i][:, None] - L[i][None, :]), 13)
    d2 = np.round(np.abs(L[j][:, None] - L[j][None, :]), 13)
    uniq, inv = np.unique(np.concatenate((d1.ravel(), d2.ravel())), return_inverse=True)
    I = lorentz_transform(uniq, quad)[inv]
    I1, I2 = I[: d1.size].reshape(d1.shape), I[d1.size:].reshape(d2.shape)
    val = float(np.real(np.conj(a) @ ((I1 * I2) @ a)))
    # each factor is off by at most the Lorentz remainder and bounded by pi
    e = _lorentz_tail(quad)
    return QuadValue(val, fi.tau3**2 * (2 * math.pi * e + e * e))


def tau_hat_0(fi: FactoredInteger, chi, q: int, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadValue:
    """``(sum_{d|n} (int |tau(d, chi, t)|^2 dt / (1 + t^2))^q)^{1/q}``."""
    _check_cutoff(quad)
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    parts, tail = [], 0.0
    for d in fi.divisors:
        fd = fi.divisor(d)
        a = chi.values(fd.divisor_array)
        parts.append(_pair_sum(a, fd.logdivs, lambda om: lorentz_transform(om, quad)) ** q)
        tail += fd.tau**2 * _lorentz_tail(quad)
    return QuadValue(math.fsum(parts) ** (1 / q), tail)


def _check_cutoff(quad: QuadratureSpec):
    if quad.theta_cutoff < 10:
        raise ValueError(f"theta cutoff must be >= 10, got {quad.theta_cutoff}")


# closed forms: int e^{i w t} / (1 + t^2) dt = pi e^{-|w|}

def tau_hat_1_closed(fi: FactoredInteger, chi1, chi2, theta: float) -> float:
    table = DivisorPairTable(fi, chi1, chi2)
    a, i, j = _grid_pairs(table)
    L = fi.logdivs
    K = math.pi * np.exp(-np.abs(L[i][:, None] - L[i][None, :]))
    ph = np.exp(1j * theta * (L[j][None, :] - L[j][:, None]))
    return float(np.real(np.conj(a) @ ((K * ph) @ a)))


def tau_hat_2_closed(fi: FactoredInteger, chi1, chi2) -> float:
    table = DivisorPairTable(fi, chi1, chi2)
    a, i, j = _grid_pairs(table)
    L = fi.logdivs
    K = math.pi**2 * np.exp(-np.abs(L[i][:, None] - L[i][None, :]) - np.abs(L[j][:, None] - L[j][None, :]))
    return float(np.real(np.conj(a) @ (K @ a)))


def tau_hat_0_closed(fi: FactoredInteger, chi, q: int) -> float:
    parts = []
    for d in fi.divisors:
        fd = fi.divisor(d)
        a = chi.values(fd.divisor_array)
        K = math.pi * np.exp(-np.abs(fd.logdivs[:, None] - fd.logdivs[None, :]))
        parts.append(float(np.real(np.conj(a) @ (K @ a))) ** q)
    return math.fsum(parts) ** (1 / q)


# --- the two-window Parseval identity --------------------------------------

def G_kernel(theta) -> np.ndarray:
    """``int_0^1 4 sin^2(v t / 2) / t^2 dv = (2 / t^2)(1 - sin t / t)``."""
    t = np.asarray(theta, dtype=float)
    small = np.abs(t) < 0.1  # series error below 1e-15 there; avoids cancellation
    ts = np.where(small, 1.0, t)
    big = (2 / ts**2) * (1 - np.sin(ts) / ts)
    t2 = t * t
    series = 1 / 3 - t2 / 60 + t2**2 / 2520 - t2**3 / 181440 + t2**4 / 19958400
    return np.where(small, series, big)


def _cos_over_sq_tail(omega: np.ndarray, T: float) -> np.ndarray:
    """``int_{|t| > T} cos(omega t) / t^2 dt``."""
    om = np.abs(np.asarray(omega, dtype=float))
    si, _ = sici(om * T)
    return 2 * (np.cos(om * T) / T - om * (math.pi / 2 - si))


def G_transform(omegas: np.ndarray, quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """``int_R cos(omega t) G(t) dt``: Simpson on the cutoff interval plus
    the exact tail of the leading ``2 / t^2`` term.  The neglected part is
    at most ``2 / Theta^2``.
    """
    th = theta_nodes(quad)
    body = cosine_transform(G_kernel(th), th, np.asarray(omegas, float))
    return body + 2 * _cos_over_sq_tail(omegas, quad.theta_cutoff)


def G_transform_closed(omegas) -> np.ndarray:
    return math.pi * np.maximum(0.0, 1 - np.abs(np.asarray(omegas, float))) ** 2


@dataclass(frozen=True)
class ParsevalResult:
    lhs: float
    rhs: float
    rel_defect: float
    tail_bound: float


def _rel(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def parseval_delta3(fi: FactoredInteger, chi1, chi2, quad: QuadratureSpec = DEFAULT_QUAD) -> ParsevalResult:
    """``int |D3|^2 du dv`` against ``(1/4 pi^2) int |tau|^2 G(t1) G(t2) dt``."""
    from .moments import moment_M2q

    table = DivisorPairTable(fi, chi1, chi2)
    lhs = moment_M2q(fi, chi1, chi2, 1, QuadratureSpec(scheme="exact"), table)
    a, i, j = _grid_pairs(table)
    L = fi.logdivs
    d1 = np.round(np.abs(L[i][:, None] - L[i][None, :]), 13)
    d2 = np.round(np.abs(L[j][:, None] - L[j][None, :]), 13)
    uniq, inv = np.unique(np.concatenate((d1.ravel(), d2.ravel())), return_inverse=True)
    I = G_transform(uniq, quad)[inv]
    I1, I2 = I[: d1.size].reshape(d1.shape), I[d1.size:].reshape(d2.shape)
    rhs = float(np.real(np.conj(a) @ ((I1 * I2) @ a))) / (4 * math.pi**2)
    # |tau|^2 <= tau3^2 and |int G| <= pi; remainder of each factor <= 2 / Theta^2
    tail = fi.tau3**2 * 2 * (math.pi + 1) * 2 / quad.theta_cutoff**2 / (4 * math.pi**2)
    return ParsevalResult(lhs, rhs, _rel(lhs, rhs), tail)


# --- the one-window identity with polynomial weight --------------------------

def kernel_K(theta: np.ndarray, k: int, v1: float, v2: float) -> np.ndarray:
    """``int_{-v1}^0 (s + v1 - v2)^k e^{-i s theta} ds``."""
    th = np.asarray(theta, dtype=float)
    out = np.empty(th.shape, dtype=complex)
    small = np.abs(th) < 1.0
    if small.any():
        x, w = legendre.leggauss(k + 12)
        s = -v1 * (x + 1) / 2
        vals = (s + v1 - v2) ** k * w * v1 / 2
        out[small] = np.exp(-1j * np.outer(th[small], s)) @ vals
    big = ~small
    if big.any():
        al = -1j * th[big]
        acc = np.zeros(al.shape, dtype=complex)
        e = np.exp(-al * v1)  # e^{alpha s} at s = -v1
        for m in range(k + 1):
            c = math.perm(k, m)
            top = c * (v1 - v2) ** (k - m)
            bot = c * (-v2) ** (k - m)
            acc += (-1) ** m * (top - e * bot) / al ** (m + 1)
        out[big] = acc
    return out


def _lhs_1d(fi: FactoredInteger, c: np.ndarray, k: int, v1: float, v2: float) -> float:
    L = fi.logdivs
    lo, hi = window_runs(L)
    prev, nxt = _neighbors(L, lo, hi)
    total = []
    for r in range(len(lo)):
        a = max(L[hi[r]] - v1, prev[r])
        b = min(L[lo[r]], nxt[r] - v1)
        if b <= a:
            continue
        sl = slice(lo[r], hi[r] + 1)
        p = _poly_in_shift(c[sl], L[sl], 0.0, k)
        Qi = P.polyint(np.real(P.polymul(p, np.conj(p))))
        total.append(P.polyval(b + v1 - v2, Qi) - P.polyval(a + v1 - v2, Qi))
    return math.fsum(total)


def parseval_1d(fi: FactoredInteger, chi1, chi2, theta: float, k: int, v1: float, v2: float,
                quad: QuadratureSpec = DEFAULT_QUAD) -> ParsevalResult:
    """``int |D^(k)(u, v1, v2)|^2 du`` against ``(1/2 pi) int |f^(t)|^2 dt``,
    ``f^(t) = tau(n, chi, -t, theta) K(t)``.
    """
    if not (0 <= v1 <= 1 and 0 <= v2 <= 1):
        raise ValueError(f"window lengths must lie in [0, 1], got {(v1, v2)}")
    c = _k_coeffs(fi, chi1, chi2, theta)
    L = fi.logdivs
    lhs = _lhs_1d(fi, c, k, v1, v2)
    th = theta_nodes(quad)
    T = np.exp(-1j * np.outer(th, L)) @ c
    body = simpson(np.abs(T) ** 2 * np.abs(kernel_K(th, k, v1, v2)) ** 2, x=th)
    # leading asymptotics |K|^2 ~ (A^2 + B^2 - 2AB cos(v1 t)) / t^2 beyond the cutoff
    A, B = (v1 - v2) ** k, (-v2) ** k
    D = L[:, None] - L[None, :]
    cc = np.real(c[:, None] * np.conj(c)[None, :])
    Tc = quad.theta_cutoff
    tail = ((A * A + B * B) * _cos_over_sq_tail(D, Tc)
            - A * B * (_cos_over_sq_tail(D + v1, Tc) + _cos_over_sq_tail(D - v1, Tc)))
    rhs = (body + float(np.sum(cc * tail))) / (2 * math.pi)
    bound = float(np.sum(np.abs(c))) ** 2 * (k + 2) ** 2 * 2 / Tc / (2 * math.pi)
    return ParsevalResult(lhs, float(rhs), _rel(lhs, float(rhs)), bound)
