"""Slow, independent reference computations used by the tests."""

import math


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def window_candidates(n):
    """(u, v) pairs hitting every nonempty divisor set of a window
    ``u < log d <= u + v`` with ``0 <= v <= 1``."""
    L = [math.log(d) for d in divisors(n)]
    out = []
    for a in L:
        for b in L:
            if a <= b < a + 1:
                out.append((a - 1e-9, min(1.0, b - a + 2e-9)))
    return out


def delta3_direct(n, chi1, chi2, u, v):
    s = 0j
    ds = divisors(n)
    for d1 in ds:
        if not u[0] < math.log(d1) <= u[0] + v[0]:
            continue
        for d2 in ds:
            if u[1] < math.log(d2) <= u[1] + v[1] and n % (d1 * d2) == 0:
                s += chi1(d1) * chi2(d2)
    return s


def delta3_oracle(n, chi1, chi2):
    cands = window_candidates(n)
    return max(abs(delta3_direct(n, chi1, chi2, (a[0], b[0]), (a[1], b[1])))
               for a in cands for b in cands)


def delta1_oracle(n, chi):
    best = 0.0
    for u, v in window_candidates(n):
        s = sum(chi(d) for d in divisors(n) if u < math.log(d) <= u + v)
        best = max(best, abs(s))
    return best


def tau3_direct(n):
    return sum(1 for a in divisors(n) for b in divisors(n // a))
