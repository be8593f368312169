"""Numerical audits of the sup-versus-moment inequalities and of the two
Parseval identities.  Each audit returns one ``AuditReport`` row."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..delta import (DivisorPairTable, delta3_sup, delta_k_sup, delta_star,
                     tau_twisted)
from ..sieve import E_k, E_of, FactoredInteger
from .moments import DEFAULT_QUAD, QuadratureSpec, moment_M2q, moment_M2q_dagger, moment_Mj
from .transforms import parseval_1d, parseval_delta3

SLACK_TOL = 1e-9
PARSEVAL_TOL = 1e-3
AUDIT_COLUMNS = ("n", "lemma", "q", "k", "theta", "lhs", "rhs", "slack", "pass")


@dataclass(frozen=True)
class AuditReport:
    n: int
    lemma: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    q: int | None = None
    k: int | None = None
    theta: float | None = None

    def row(self) -> dict:
        return {"n": self.n, "lemma": self.lemma, "q": self.q, "k": self.k,
                "theta": self.theta, "lhs": self.lhs, "rhs": self.rhs,
                "slack": self.slack, "pass": self.passed}


def _report(n, lemma, lhs, rhs, **params) -> AuditReport:
    slack = rhs - lhs
    return AuditReport(n, lemma, lhs, rhs, slack, slack >= -SLACK_TOL * max(1.0, abs(rhs)), **params)


def audit_lemma_2_1(fi: FactoredInteger, chi1, chi2, q: int,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> AuditReport:
    """``D3^2 <= 4 E*^{-4/q} M_2q^{1/q} + 32 (D*(chi1)^2 + D*(chi2)^2)``."""
    table = DivisorPairTable(fi, chi1, chi2)
    lhs = delta3_sup(fi, chi1, chi2, table).value ** 2
    estar = E_of(fi)[1]
    M = moment_M2q(fi, chi1, chi2, q, quad, table)
    rhs = (4 * estar ** (-4 / q) * M ** (1 / q)
           + 32 * (delta_star(fi, chi1) ** 2 + delta_star(fi, chi2) ** 2))
    return _report(fi.n, "2.1", lhs, rhs, q=q)


def audit_lemma_2_2(fi: FactoredInteger, chi, q: int,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> AuditReport:
    """``D*^2 <= 4 E*^{-2/q} Mdagger_2q^{1/q} + 4 tau(n)^{1/q}``."""
    lhs = delta_star(fi, chi) ** 2
    estar = E_of(fi)[1]
    rhs = 4 * estar ** (-2 / q) * moment_M2q_dagger(fi, chi, q, quad) ** (1 / q) + 4 * fi.tau ** (1 / q)
    return _report(fi.n, "2.2", lhs, rhs, q=q)


def audit_lemma_2_3(fi: FactoredInteger, chi1, chi2, theta: float, k: int, q: int,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> AuditReport:
    """``D^(k)^2 <= 16 E_k^{-3/q} sum_{j<=k} M^(j)_2q^{1/q} + 64 e^2 max_{d|n} |tau(d, chi2, theta)|^2``."""
    if not 0 <= k <= 8:
        raise ValueError(f"k must lie in [0, 8] for this audit, got {k}")
    if q not in (1, 2, 3):
        raise ValueError(f"q must be 1, 2 or 3 for this audit, got {q}")
    table = DivisorPairTable(fi, chi1, chi2)
    lhs = delta_k_sup(fi, chi1, chi2, theta, k, table=table).value ** 2
    ek = E_k(fi, k)
    moments = math.fsum(moment_Mj(fi, chi1, chi2, theta, j, q, table) ** (1 / q) for j in range(k + 1))
    tmax = max(abs(tau_twisted(fi.divisor(d), chi2, theta)) ** 2 for d in fi.divisors)
    rhs = 16 * ek ** (-3 / q) * moments + 64 * math.e**2 * tmax
    return _report(fi.n, "2.3", lhs, rhs, q=q, k=k, theta=theta)


def _parseval_report(n, lemma, res, tol, **params) -> AuditReport:
    slack = tol * max(abs(res.lhs), abs(res.rhs)) - abs(res.lhs - res.rhs)
    return AuditReport(n, lemma, res.lhs, res.rhs, slack, res.rel_defect < tol, **params)


def audit_parseval_delta3(fi: FactoredInteger, chi1, chi2, quad: QuadratureSpec = DEFAULT_QUAD,
                          tol: float = PARSEVAL_TOL) -> AuditReport:
    """Pass when the relative defect is below ``tol``; slack is measured in
    the same units (``tol * scale - |lhs - rhs|``)."""
    return _parseval_report(fi.n, "parseval3", parseval_delta3(fi, chi1, chi2, quad), tol, q=1)


def audit_parseval_1d(fi: FactoredInteger, chi1, chi2, theta: float, k: int, v1: float, v2: float,
                      quad: QuadratureSpec = DEFAULT_QUAD, tol: float = PARSEVAL_TOL) -> AuditReport:
    res = parseval_1d(fi, chi1, chi2, theta, k, v1, v2, quad)
    return _parseval_report(fi.n, "parseval1d", res, tol, k=k, theta=theta)
