"""Moment scans over n <= x, exponent fits and the principal contrast."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .characters import conjugate, is_principal, parse_character, product
from .delta import BRUTE_MAX_TAU, delta3_sup_bruteforce, delta3_sup_value, tau_twisted2
from .instrumentation.constants import (exponent_params, lower_exponent_nonprincipal,
                                        lower_exponent_principal)
from .sieve import FactorSieve, WeightSpec, factorize, weight

BLOCK = 1 << 16
SERIES_COLUMNS = ("x", "S", "S_over_x", "norm_lower", "norm_upper", "n_processed", "oracle_checked")


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""


class OracleMismatch(AssertionError):
    """The brute-force oracle disagrees with the fast supremum."""


@dataclass(frozen=True)
class MomentScanConfig:
    x_grid: tuple[int, ...]
    chi1_spec: str
    chi2_spec: str
    y: float = 1.0
    coprime_to: int | None = None  # None: product of the two moduli
    squarefree_only: bool = True
    threads: int = 1
    oracle_fraction: float = 0.0
    seed: int = 0
    allow_principal: bool = False

    def weight_spec(self) -> WeightSpec:
        if self.coprime_to is not None:
            c = self.coprime_to
        else:
            c = parse_character(self.chi1_spec).modulus * parse_character(self.chi2_spec).modulus
        return WeightSpec(self.y, c, self.squarefree_only)

    def canonical(self) -> dict:
        """Everything that determines the output; the thread count does not."""
        ws = self.weight_spec()
        return {"x_grid": [int(x) for x in self.x_grid], "chi1": self.chi1_spec,
                "chi2": self.chi2_spec, "y": repr(float(self.y)), "coprime_to": ws.coprime_to,
                "squarefree_only": ws.squarefree_only,
                "oracle_fraction": repr(float(self.oracle_fraction)), "seed": int(self.seed)}

    def config_hash(self) -> str:
        return config_hash(self.canonical())


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class MomentSeries:
    rows: list[dict]
    meta: dict
    runtime: float = field(default=0.0, compare=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)


@dataclass(frozen=True)
class FitResult:
    model: str
    slope: float
    intercept: float
    r_squared: float
    residuals: tuple[float, ...]
    slope_stderr: float
    n_points: int

    def predict(self, x) -> np.ndarray:
        return self.intercept + self.slope * _fit_design(self.model, np.asarray(x, float))


# --- scan -----------------------------------------------------------------

def _validate(sieve: FactorSieve, cfg: MomentScanConfig):
    xs = list(cfg.x_grid)
    if not xs or any(x < 1 for x in xs) or any(b <= a for a, b in zip(xs, xs[1:])):
        raise ConfigError(f"x grid must be increasing positive integers, got {xs}")
    if xs[-1] > sieve.limit:
        raise ValueError(f"x={xs[-1]} exceeds the sieve limit {sieve.limit}")
    if not 0.0 <= cfg.oracle_fraction <= 1.0:
        raise ConfigError(f"oracle fraction must lie in [0, 1], got {cfg.oracle_fraction}")
    if cfg.threads < 1:
        raise ConfigError(f"threads must be >= 1, got {cfg.threads}")
    chi1, chi2 = parse_character(cfg.chi1_spec), parse_character(cfg.chi2_spec)
    if not cfg.allow_principal and (is_principal(chi1) or is_principal(chi2)):
        raise ConfigError("principal character in a headline scan; pass the override to allow it")
    return chi1, chi2


_WORKER: dict = {}


def _init_worker(sieve: FactorSieve):
    _WORKER["sieve"] = sieve


def _scan_block(args) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    start, stop, chi1_spec, chi2_spec, ws, frac, seed, block_id = args
    sieve = _WORKER["sieve"]
    chi1, chi2 = parse_character(chi1_spec), parse_character(chi2_spec)
    rng = np.random.default_rng([seed, block_id])
    size = stop - start
    terms = np.zeros(size)
    used = np.zeros(size, dtype=bool)
    checked = np.zeros(size, dtype=bool)
    for n in range(start, stop):
        fi = factorize(sieve, n)
        g = weight(ws, fi)
        if g == 0:
            continue
        val = delta3_sup_value(fi, chi1, chi2)
        terms[n - start] = g * val * val
        used[n - start] = True
        if frac > 0 and rng.random() < frac and fi.tau <= BRUTE_MAX_TAU:
            ref = delta3_sup_bruteforce(fi, chi1, chi2, samples=16, seed=n).value
            if abs(ref - val) > 1e-9:
                raise OracleMismatch(f"n={n}: fast sup {val!r} vs brute force {ref!r}")
            checked[n - start] = True
    return terms, used, checked


def _norm(S: float, x: int, e: float) -> float:
    if x < 3:
        return math.nan
    return S / (x * math.log(x) ** e)


def moment_scan(sieve: FactorSieve, cfg: MomentScanConfig) -> MomentSeries:
    """``S(x) = sum_{n <= x} g(n) D3(n, chi)^2`` at every checkpoint.

    Work is cut into fixed blocks of ``BLOCK`` integers; per-n terms are
    kept in n order and each ``S(x)`` is an exactly rounded sum
    (``math.fsum``), so the result does not depend on the thread count.
    """
    t0 = time.perf_counter()
    chi1, chi2 = _validate(sieve, cfg)
    ws = cfg.weight_spec()
    X = cfg.x_grid[-1]
    jobs = [(s, min(s + BLOCK, X + 1), cfg.chi1_spec, cfg.chi2_spec, ws,
             cfg.oracle_fraction, cfg.seed, b)
            for b, s in enumerate(range(1, X + 1, BLOCK))]
    if cfg.threads == 1:
        _init_worker(sieve)
        parts = [_scan_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(cfg.threads, initializer=_init_worker, initargs=(sieve,)) as ex:
            parts = list(ex.map(_scan_block, jobs))
    terms = np.concatenate([p[0] for p in parts])
    used = np.cumsum(np.concatenate([p[1] for p in parts]))
    checked = np.cumsum(np.concatenate([p[2] for p in parts]))

    principal_pair = is_principal(product(chi1, conjugate(chi2)))
    e_low = (lower_exponent_principal if principal_pair else lower_exponent_nonprincipal)(cfg.y)
    e_up = exponent_params(cfg.y).thm11_exponent
    rows = []
    for x in cfg.x_grid:
        S = math.fsum(terms[:x])
        rows.append({"x": int(x), "S": S, "S_over_x": S / x,
                     "norm_lower": _norm(S, x, e_low), "norm_upper": _norm(S, x, e_up),
                     "n_processed": int(used[x - 1]), "oracle_checked": int(checked[x - 1])})
    meta = {"config": cfg.canonical(), "config_hash": cfg.config_hash(),
            "exponent_lower": e_low, "exponent_upper": e_up,
            "principal_product": principal_pair, "oracle_checked": int(checked[-1])}
    return MomentSeries(rows, meta, time.perf_counter() - t0)


# --- fits -----------------------------------------------------------------

FIT_MODELS = ("loglog", "log-linear")


def _fit_design(model: str, x: np.ndarray) -> np.ndarray:
    if model == "loglog":
        return np.log(np.log(x))
    if model == "log-linear":
        return np.log(x)
    raise ValueError(f"unknown fit model {model!r}; expected one of {FIT_MODELS}")


def _fit_response(model: str, x: np.ndarray, S: np.ndarray) -> np.ndarray:
    return np.log(S / x) if model == "loglog" else S / x


def fit_exponent(series: MomentSeries, model: str) -> FitResult:
    """Ordinary least squares of ``log(S/x)`` on ``log log x`` ("loglog")
    or of ``S/x`` on ``log x`` ("log-linear"), over rows with ``x >= 16``."""
    x, S = series.column("x"), series.column("S")
    keep = x >= 16
    x, S = x[keep], S[keep]
    if len(x) < 4:
        raise ValueError(f"need at least 4 rows with x >= 16, got {len(x)}")
    X = _fit_design(model, x)
    Y = _fit_response(model, x, S)
    A = np.column_stack([X, np.ones_like(X)])
    coef, _, rank, _ = np.linalg.lstsq(A, Y, rcond=None)
    if rank < 2:
        raise np.linalg.LinAlgError("degenerate design matrix")
    slope, intercept = float(coef[0]), float(coef[1])
    resid = Y - (intercept + slope * X)
    ss_res = float(resid @ resid)
    ss_tot = float(((Y - Y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = len(x) - 2
    sxx = float(((X - X.mean()) ** 2).sum())
    se = math.sqrt(ss_res / dof / sxx) if dof > 0 else math.nan
    return FitResult(model, slope, intercept, r2, tuple(float(r) for r in resid), se, len(x))


# --- principal versus non-principal ------------------------------------------

@dataclass
class ContrastResult:
    same: MomentSeries  # pair (chi, chi): chi1 conj(chi2) principal
    mixed: MomentSeries  # pair (chi, chi'): chi1 conj(chi2) non-principal
    ratios: list[dict]


def contrast_principal_case(sieve: FactorSieve, x_grid, chi_spec: str, chi_prime_spec: str,
                            y: float = 1.0, threads: int = 1, oracle_fraction: float = 0.0,
                            seed: int = 0) -> ContrastResult:
    chi, chi_p = parse_character(chi_spec), parse_character(chi_prime_spec)
    if is_principal(chi) or is_principal(chi_p):
        raise ConfigError("the contrast needs non-principal characters")
    if is_principal(product(chi, conjugate(chi_p))):
        raise ConfigError(f"{chi_spec} and {chi_prime_spec} must differ on the unit group")
    common = dict(x_grid=tuple(x_grid), y=y, threads=threads,
                  oracle_fraction=oracle_fraction, seed=seed)
    same = moment_scan(sieve, MomentScanConfig(chi1_spec=chi_spec, chi2_spec=chi_spec, **common))
    mixed = moment_scan(sieve, MomentScanConfig(chi1_spec=chi_spec, chi2_spec=chi_prime_spec, **common))
    ratios = [{"x": a["x"], "S_same": a["S"], "S_mixed": b["S"], "ratio": a["S"] / b["S"]}
              for a, b in zip(same.rows, mixed.rows)]
    return ContrastResult(same, mixed, ratios)


# --- the ratio lemma ------------------------------------------------------

def lemma51_ratio_check(fi, chi, theta1: float, theta2: float) -> float | None:
    """``|log(f/g)|`` with ``f = |tau(n, chi, chi, t1, t2)|^2`` and
    ``g = |tau(n, chi, chi, t1, t1)|^2``; ``None`` when either vanishes."""
    f = abs(tau_twisted2(fi, chi, chi, theta1, theta2)) ** 2
    g = abs(tau_twisted2(fi, chi, chi, theta1, theta1)) ** 2
    if f < 1e-300 or g < 1e-300:
        return None
    return abs(math.log(f / g))


@dataclass(frozen=True)
class Lemma51Result:
    x: int
    theta1: float
    theta2: float
    bound: float
    argmax: int
    count: int
    excluded: int


def lemma51_sweep(sieve: FactorSieve, x: int, chi_spec: str, theta1: float = 0.5,
                  c: float = 0.05, c_max: float = 0.1) -> Lemma51Result:
    """Max of ``|log(f/g)|`` over squarefree ``n <= x`` coprime to the
    modulus, with ``theta2 = theta1 + c / log x``."""
    if x < 16:
        raise ConfigError(f"x must be >= 16, got {x}")
    if abs(c) > c_max:
        raise ConfigError(f"|theta1 - theta2| log x = {abs(c)} exceeds the regime bound {c_max}")
    if x > sieve.limit:
        raise ValueError(f"x={x} exceeds the sieve limit {sieve.limit}")
    chi = parse_character(chi_spec)
    theta2 = theta1 + c / math.log(x)
    ws = WeightSpec(1.0, chi.modulus, True)
    best, arg, count, excluded = 0.0, 1, 0, 0
    for n in range(1, x + 1):
        fi = factorize(sieve, n)
        if weight(ws, fi) == 0:
            continue
        r = lemma51_ratio_check(fi, chi, theta1, theta2)
        if r is None:
            excluded += 1
            continue
        count += 1
        if r > best:
            best, arg = r, n
    return Lemma51Result(x, theta1, theta2, best, arg, count, excluded)


# --- export ---------------------------------------------------------------

def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_csv(fh, rows: list[dict], columns):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_cell(r.get(c)) for c in columns])


def export_rows(rows: list[dict], columns, path, fmt: str = "csv", meta: dict | None = None):
    """Write rows as CSV (header, fixed columns, shortest round-trip floats)
    or as JSON ``{"meta": ..., "rows": [...]}``."""
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                write_csv(fh, rows, columns)
        elif fmt == "json":
            doc = {"meta": _jsonable(meta or {}),
                   "rows": [_jsonable({c: r.get(c) for c in columns}) for r in rows]}
            path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
        else:
            raise ConfigError(f"unknown format {fmt!r}; expected csv or json")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def export(obj, path, fmt: str = "csv", meta: dict | None = None):
    """Export a ``MomentSeries`` or a list of audit reports.  ``meta``
    entries are merged into the JSON meta object."""
    if isinstance(obj, MomentSeries):
        export_rows(obj.rows, SERIES_COLUMNS, path, fmt, {**obj.meta, **(meta or {})})
        return
    from .instrumentation.audits import AUDIT_COLUMNS
    export_rows([r.row() for r in obj], AUDIT_COLUMNS, path, fmt, {"kind": "audit", **(meta or {})})


def read_series_csv(path) -> list[dict]:
    ints = {"x", "n_processed", "oracle_checked"}
    with Path(path).open(newline="") as fh:
        return [{k: int(v) if k in ints else float(v) for k, v in row.items()}
                for row in csv.DictReader(fh)]


def series_to_dict(series: MomentSeries) -> dict:
    return {"meta": series.meta, "rows": series.rows}

