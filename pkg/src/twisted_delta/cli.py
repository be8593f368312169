"""Command-line front end: ``twisted-delta <subcommand> [options]``."""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import delta as dl
from .characters import parse_character
from .experiments import (SERIES_COLUMNS, ConfigError, MomentScanConfig, config_hash,
                          contrast_principal_case, export_rows, fit_exponent, lemma51_sweep,
                          moment_scan, write_csv)
from .instrumentation import audits, constants, primes
from .instrumentation.moments import QuadratureSpec
from .sieve import (DEFAULT_MAX_SIEVE_BYTES, SieveResourceError, WeightSpec, build_sieve,
                    factor_int, factorize, weight)

EXIT_OK, EXIT_AUDIT_FAIL, EXIT_CONFIG = 0, 1, 2
PROG = "twisted-delta"


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=80, max_help_position=30)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _chars(p, chi1="3:1", chi2="5:1"):
    p.add_argument("--chi1", default=chi1, metavar="Q:I",
                   help=f"first character as modulus:label (default {chi1})")
    p.add_argument("--chi2", default=chi2, metavar="Q:I",
                   help=f"second character as modulus:label (default {chi2})")


def _output(p):
    p.add_argument("--out", metavar="PATH", help="write results to PATH instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format (default csv)")


def _quad(p):
    p.add_argument("--panels", type=_positive_int, default=64,
                   help="Simpson panels per unit length (default 64)")
    p.add_argument("--theta-cutoff", type=float, default=200.0,
                   help="truncation of the frequency integrals (default 200)")


def _sieve_opts(p):
    p.add_argument("--max-sieve-bytes", type=int, default=DEFAULT_MAX_SIEVE_BYTES,
                   help=f"memory budget of the factor sieve (default {DEFAULT_MAX_SIEVE_BYTES})")


def _grid_opts(p):
    p.add_argument("--xmax", type=_positive_int, default=1 << 16,
                   help="largest checkpoint (default 65536)")
    p.add_argument("--grid", choices=("pow2", "list"), default="pow2",
                   help="checkpoints: powers of 2 up to --xmax, or the --xs list")
    p.add_argument("--xs", default="", help="comma-separated checkpoints for --grid list")
    p.add_argument("--y", type=float, default=1.0, help="weight y^omega(n) (default 1)")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="worker processes (default 1); results do not depend on it")
    p.add_argument("--oracle-fraction", type=float, default=0.0,
                   help="fraction of n re-checked by the brute-force sup (default 0)")
    p.add_argument("--seed", type=int, default=0, help="seed of the oracle sampling (default 0)")
    _sieve_opts(p)
    _output(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, formatter_class=_formatter,
                     description="Twisted Hooley Delta functions: exact values, "
                                 "moment audits and moment scans.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND",
                                parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, help=help_, description=help_, formatter_class=_formatter)

    p = add("constants", "print rho, the kappa table and the exponents for y")
    p.add_argument("--y", type=float, default=1.0, help="weight parameter y (default 1)")
    p.add_argument("--rmax", type=_positive_int, default=12,
                   help="largest order r >= 2 in the kappa table (default 12)")
    p.add_argument("--panels", type=_positive_int, default=4096,
                   help="Simpson panels for rho (default 4096)")

    p = add("delta3", "two-window supremum of one integer, with a witness window")
    p.add_argument("n", type=_positive_int, help="positive integer")
    _chars(p)

    p = add("delta", "one-window supremum and its max over divisors")
    p.add_argument("n", type=_positive_int, help="positive integer")
    p.add_argument("--chi1", default="3:1", metavar="Q:I",
                   help="character as modulus:label (default 3:1)")

    p = add("deltak", "supremum of the polynomially weighted sum")
    p.add_argument("n", type=_positive_int, help="positive integer")
    _chars(p)
    p.add_argument("--k", type=int, default=1, help="degree of the weight (default 1)")
    p.add_argument("--theta", type=float, default=0.0, help="phase theta (default 0)")

    p = add("scan", "moment scan S(x) over a checkpoint grid, with exponent fits")
    _chars(p)
    _grid_opts(p)
    p.add_argument("--allow-principal", action="store_true",
                   help="allow principal characters in the scan")

    p = add("contrast", "compare the pairs (chi1, chi1) and (chi1, chi2)")
    _chars(p)
    _grid_opts(p)

    p = add("audit", "audit an inequality or identity over a range of n")
    p.add_argument("lemma", choices=("2.1", "2.2", "2.3", "parseval1d", "parseval3",
                                     "recurrence", "lemma51"),
                   help="which audit to run")
    _chars(p)
    p.add_argument("--nmax", type=_positive_int, default=200, help="largest n audited (default 200)")
    p.add_argument("--all-n", action="store_true",
                   help="audit every n, not only squarefree n coprime to the moduli")
    p.add_argument("--q", type=int, nargs="+", default=[2], help="moment orders (default 2)")
    p.add_argument("--k", type=int, nargs="+", default=[0], help="weight degrees (default 0)")
    p.add_argument("--theta", type=float, nargs="+", default=[0.0], help="phases (default 0)")
    p.add_argument("--v1", type=float, default=1.0, help="window length v1 for parseval1d")
    p.add_argument("--v2", type=float, default=1.0, help="window length v2 for parseval1d")
    p.add_argument("--tol", type=float, default=1e-3,
                   help="relative tolerance of the Parseval audits (default 1e-3)")
    p.add_argument("--samples", type=_positive_int, default=1000,
                   help="random points per pair in the recurrence audit (default 1000)")
    p.add_argument("--pairs", type=_positive_int, default=50,
                   help="random (n, p) pairs in the recurrence audit (default 50)")
    p.add_argument("--c", type=float, default=0.05,
                   help="lemma51: theta2 - theta1 = c / log x (default 0.05)")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled audits (default 0)")
    _quad(p)
    _sieve_opts(p)
    _output(p)

    p = add("primes", "averages over primes of the local factors")
    p.add_argument("--chi1", default="3:1", metavar="Q:I",
                   help="character as modulus:label (default 3:1)")
    p.add_argument("--xmax", type=_positive_int, default=10**7, help="prime bound (default 10^7)")
    p.add_argument("--theta", type=float, nargs="+", default=[0.0, 1.0],
                   help="phases (default 0 1)")
    _sieve_opts(p)
    return parser


# --- subcommands ----------------------------------------------------------

_NOT_CONFIG = {"out", "format", "threads", "max_sieve_bytes"}


def run_config(a) -> dict:
    """Canonical form of the parsed arguments; output paths and resource
    knobs do not change results and are left out."""
    cfg = {}
    for k, v in sorted(vars(a).items()):
        if k in _NOT_CONFIG:
            continue
        if isinstance(v, float):
            v = repr(v)
        elif isinstance(v, list):
            v = [repr(x) if isinstance(x, float) else x for x in v]
        cfg[k] = v
    return cfg


def _write(rows, columns, a, meta=None):
    """Rows go to ``--out`` in ``--format``, or as CSV to stdout."""
    if a.out:
        cfg = run_config(a)
        export_rows(rows, columns, a.out, a.format,
                    {**(meta or {}), "run_config": cfg, "run_config_hash": config_hash(cfg)})
    else:
        write_csv(sys.stdout, rows, columns)


def _emit(lines):
    for line in lines:
        print(line)


def cmd_constants(a) -> int:
    r = constants.compute_rho(a.panels)
    ep = constants.exponent_params(a.y)
    _emit([f"rho={r.value!r}", f"rho_defect={r.defect:.3e}",
           f"rho_closed_form={constants.RHO!r}",
           f"y={a.y!r}", f"m={ep.m!r}", f"n_exponent={ep.nexp!r}",
           f"thm11_exponent={ep.thm11_exponent!r}",
           f"lower_exponent_nonprincipal={constants.lower_exponent_nonprincipal(a.y)!r}",
           f"lower_exponent_principal={constants.lower_exponent_principal(a.y)!r}",
           f"crossover_y={ep.crossover!r}"])
    _emit(f"kappa({r})={constants.kappa(r)!r}" for r in range(2, a.rmax + 1))
    return EXIT_OK


def _fmt_run(run) -> str:
    return f"[{run.lo},{run.hi}]"


def cmd_delta3(a) -> int:
    fi = factor_int(a.n)
    c1, c2 = parse_character(a.chi1), parse_character(a.chi2)
    r = dl.delta3_sup(fi, c1, c2)
    divs = fi.divisors
    _emit([f"n={a.n} chi1={a.chi1} chi2={a.chi2}", f"delta3={r.value!r}",
           f"u=({r.arg_u[0]!r}, {r.arg_u[1]!r})", f"v=({r.arg_v[0]!r}, {r.arg_v[1]!r})",
           f"runs={_fmt_run(r.runs[0])} {_fmt_run(r.runs[1])}",
           f"window1={list(divs[r.runs[0].lo:r.runs[0].hi + 1])}",
           f"window2={list(divs[r.runs[1].lo:r.runs[1].hi + 1])}"])
    return EXIT_OK


def cmd_delta(a) -> int:
    fi = factor_int(a.n)
    chi = parse_character(a.chi1)
    r = dl.delta_char(fi, chi)
    _emit([f"n={a.n} chi={a.chi1}", f"delta={r.value!r}", f"u={r.arg_u[0]!r}", f"v={r.arg_v[0]!r}",
           f"window={list(fi.divisors[r.runs[0].lo:r.runs[0].hi + 1])}",
           f"delta_star={dl.delta_star(fi, chi)!r}"])
    return EXIT_OK


def cmd_deltak(a) -> int:
    fi = factor_int(a.n)
    c1, c2 = parse_character(a.chi1), parse_character(a.chi2)
    r = dl.delta_k_sup(fi, c1, c2, a.theta, a.k)
    _emit([f"n={a.n} chi1={a.chi1} chi2={a.chi2} k={a.k} theta={a.theta!r}",
           f"deltak={r.value!r}", f"u={r.arg_u[0]!r}", f"v=({r.arg_v[0]!r}, {r.arg_v[1]!r})",
           f"run={_fmt_run(r.runs[0])}"])
    return EXIT_OK


def _x_grid(a) -> tuple[int, ...]:
    if a.grid == "list":
        try:
            xs = tuple(int(s) for s in a.xs.split(",") if s.strip())
        except ValueError:
            raise ConfigError(f"bad --xs list {a.xs!r}") from None
        if not xs:
            raise ConfigError("--grid list needs --xs")
        return xs
    xs, x = [], 1
    while x <= a.xmax:
        xs.append(x)
        x *= 2
    return tuple(xs)


def _fits(series) -> list[str]:
    out = []
    for model in ("loglog", "log-linear"):
        try:
            f = fit_exponent(series, model)
        except ValueError:
            continue
        out.append(f"fit {model}: slope={f.slope:.6g} +- {f.slope_stderr:.2g} "
                   f"intercept={f.intercept:.6g} r2={f.r_squared:.4f}")
    return out


def cmd_scan(a) -> int:
    xs = _x_grid(a)
    sieve = build_sieve(max(2, xs[-1]), a.max_sieve_bytes)
    cfg = MomentScanConfig(xs, a.chi1, a.chi2, a.y, threads=a.threads,
                           oracle_fraction=a.oracle_fraction, seed=a.seed,
                           allow_principal=a.allow_principal)
    series = moment_scan(sieve, cfg)
    _write(series.rows, SERIES_COLUMNS, a, series.meta)
    for line in _fits(series) + [f"config_hash={series.meta['config_hash']}",
                                 f"oracle_checked={series.meta['oracle_checked']}"]:
        print(line, file=sys.stderr)
    return EXIT_OK


def cmd_contrast(a) -> int:
    xs = _x_grid(a)
    sieve = build_sieve(max(2, xs[-1]), a.max_sieve_bytes)
    res = contrast_principal_case(sieve, xs, a.chi1, a.chi2, a.y, a.threads, a.oracle_fraction, a.seed)
    _write(res.ratios, ("x", "S_same", "S_mixed", "ratio"), a,
           {"same": res.same.meta, "mixed": res.mixed.meta})
    for name, s in (("same", res.same), ("mixed", res.mixed)):
        for line in _fits(s):
            print(f"{name} {line}", file=sys.stderr)
    return EXIT_OK


def _audit_family(a, moduli, sieve):
    ws = WeightSpec(1.0, math.prod(moduli), True)
    for n in range(1, a.nmax + 1):
        fi = factorize(sieve, n)
        if a.all_n or weight(ws, fi) > 0:
            yield fi


def cmd_audit(a) -> int:
    c1, c2 = parse_character(a.chi1), parse_character(a.chi2)
    quad = QuadratureSpec(theta_cutoff=a.theta_cutoff, panels=a.panels)
    if a.lemma == "recurrence":
        return _audit_recurrence(a, c1, c2)
    if a.lemma == "lemma51":
        return _audit_lemma51(a)
    sieve = build_sieve(max(2, a.nmax), a.max_sieve_bytes)
    moduli = (c1.modulus,) if a.lemma == "2.2" else (c1.modulus, c2.modulus)
    reports = []
    for fi in _audit_family(a, moduli, sieve):
        if a.lemma == "2.1":
            reports += [audits.audit_lemma_2_1(fi, c1, c2, q, quad) for q in a.q]
        elif a.lemma == "2.2":
            reports += [audits.audit_lemma_2_2(fi, c1, q, quad) for q in a.q]
        elif a.lemma == "2.3":
            reports += [audits.audit_lemma_2_3(fi, c1, c2, th, k, q, quad)
                        for th in a.theta for k in a.k for q in a.q]
        elif a.lemma == "parseval3":
            reports.append(audits.audit_parseval_delta3(fi, c1, c2, quad, a.tol))
        else:
            reports += [audits.audit_parseval_1d(fi, c1, c2, th, k, a.v1, a.v2, quad, a.tol)
                        for th in a.theta for k in a.k]
    _write([r.row() for r in reports], audits.AUDIT_COLUMNS, a, {"kind": "audit"})
    failed = [r for r in reports if not r.passed]
    min_slack = min((r.slack for r in reports), default=math.nan)
    print(f"audit {a.lemma}: {len(reports)} checks, {len(failed)} failures, "
          f"min slack {min_slack!r}", file=sys.stderr)
    return EXIT_AUDIT_FAIL if failed else EXIT_OK


def _audit_recurrence(a, c1, c2) -> int:
    rng = np.random.default_rng(a.seed)
    small_primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]
    worst = worst_lit = 0.0
    rows = []
    while len(rows) < a.pairs:
        n = int(rng.integers(1, a.nmax + 1))
        p = int(rng.choice(small_primes))
        if n % p == 0:
            continue
        r = dl.audit_recurrence_delta3(factor_int(n), p, c1, c2, a.samples, seed=a.seed + len(rows))
        rows.append({"n": n, "p": p, "points": r.points, "max_defect": r.max_defect,
                     "max_defect_literal": r.max_defect_literal})
        worst, worst_lit = max(worst, r.max_defect), max(worst_lit, r.max_defect_literal)
    _write(rows, ("n", "p", "points", "max_defect", "max_defect_literal"), a, {"kind": "recurrence"})
    print(f"recurrence: max defect {worst!r} (shifted form), {worst_lit!r} (literal form)",
          file=sys.stderr)
    return EXIT_OK if worst < 1e-9 else EXIT_AUDIT_FAIL


def _audit_lemma51(a) -> int:
    rows = []
    for x in (a.nmax, 2 * a.nmax):
        sieve = build_sieve(max(2, x), a.max_sieve_bytes)
        r = lemma51_sweep(sieve, x, a.chi1, a.theta[0], a.c)
        rows.append({"x": r.x, "theta1": r.theta1, "theta2": r.theta2, "bound": r.bound,
                     "argmax": r.argmax, "count": r.count, "excluded": r.excluded})
    _write(rows, ("x", "theta1", "theta2", "bound", "argmax", "count", "excluded"), a,
           {"kind": "lemma51"})
    b1, b2 = rows[0]["bound"], rows[1]["bound"]
    stable = math.isfinite(b1) and math.isfinite(b2) and abs(b2 - b1) <= 0.1 * max(b1, b2)
    print(f"lemma51: B({rows[0]['x']})={b1!r} B({rows[1]['x']})={b2!r} stable={stable}",
          file=sys.stderr)
    return EXIT_OK if stable else EXIT_AUDIT_FAIL


def cmd_primes(a) -> int:
    chi = parse_character(a.chi1)
    sieve = build_sieve(max(2, a.xmax), a.max_sieve_bytes)
    lines = [f"chi={a.chi1} order={chi.order} x={a.xmax}",
             f"kappa(order)={constants.kappa(chi.order)!r}", f"rho+2={constants.RHO + 2!r}"]
    for th in a.theta:
        avg = primes.prime_average(sieve, a.xmax, chi, th)
        tw = primes.prime_twisted_average(sieve, a.xmax, chi, th)
        lines += [f"theta={th!r} prime_average={avg!r}",
                  f"theta={th!r} twisted_mean_modulus={tw.modulus!r}"]
    _emit(lines)
    return EXIT_OK


COMMANDS = {"constants": cmd_constants, "delta3": cmd_delta3, "delta": cmd_delta,
            "deltak": cmd_deltak, "scan": cmd_scan, "contrast": cmd_contrast,
            "audit": cmd_audit, "primes": cmd_primes}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return COMMANDS[a.command](a)
    except (ConfigError, SieveResourceError, ValueError, OSError) as e:
        print(f"{PROG}: error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
