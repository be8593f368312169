import json
import subprocess
import sys
from pathlib import Path

import pytest

from twisted_delta.cli import build_parser, main

GOLDEN = Path(__file__).parent / "golden"
SUBCOMMANDS = ("constants", "delta3", "delta", "deltak", "scan", "contrast", "audit", "primes")


def help_text(*args):
    parser = build_parser()
    if args:
        parser = parser._subparsers._group_actions[0].choices[args[0]]
    return parser.format_help()


@pytest.mark.parametrize("name", ("twisted-delta",) + SUBCOMMANDS)
def test_help_matches_golden(name):
    text = help_text() if name == "twisted-delta" else help_text(name)
    assert text == (GOLDEN / f"{name}.txt").read_text()


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_every_flag_is_documented(name):
    parser = build_parser()._subparsers._group_actions[0].choices[name]
    for action in parser._actions:
        assert action.help, f"{name}: {action.option_strings or action.dest} lacks help"


def test_constants(capsys):
    assert main(["constants", "--y", "1"]) == 0
    vals = dict(line.split("=", 1) for line in capsys.readouterr().out.splitlines())
    assert f"{float(vals['rho']):.6f}" == "0.217996"
    assert f"{float(vals['m']):.6f}" == "2.217996"
    assert f"{float(vals['thm11_exponent']):.6f}" == "0.217996"
    assert vals["kappa(2)"] == "2.5"


def test_delta3_classic(capsys):
    assert main(["delta3", "6", "--chi1", "1:0", "--chi2", "1:0"]) == 0
    out = capsys.readouterr().out
    assert "delta3=3.0" in out
    assert "window1=[1, 2]" in out and "window2=[1, 2]" in out


def test_delta_and_deltak(capsys):
    assert main(["delta", "6", "--chi1", "1:0"]) == 0
    assert "delta=2.0" in capsys.readouterr().out
    assert main(["deltak", "1", "--k", "2", "--theta", "0.3"]) == 0
    assert "deltak=1.0" in capsys.readouterr().out


def test_audit_2_1_exit_zero_with_csv(capsys):
    assert main(["audit", "2.1", "--nmax", "300", "--chi1", "3:1", "--chi2", "5:1", "--q", "2"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,lemma,q,k,theta,lhs,rhs,slack,pass"
    assert all(line.endswith("true") for line in out[1:])


def test_audit_failure_exit_one(capsys):
    assert main(["audit", "parseval3", "--nmax", "30", "--tol", "1e-30"]) == 1


def test_audit_recurrence_and_lemma51(capsys):
    assert main(["audit", "recurrence", "--pairs", "5", "--samples", "50", "--nmax", "500"]) == 0
    assert main(["audit", "lemma51", "--nmax", "10000", "--theta", "0.5"]) == 0


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["scan", "--nonsense"],
    ["delta3", "0"],
    ["delta3", "6", "--chi1", "3:7"],
    ["scan", "--chi1", "3:0", "--xmax", "64"],
    ["scan", "--grid", "list"],
    ["scan", "--grid", "list", "--xs", "10,5"],
    ["contrast", "--chi2", "3:1", "--xmax", "64"],
    ["audit", "2.3", "--k", "9", "--nmax", "5"],
    ["audit", "2.1", "--format", "xml"],
])
def test_config_errors_exit_two(argv, capsys):
    assert main(argv) == 2


def test_scan_outputs_are_reproducible(tmp_path, capsys):
    outs = []
    for i, threads in enumerate(("1", "2", "1")):
        p = tmp_path / f"s{i}.json"
        argv = ["scan", "--xmax", "4096", "--threads", threads, "--out", str(p), "--format", "json"]
        assert main(argv) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    meta = json.loads(outs[0])["meta"]
    assert len(meta["run_config_hash"]) == 64 and "threads" not in meta["run_config"]


def test_audit_outputs_are_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["audit", "2.3", "--nmax", "60", "--k", "0", "1", "--theta", "0", "0.7",
                     "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_contrast_and_primes(capsys):
    assert main(["contrast", "--xmax", "512"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,S_same,S_mixed,ratio"
    assert lines[1].startswith("1,1.0,1.0,1.0")
    assert main(["primes", "--xmax", "10000", "--theta", "0"]) == 0
    assert "prime_average=" in capsys.readouterr().out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "twisted_delta", "delta3", "6",
                        "--chi1", "1:0", "--chi2", "1:0"], capture_output=True, text=True)
    assert r.returncode == 0 and "delta3=3.0" in r.stdout
    r = subprocess.run([sys.executable, "-m", "twisted_delta", "--bogus"], capture_output=True, text=True)
    assert r.returncode == 2 and "usage:" in r.stderr
