import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad as scipy_quad

from twisted_delta.characters import parse_character
from twisted_delta.instrumentation.moments import QuadratureSpec, moment_M2q
from twisted_delta.instrumentation.transforms import (G_kernel, G_transform, G_transform_closed,
                                                      kernel_K, lorentz_transform, parseval_1d,
                                                      parseval_delta3, tau_hat_0, tau_hat_0_closed,
                                                      tau_hat_1, tau_hat_1_closed, tau_hat_2,
                                                      tau_hat_2_closed)
from twisted_delta.sieve import factor_int

OMEGAS = np.array([0.0, 0.1, 0.405465, 0.5, 0.693147, 0.99, 1.0, 1.5, 3.2])


def test_lorentz_transform_closed_form():
    got = lorentz_transform(OMEGAS)
    assert np.allclose(got, math.pi * np.exp(-OMEGAS), atol=1e-6)


def test_G_transform_closed_form():
    got = G_transform(OMEGAS)
    assert np.allclose(got, G_transform_closed(OMEGAS), atol=1e-4)
    assert G_transform_closed([0.0])[0] == pytest.approx(math.pi)


def test_G_kernel_matches_its_definition():
    for t in (1e-6, 1e-3, 0.5, 2.0, 17.0):
        direct, _ = scipy_quad(lambda v: 4 * math.sin(v * t / 2) ** 2 / t**2, 0, 1)
        assert G_kernel(t) == pytest.approx(direct, rel=1e-10, abs=1e-14)
    assert G_kernel(0.0) == pytest.approx(1 / 3)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("theta", [-7.0, -1.0, -0.999, 0.0, 0.3, 0.999, 1.0, 2.5, 40.0])
def test_kernel_K_matches_direct_integral(k, theta):
    v1, v2 = 0.8, 0.35
    re, _ = scipy_quad(lambda s: (s + v1 - v2) ** k * math.cos(s * theta), -v1, 0, limit=200)
    im, _ = scipy_quad(lambda s: -(s + v1 - v2) ** k * math.sin(s * theta), -v1, 0, limit=200)
    assert kernel_K(np.array([theta]), k, v1, v2)[0] == pytest.approx(complex(re, im), abs=1e-10)


def test_tau_hat_at_one(chi3, chi5):
    one = factor_int(1)
    assert tau_hat_1(one, chi3, chi5, 0.4).value == pytest.approx(math.pi, abs=1e-5)
    assert tau_hat_2(one, chi3, chi5).value == pytest.approx(math.pi**2, abs=1e-4)
    for q in (1, 2, 3):
        assert tau_hat_0(one, chi3, q).value == pytest.approx(math.pi, abs=1e-5)


@pytest.mark.parametrize("n", [2, 6, 35, 210])
def test_tau_hat_matches_closed_forms(n, chi3, chi7):
    fi = factor_int(n)
    r1 = tau_hat_1(fi, chi3, chi7, 0.6)
    assert abs(r1.value - tau_hat_1_closed(fi, chi3, chi7, 0.6)) <= r1.tail_bound + 1e-6
    r2 = tau_hat_2(fi, chi3, chi7)
    assert abs(r2.value - tau_hat_2_closed(fi, chi3, chi7)) <= r2.tail_bound + 1e-6
    r0 = tau_hat_0(fi, chi3, 2)
    assert abs(r0.value - tau_hat_0_closed(fi, chi3, 2)) <= r0.tail_bound + 1e-6


def test_tau_hat_requires_reasonable_cutoff(chi3):
    with pytest.raises(ValueError):
        tau_hat_2(factor_int(6), chi3, chi3, QuadratureSpec(theta_cutoff=5))


def test_parseval_delta3_anchor(chi3):
    r = parseval_delta3(factor_int(1), chi3, chi3)
    assert r.lhs == pytest.approx(0.25, abs=1e-15)
    assert r.rhs == pytest.approx(0.25, rel=1e-4)


@pytest.mark.parametrize("n", [2, 6, 30, 77, 210])
def test_parseval_delta3_small_defect(n, chi3):
    r = parseval_delta3(factor_int(n), chi3, chi3)
    assert r.rel_defect < 1e-3
    assert r.lhs == pytest.approx(moment_M2q(factor_int(n), chi3, chi3, 1), rel=1e-12)


def test_parseval_1d_anchor(chi3):
    r = parseval_1d(factor_int(1), chi3, chi3, 0.0, 0, 1.0, 1.0)
    assert r.lhs == pytest.approx(1.0)
    assert r.rhs == pytest.approx(1.0, rel=1e-4)


def test_parseval_1d_examples(chi3, chi5):
    assert parseval_1d(factor_int(2), chi3, chi3, 0.0, 0, 1.0, 1.0).rel_defect < 1e-3
    assert parseval_1d(factor_int(6), chi3, chi5, 0.5, 1, 1.0, 1.0).rel_defect < 1e-2


def test_parseval_1d_lhs_matches_riemann(chi3, chi5):
    from twisted_delta.delta import delta_k_at
    fi = factor_int(30)
    r = parseval_1d(fi, chi3, chi5, 0.3, 2, 0.7, 0.4)
    us = np.linspace(-1.0, fi.logdivs[-1], 40001)
    vals = [abs(delta_k_at(fi, chi3, chi5, 0.3, 2, u, 0.7, 0.4)) ** 2 for u in us]
    assert r.lhs == pytest.approx(np.sum(vals) * (us[1] - us[0]), rel=2e-3)


def test_parseval_1d_rejects_long_windows(chi3):
    with pytest.raises(ValueError):
        parseval_1d(factor_int(6), chi3, chi3, 0.0, 0, 1.2, 0.5)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 400), theta=st.floats(-3, 3), k=st.integers(0, 3),
       v1=st.floats(0.05, 1.0), v2=st.floats(0.0, 1.0))
def test_parseval_1d_property(n, theta, k, v1, v2):
    c1, c2 = parse_character("3:1"), parse_character("5:1")
    r = parseval_1d(factor_int(n), c1, c2, theta, k, v1, v2)
    assert abs(r.lhs - r.rhs) <= max(1e-3 * max(abs(r.lhs), abs(r.rhs)), r.tail_bound)
