import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twisted_delta.sieve import (E_k, E_of, FactoredInteger, SieveResourceError, WeightSpec,
                                 build_sieve, factor_int, factorize, weight)


def naive_divisors(n):
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def test_spf_examples(sieve_small):
    assert sieve_small.spf[12] == 2
    assert sieve_small.spf[97] == 97
    assert sieve_small.spf[91] == 7


def test_factorize_examples(sieve_small):
    fi = factorize(sieve_small, 12)
    assert fi.divisors == (1, 2, 3, 4, 6, 12)
    assert not fi.mu2 and fi.omega == 2 and fi.tau3 == 18
    one = factorize(sieve_small, 1)
    assert one.divisors == (1,) and one.omega == 0 and one.tau3 == 1
    assert factorize(sieve_small, 97).tau3 == 3


def test_factorize_out_of_range(sieve_small):
    with pytest.raises(ValueError):
        factorize(sieve_small, 0)
    with pytest.raises(ValueError):
        factorize(sieve_small, sieve_small.limit + 1)


def test_sieve_budget():
    with pytest.raises(SieveResourceError):
        build_sieve(10**6, max_bytes=1000)


def test_factorization_and_divisor_count_up_to_1e5(sieve_small):
    for n in range(1, 100_001):
        fi = factorize(sieve_small, n)
        assert math.prod(p**e for p, e in fi.factors) == n
        assert fi.tau == math.prod(e + 1 for _, e in fi.factors)
    for n in range(1, 100_001, 97):
        assert list(factorize(sieve_small, n).divisors) == naive_divisors(n)


def test_primes_match_sieve_of_eratosthenes(sieve_small):
    ps = sieve_small.primes(1000)
    expected = [p for p in range(2, 1001) if all(p % d for d in range(2, math.isqrt(p) + 1))]
    assert ps.tolist() == expected


def test_E_examples():
    e, es = E_of(factor_int(6))
    assert math.isclose(e, math.log(1.5), rel_tol=1e-15)
    assert math.isinf(E_of(factor_int(1))[0]) and E_of(factor_int(1))[1] == 1
    assert E_of(factor_int(2)) == (math.log(2), math.log(2))
    assert math.isclose(E_k(factor_int(6), 1), math.log(1.5) / 2)


def test_E_equals_pairwise_minimum(sieve_small):
    for n in range(2, 10_001):
        L = np.log(np.array(factorize(sieve_small, n).divisors, dtype=float))
        pairwise = min(abs(a - b) for a, b in combinations(L, 2))
        assert E_of(factorize(sieve_small, n))[0] == pytest.approx(pairwise, rel=1e-12)


def test_weight_examples():
    assert weight(WeightSpec(1.0), factor_int(30)) == 1
    assert weight(WeightSpec(2.0), factor_int(30)) == 8
    assert weight(WeightSpec(1.0, 3), factor_int(6)) == 0
    assert weight(WeightSpec(1.0), factor_int(12)) == 0
    assert weight(WeightSpec(1.0, squarefree_only=False), factor_int(12)) == 1


def test_weight_spec_validation():
    with pytest.raises(ValueError):
        WeightSpec(0.0)
    with pytest.raises(ValueError):
        WeightSpec(1.0, 0)


@settings(max_examples=200, deadline=None)
@given(m=st.integers(1, 1000), n=st.integers(1, 1000))
def test_tau3_multiplicative(m, n):
    if math.gcd(m, n) != 1:
        return
    assert factor_int(m * n).tau3 == factor_int(m).tau3 * factor_int(n).tau3


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 10**6))
def test_factor_int_agrees_with_from_factors(n):
    fi = factor_int(n)
    again = FactoredInteger.from_factors(fi.factors)
    assert (again.n, again.factors, again.divisors) == (fi.n, fi.factors, fi.divisors)
    assert fi.divisors[-1] == n
    for d in fi.divisors[:5]:
        assert fi.divisor(d).n == d
