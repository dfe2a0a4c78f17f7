from fractions import Fraction

import numpy as np
import pytest

from conftest import brute_primes
from multset.setspec import chi, resolve_set
from multset.tau import (
    HeckeExponents,
    RAMANUJAN_DELTA,
    sigma11_residues,
    tau_mod_sieve,
    tau_tables,
    verify_sigma11,
)

# Delta = x prod (1 - x^m)^24, expanded with exact integers
def schoolbook_tau(N):
    poly = [0] * (N + 1)
    poly[0] = 1
    for m in range(1, N + 1):
        for _ in range(24):
            for i in range(N, m - 1, -1):
                poly[i] -= poly[i - m]
    return [0] + poly[:N]


def test_first_values_exact():
    tau = schoolbook_tau(12)
    assert tau[1:7] == [1, -24, 252, -1472, 4830, -6048]
    for q in (3, 5, 7, 23, 691, 13):
        t = tau_mod_sieve(q, 12)
        assert [t[n] for n in range(1, 13)] == [v % q for v in tau[1:13]]


def test_against_schoolbook_60():
    tau = schoolbook_tau(60)
    t = tau_mod_sieve(691, 60)
    assert [t[n] for n in range(1, 61)] == [v % 691 for v in tau[1:61]]


def test_shared_run_matches_single():
    shared = tau_tables([3, 5, 7, 23, 691], 5000)
    for q, t in shared.items():
        assert np.array_equal(t.values, tau_mod_sieve(q, 5000).values)


def test_sigma11_oracle_small():
    sig = sigma11_residues(691, 200)
    for n in (1, 2, 12, 97, 200):
        assert sig[n] == sum(d**11 for d in range(1, n + 1) if n % d == 0) % 691


def test_congruence_to_1e5():
    assert verify_sigma11(tau_mod_sieve(691, 10**5)) is None


def test_hecke_exponents_multiplicative():
    tau = schoolbook_tau(64)
    for p in (2, 3, 5, 7):
        h = HeckeExponents(tau[p], pow(p, 11, 691), 691)
        e = 1
        while p**e <= 64:
            assert (e in h) == (tau[p**e] % 691 != 0)
            e += 1


def test_tau_set_chi_matches_table():
    t = tau_mod_sieve(5, 3000)
    d = resolve_set("tau-nondiv:5", bound=3000)
    for n in range(1, 3001):
        assert chi(d, n) == (t[n] != 0)


def test_five_divides_tau_at_primes_4_mod_5():
    # tau(p) = p + p^10 (mod 5), so 5 | tau(p) exactly when p = 4 (mod 5)
    t = tau_mod_sieve(5, 20000)
    for p in brute_primes(20000):
        if p != 5:
            assert (t[p] == 0) == (p % 5 == 4)
    assert RAMANUJAN_DELTA[5] == Fraction(1, 4)


def test_bad_modulus():
    with pytest.raises(ValueError):
        tau_mod_sieve(4, 10)
