import math
import random

import numpy as np
import pytest

from conftest import brute_primes
from multset.setspec import chi, resolve_set
from multset.sieve import (
    CacheError,
    build_char_table,
    cached_char_table,
    count,
    load_char_table,
    log_lcm_f,
    pi_S,
    primes_up_to,
    save_char_table,
)

SETS = ["naturals", "sum2sq", "hex", "nonhyp", "quadsem:-3", "sprime:-7", "progsem:4:3",
        "phi-nondiv:5"]


def test_primes_match_trial_division():
    assert primes_up_to(5000).primes.tolist() == brute_primes(5000)


def test_segmented_primes_agree_with_single_segment():
    a = primes_up_to(200000, segment_size=1 << 10).primes
    b = primes_up_to(200000, segment_size=1 << 20).primes
    assert np.array_equal(a, b)


def test_prime_counts(primes_1e7):
    assert len(primes_1e7.upto(10**6)) == 78498
    assert len(primes_1e7.upto(10**7)) == 664579


@pytest.mark.parametrize("name", SETS)
def test_table_matches_chi(name):
    d = resolve_set(name)
    t = build_char_table(d, 3000)
    assert t.members() == [n for n in range(1, 3001) if chi(d, n)]


@pytest.mark.parametrize("name", SETS)
def test_small_segments_give_same_table(name):
    d = resolve_set(name)
    a = build_char_table(d, 50000, segment_size=777)
    b = build_char_table(d, 50000)
    assert np.array_equal(a.bits, b.bits)


def test_random_spot_checks_at_1e7(primes_1e7):
    rng = random.Random(7)
    for name in ("sum2sq", "hex", "nonhyp"):
        d = resolve_set(name)
        t = build_char_table(d, 10**7, primes=primes_1e7)
        for n in rng.sample(range(1, 10**7 + 1), 300):
            assert t[n] == chi(d, n)


def test_counts_small():
    t = build_char_table(resolve_set("sum2sq"), 20)
    assert count(t, 20) == 12
    assert count(build_char_table(resolve_set("naturals"), 10), 10) == 10


def test_pi_S():
    assert pi_S(resolve_set("sum2sq"), 100) == 1 + len([p for p in brute_primes(100) if p % 4 == 1])
    assert pi_S(resolve_set("naturals"), 1000) == 168


def test_pi_S_tau_set():
    d = resolve_set("tau-nondiv:691", bound=2000)
    from multset.tau import tau_mod_sieve

    t = tau_mod_sieve(691, 2000)
    assert pi_S(d, 2000) == sum(1 for p in brute_primes(2000) if t[p] != 0)


def test_cache_round_trip(tmp_path):
    d = resolve_set("hex")
    t = cached_char_table(d, 10000, tmp_path)
    again = cached_char_table(d, 10000, tmp_path)
    assert np.array_equal(t.bits, again.bits)
    path = next(tmp_path.iterdir())
    loaded = load_char_table(path, d)
    assert np.array_equal(loaded.bits, t.bits)


def test_cache_rejects_other_descriptor(tmp_path):
    t = build_char_table(resolve_set("hex"), 1000)
    path = tmp_path / "t.bin"
    save_char_table(t, path)
    with pytest.raises(CacheError):
        load_char_table(path, resolve_set("sum2sq"))


def test_cache_rejects_corruption(tmp_path):
    t = build_char_table(resolve_set("hex"), 1000)
    path = tmp_path / "t.bin"
    save_char_table(t, path)
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(CacheError):
        load_char_table(path, resolve_set("hex"))


def test_log_lcm_f_against_bigint():
    from math import lcm

    for n in (1, 2, 3, 10, 57, 300):
        val = 1
        for k in range(1, n + 1):
            val = lcm(val, k * k + 1)
        assert log_lcm_f(n) == pytest.approx(math.log(val), rel=1e-12)
