import pytest

from conftest import brute_primes
from multset.races import RaceCheckpoint, prime_race, race, race_suite_progressions
from multset.setspec import chi, resolve_set as R


def brute_race(a, b, X):
    ca = cb = 0
    worst = (0, 0)
    for x in range(1, X + 1):
        ca += chi(a, x)
        cb += chi(b, x)
        if ca - cb < worst[0]:
            worst = (ca - cb, x)
        if ca < cb:
            return x, worst
    return None, worst


def test_prefix_counts():
    r = race(R("sum2sq"), R("hex"), 10)
    assert (r.a_count, r.b_count) == (7, 5)
    assert r.verdict == "no-violation"


def test_self_race():
    r = race(R("hex"), R("hex"), 10**5)
    assert r.ok and r.min_margin == 0


def test_vacuous():
    r = race(R("sum2sq"), R("hex"), 0)
    assert r.ok and r.a_count == r.b_count == 0


def test_suite_small_range_matches_enumeration():
    for r in race_suite_progressions(100):
        a, b = R(r.a), R(r.b)
        v, (m, _) = brute_race(a, b, 100)
        assert r.ok and v is None
        assert r.min_margin == m


def test_detects_violation():
    # primes 1 mod 4 win over primes 3 mod 4 at 5 already
    a, b = R("progsem:4:3"), R("progsem:4:1")
    r = race(b, a, 1000)
    v, (m, at) = brute_race(b, a, 1000)
    assert r.violation_at == v
    assert (r.min_margin, r.min_at) == (m, at)


def test_prime_race_first_flip():
    a, b = R("progsem:4:3"), R("progsem:4:1")
    r = prime_race(a, b, 26861)
    ca = cb = 0
    first = None
    for p in brute_primes(26861):
        ca += p % 4 == 3
        cb += p % 4 == 1
        if ca < cb:
            first = p
            break
    assert first == 26861
    assert r.violation_at == first
    assert prime_race(a, b, 26860).ok


def test_prime_race_identical():
    r = prime_race(R("sum2sq"), R("sum2sq"), 10**5)
    assert r.ok and r.min_margin == 0


def test_prime_race_implication():
    # when the prime race holds, the set race holds too
    pairs = [("progsem:3:2", "progsem:3:1"), ("progsem:4:3", "progsem:4:1")]
    for a, b in pairs:
        if prime_race(R(a), R(b), 20000).ok:
            assert race(R(a), R(b), 20000).ok


def test_deterministic_and_segment_independent():
    a, b = R("sum2sq"), R("hex")
    r1 = race(a, b, 3 * 10**6)
    r2 = race(a, b, 3 * 10**6)
    r3 = race(a, b, 3 * 10**6, segment_size=999_983)
    assert r1 == r2
    assert (r1.min_margin, r1.a_count, r1.b_count) == (r3.min_margin, r3.a_count, r3.b_count)
    assert [c.x for c in r1.checkpoints] == [10**6, 2 * 10**6, 3 * 10**6]
    assert r1.checkpoints == r3.checkpoints


def test_resume_from_checkpoint():
    a, b = R("progsem:3:2"), R("progsem:4:1")
    full = race(a, b, 2_500_000)
    cp = full.checkpoints[1]
    tail = race(a, b, 2_500_000, resume=cp)
    assert (tail.a_count, tail.b_count, tail.min_margin) == (full.a_count, full.b_count, full.min_margin)


def test_resume_beyond_limit_rejected():
    with pytest.raises(ValueError):
        race(R("hex"), R("hex"), 10, resume=RaceCheckpoint(20, 0, 0, 0, 0))
