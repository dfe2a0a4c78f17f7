import pytest

from multset.sieve import primes_up_to


@pytest.fixture(scope="session")
def primes_1e7():
    return primes_up_to(10**7)


@pytest.fixture(scope="session")
def primes_1e8():
    return primes_up_to(10**8)


def brute_primes(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, int(p**0.5) + 1))]
