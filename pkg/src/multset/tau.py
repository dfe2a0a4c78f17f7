"""Ramanujan's tau function modulo a prime.

Delta = x * prod_{m>=1} (1 - x^m)^24 is expanded as x * (eta^3)^8 where
Jacobi's identity makes eta^3 = prod (1 - x^m)^3 sparse::

    eta^3 = sum_{k>=0} (-1)^k (2k+1) x^{k(k+1)/2}

Seven dense-by-sparse multiplications modulo q give tau(n) mod q for n <= N
in O(N sqrt(N)) word operations.  Several primes can share one run by
working modulo their product.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt, prod

import numpy as np

from .setspec import BoundError, register_predicate

__all__ = [
    "TauTable",
    "HeckeExponents",
    "TauPredicate",
    "RAMANUJAN_DELTA",
    "tau_mod_sieve",
    "tau_tables",
    "tau_nondiv_chi",
    "sigma11_residues",
    "verify_sigma11",
    "delta_empirical",
    "divisibility_density",
]

# Ramanujan's delta_q: density of primes p with q | tau(p), the exponent in
# sum_{k<=n} t_k ~ C n / log^{delta_q} n.
RAMANUJAN_DELTA = {
    3: Fraction(1, 2),
    5: Fraction(1, 4),
    7: Fraction(1, 2),
    23: Fraction(1, 2),
    691: Fraction(1, 690),
}

DEFAULT_BOUND = 10**5


@dataclass(frozen=True)
class TauTable:
    """tau(n) mod q for 1 <= n <= N; ``values[0]`` is unused."""

    q: int
    N: int
    values: np.ndarray

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.N:
            raise BoundError(f"{n} outside tau table range 1..{self.N}")
        return int(self.values[n])


def _eta_cubed(degree: int, modulus: int) -> tuple[np.ndarray, np.ndarray]:
    kmax = (isqrt(8 * degree + 1) - 1) // 2
    k = np.arange(kmax + 1, dtype=np.int64)
    idx = k * (k + 1) // 2
    coef = np.where(k % 2 == 0, 2 * k + 1, -(2 * k + 1)) % modulus
    return idx, coef


def _eta24_residues(modulus: int, length: int) -> np.ndarray:
    """Coefficients of prod (1 - x^m)^24 mod ``modulus``, degrees < length."""
    idx, coef = _eta_cubed(length - 1, modulus)
    dense = np.zeros(length, dtype=np.int64)
    dense[idx] = coef
    # terms accumulated between reductions without int64 overflow
    chunk = max(1, (2**62) // (modulus * modulus))
    tmp = np.empty(length, dtype=np.int64)
    for _ in range(7):
        out = np.zeros(length, dtype=np.int64)
        for j, (i, c) in enumerate(zip(idx.tolist(), coef.tolist())):
            if c == 0:
                continue
            n = length - i
            np.multiply(dense[:n], c, out=tmp[:n])
            out[i:] += tmp[:n]
            if (j + 1) % chunk == 0:
                out %= modulus
        out %= modulus
        dense = out
    return dense


@lru_cache(maxsize=8)
def _tau_residues(modulus: int, N: int) -> np.ndarray:
    vals = np.zeros(N + 1, dtype=np.int64)
    vals[1:] = _eta24_residues(modulus, N)
    vals.flags.writeable = False
    return vals


def tau_tables(qs, N: int) -> dict[int, TauTable]:
    """TauTables for several primes from one expansion modulo their product."""
    qs = sorted(set(int(q) for q in qs))
    for q in qs:
        if q < 2 or any(q % d == 0 for d in range(2, isqrt(q) + 1)):
            raise ValueError(f"{q} is not prime")
    if N < 1:
        raise ValueError("N must be positive")
    modulus = prod(qs)
    if modulus >= 2**31:
        raise ValueError("product of moduli too large for a shared run")
    base = _tau_residues(modulus, N)
    out = {}
    for q in qs:
        vals = base % q if modulus != q else base
        vals.flags.writeable = False
        out[q] = TauTable(q, N, vals)
    return out


def tau_mod_sieve(q: int, N: int) -> TauTable:
    """tau(n) mod q for all n <= N."""
    return tau_tables([q], N)[q]


def sigma11_residues(q: int, N: int) -> np.ndarray:
    """sigma_11(n) mod q for 0 <= n <= N (entry 0 unused)."""
    out = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, N + 1):
        out[d::d] += pow(d, 11, q)
        if d % 4096 == 0:
            out %= q
    return out % q


def verify_sigma11(table: TauTable) -> int | None:
    """First n with tau(n) != sigma_11(n) (mod q), or None; meaningful for q = 691."""
    sig = sigma11_residues(table.q, table.N)
    bad = np.flatnonzero(table.values[1:] != sig[1:])
    return int(bad[0]) + 1 if bad.size else None


def tau_nondiv_chi(table: TauTable, n: int) -> int:
    """1 iff q does not divide tau(n)."""
    return int(table[n] != 0)


def _prime_mask(N: int) -> np.ndarray:
    from .sieve import primes_up_to

    mask = np.zeros(N + 1, dtype=bool)
    if N >= 2:
        mask[primes_up_to(N).primes] = True
    return mask


def delta_empirical(q: int, x: int, table: TauTable | None = None) -> float:
    """Fraction of primes p <= x with q not dividing tau(p)."""
    from .sieve import primes_up_to

    if table is None:
        table = tau_mod_sieve(q, x)
    if x > table.N:
        raise BoundError(f"x={x} beyond tau table bound {table.N}")
    ps = primes_up_to(x).primes
    return float(np.count_nonzero(table.values[ps] != 0)) / len(ps)


def divisibility_density(q: int, x: int, table: TauTable | None = None) -> float:
    """Fraction of primes p <= x with q | tau(p); estimates delta_q."""
    return 1.0 - delta_empirical(q, x, table)


@dataclass(frozen=True)
class HeckeExponents:
    """E(p) = {e >= 1 : q does not divide tau(p^e)}, from the Hecke recursion
    tau(p^{e+1}) = tau(p) tau(p^e) - p^11 tau(p^{e-1})."""

    tau_p: int
    p11: int
    q: int
    kind = "hecke"

    def residues(self, upto: int) -> list[int]:
        a = [1 % self.q, self.tau_p % self.q]
        while len(a) <= upto:
            a.append((self.tau_p * a[-1] - self.p11 * a[-2]) % self.q)
        return a

    def __contains__(self, e: int) -> bool:
        return e == 0 or self.residues(e)[e] != 0

    def local_sum(self, x: float, tol: float = 1e-18) -> float:
        total = 1.0
        e = 1
        xe = x
        a_prev, a = 1 % self.q, self.tau_p % self.q
        while xe > tol:
            if a:
                total += xe
            a_prev, a = a, (self.tau_p * a - self.p11 * a_prev) % self.q
            e += 1
            xe *= x
        return total

    generator_step = None

    def text(self) -> str:
        return f"hecke(tau_p={self.tau_p}, q={self.q})"


class TauPredicate:
    """Resolver behind ``tau-nondiv:q``; sieves lazily up to ``bound``."""

    def __init__(self, q: int, bound: int):
        self.q = q
        self.bound = bound
        self._table: TauTable | None = None

    @property
    def table(self) -> TauTable:
        if self._table is None:
            if self.q in RAMANUJAN_DELTA:
                # one run serves every classical modulus
                self._table = tau_tables(RAMANUJAN_DELTA, self.bound)[self.q]
            else:
                self._table = tau_mod_sieve(self.q, self.bound)
        return self._table

    @property
    def declared_delta(self) -> Fraction | None:
        d = RAMANUJAN_DELTA.get(self.q)
        return None if d is None else 1 - d

    def exponents(self, p: int) -> HeckeExponents:
        if p > self.bound:
            raise BoundError(f"prime {p} beyond tau sieve bound {self.bound}")
        return HeckeExponents(self.table[p], pow(p, 11, self.q), self.q)

    def allows_one(self, ps: np.ndarray) -> np.ndarray:
        if len(ps) and int(ps.max()) > self.bound:
            raise BoundError(f"primes beyond tau sieve bound {self.bound}")
        return self.table.values[ps] != 0

    def chi(self, n: int) -> int:
        return tau_nondiv_chi(self.table, n)


def _factory(param: str, bound: int | None) -> TauPredicate:
    return TauPredicate(int(param), bound or DEFAULT_BOUND)


register_predicate("tau-nondiv", _factory)
