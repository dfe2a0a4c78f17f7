"""Prime tables, characteristic tables chi_S(n) for n <= N, counting
functions, and the empirical log-lcm of n^2 + 1.

Characteristic tables are sieved rather than factored: start from all ones
and, for every prime p whose allowed exponents E(p) are not everything,
clear the n whose exact p-adic valuation falls outside E(p).
"""

from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass, field
from math import isqrt
from pathlib import Path

import numpy as np

from .lfun import kronecker
from .setspec import (
    AnyPrime,
    BoundError,
    ExplicitPrime,
    Kronecker,
    Predicate,
    Residue,
    SetDescriptor,
)

__all__ = [
    "PrimeTable",
    "CharTable",
    "primes_up_to",
    "rule_indices",
    "char_segment",
    "build_char_table",
    "count",
    "pi_S",
    "log_lcm_f",
    "save_char_table",
    "load_char_table",
    "CacheError",
]

SEGMENT_SIZE = 1 << 22
MAX_BOUND = 2 * 10**9


@dataclass(frozen=True)
class PrimeTable:
    bound: int
    primes: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)

    def upto(self, x: float) -> np.ndarray:
        return self.primes[: np.searchsorted(self.primes, math.floor(x), side="right")]


def _small_primes(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


_largest: PrimeTable | None = None


def primes_up_to(N: int, segment_size: int = SEGMENT_SIZE) -> PrimeTable:
    """All primes <= N by a segmented sieve of Eratosthenes."""
    global _largest
    N = int(N)
    if N < 2:
        raise ValueError("primes_up_to needs N >= 2")
    if N > MAX_BOUND:
        raise BoundError(f"N={N} exceeds sieve capacity {MAX_BOUND}")
    if _largest is not None and _largest.bound >= N:
        return PrimeTable(N, _largest.upto(N))
    root = isqrt(N)
    base = _small_primes(root)
    chunks = [base]
    lo = root + 1
    while lo <= N:
        hi = min(lo + segment_size, N + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base.tolist():
            start = max(p * p, -(-lo // p) * p)
            if start >= hi:
                continue
            seg[start - lo :: p] = False
        chunks.append(np.nonzero(seg)[0].astype(np.int64) + lo)
        lo = hi
    primes = np.concatenate(chunks)
    primes.flags.writeable = False
    table = PrimeTable(N, primes)
    if _largest is None or _largest.bound < N:
        _largest = table
    return table


def rule_indices(desc: SetDescriptor, primes: np.ndarray) -> np.ndarray:
    """Index of the first matching rule for each prime."""
    idx = np.full(len(primes), -1, dtype=np.int32)
    for i, rule in enumerate(desc.rules):
        free = idx < 0
        if not free.any():
            break
        c = rule.cond
        if isinstance(c, Residue):
            hit = primes % c.modulus == c.residue
        elif isinstance(c, Kronecker):
            q = abs(c.D)
            table = np.array([kronecker(c.D, r) if r else kronecker(c.D, q) for r in range(q)])
            hit = table[primes % q] == c.value
        elif isinstance(c, ExplicitPrime):
            hit = primes == c.p
        elif isinstance(c, (AnyPrime, Predicate)):
            hit = np.ones(len(primes), dtype=bool)
        else:  # pragma: no cover
            raise TypeError(c)
        idx[free & hit] = i
    return idx


def _clear_multiples(seg: np.ndarray, lo: int, hi: int, ps: np.ndarray) -> None:
    """Clear every multiple k*p (k >= 1) of each p in ps inside [lo, hi)."""
    if not len(ps):
        return
    first = np.maximum(-(-lo // ps) * ps, ps)
    cnt = np.where(first < hi, (hi - 1 - first) // ps + 1, 0)
    total = int(cnt.sum())
    if not total:
        return
    starts = np.cumsum(cnt) - cnt
    offs = np.arange(total, dtype=np.int64) - np.repeat(starts, cnt)
    seg[np.repeat(first, cnt) + np.repeat(ps, cnt) * offs - lo] = False


def _clear_valuation(seg: np.ndarray, lo: int, hi: int, p: int, allowed) -> None:
    pe = p
    e = 1
    while pe < hi:
        if e not in allowed:
            start = max(-(-lo // pe) * pe, pe)
            ns = np.arange(start, hi, pe, dtype=np.int64)
            ns = ns[(ns // pe) % p != 0]
            seg[ns - lo] = False
        pe *= p
        e += 1


def char_segment(desc: SetDescriptor, lo: int, hi: int, primes: np.ndarray,
                 rule_idx: np.ndarray | None = None) -> np.ndarray:
    """chi_S(n) for lo <= n < hi as a boolean array (n = 0 maps to False).

    ``primes`` must contain every prime below ``hi``.
    """
    if rule_idx is None:
        rule_idx = rule_indices(desc, primes)
    seg = np.ones(hi - lo, dtype=bool)
    if lo == 0:
        seg[0] = False
    below = primes < hi
    for i, rule in enumerate(desc.rules):
        if rule.exp is not None and rule.exp.kind == "all":
            continue
        ps = primes[below & (rule_idx == i)]
        if not len(ps):
            continue
        split = np.searchsorted(ps, isqrt(hi - 1), side="right")
        small, large = ps[:split], ps[split:]
        resolver = rule.cond.resolver if isinstance(rule.cond, Predicate) else None
        for p in small.tolist():
            allowed = rule.exp if resolver is None else resolver.exponents(p)
            _clear_valuation(seg, lo, hi, p, allowed)
        if resolver is None:
            if 1 not in rule.exp:
                _clear_multiples(seg, lo, hi, large)
        else:
            _clear_multiples(seg, lo, hi, large[~resolver.allows_one(large)])
    return seg


@dataclass
class CharTable:
    """chi_S(n) for 0 <= n <= N (entry 0 is 0)."""

    name: str
    N: int
    bits: np.ndarray
    segment_size: int = SEGMENT_SIZE
    seconds: float = 0.0
    digest: bytes = b""
    _counts: np.ndarray | None = field(default=None, repr=False)

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.N:
            raise BoundError(f"{n} outside table range 1..{self.N}")
        return int(self.bits[n])

    @property
    def counts(self) -> np.ndarray:
        if self._counts is None:
            self._counts = np.cumsum(self.bits, dtype=np.int64)
            self._counts.flags.writeable = False
        return self._counts

    def members(self) -> list[int]:
        return np.nonzero(self.bits)[0].tolist()


def build_char_table(desc: SetDescriptor, N: int, segment_size: int = SEGMENT_SIZE,
                     primes: PrimeTable | None = None) -> CharTable:
    """Dense characteristic table of ``desc`` on 1..N."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be positive")
    if N > MAX_BOUND:
        raise BoundError(f"N={N} exceeds sieve capacity {MAX_BOUND}")
    pred = desc.predicate
    if pred is not None and N > pred.resolver.bound:
        raise BoundError(f"N={N} beyond backing sieve bound {pred.resolver.bound}")
    t0 = time.perf_counter()
    if primes is None:
        primes = primes_up_to(max(N, 2))
    ps = primes.upto(N)
    idx = rule_indices(desc, ps)
    bits = np.empty(N + 1, dtype=bool)
    for lo in range(0, N + 1, segment_size):
        hi = min(lo + segment_size, N + 1)
        bits[lo:hi] = char_segment(desc, lo, hi, ps, idx)
    bits.flags.writeable = False
    return CharTable(desc.name, N, bits, segment_size, time.perf_counter() - t0, desc.digest())


def count(table: CharTable, x: float) -> int:
    """S(x) = #{n <= x : n in S}."""
    if x < 0 or x > table.N:
        raise BoundError(f"x={x} outside 0..{table.N}")
    return int(table.counts[math.floor(x)])


def pi_S(desc: SetDescriptor, x: float, primes: PrimeTable | None = None) -> int:
    """Number of primes p <= x lying in the set."""
    if x < 2:
        return 0
    if primes is None or primes.bound < x:
        primes = primes_up_to(math.floor(x))
    ps = primes.upto(x)
    idx = rule_indices(desc, ps)
    total = 0
    for i, rule in enumerate(desc.rules):
        sel = ps[idx == i]
        if isinstance(rule.cond, Predicate):
            total += int(np.count_nonzero(rule.cond.resolver.allows_one(sel)))
        elif 1 in rule.exp:
            total += len(sel)
    return total


# ---------------------------------------------------------------------------


def _sqrt_minus_one(p: int) -> int:
    c = 2
    while pow(c, (p - 1) // 2, p) != p - 1:
        c += 1
    return pow(c, (p - 1) // 4, p)


def log_lcm_f(n: int) -> float:
    """log lcm(1^2+1, 2^2+1, ..., n^2+1)."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if n > 10**7:
        raise BoundError("log_lcm_f supports n <= 10^7")
    k = np.arange(1, n + 1, dtype=np.int64)
    vals = k * k + 1
    terms = []
    if n >= 1:
        # k^2 + 1 is never divisible by 4
        vals[0::2] //= 2
        terms.append(math.log(2))
    for p in primes_up_to(max(n, 2)).primes.tolist():
        if p % 4 != 1:
            continue
        r = _sqrt_minus_one(p)
        idx = np.concatenate([np.arange(r - 1, n, p), np.arange(p - r - 1, n, p)])
        e = 0
        while len(idx):
            e += 1
            vals[idx] //= p
            idx = idx[vals[idx] % p == 0]
        terms.append(e * math.log(p))
    # cofactors left over are primes > n, each to the first power
    big = np.unique(vals[vals > 1])
    terms.extend(np.log(big.astype(np.float64)).tolist())
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# on-disk cache: header (magic, version, kind, digest, N) + payload

_MAGIC = b"MSET"
_VERSION = 1
_HEADER = struct.Struct("<4sHH32sQ")
KIND_CHAR = 1
KIND_TAU = 2


class CacheError(ValueError):
    pass


def write_envelope(path: Path, kind: int, digest: bytes, N: int, payload: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(_HEADER.pack(_MAGIC, _VERSION, kind, digest, N) + payload)
    tmp.replace(path)


def read_envelope(path: Path, kind: int, digest: bytes) -> tuple[int, bytes]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise CacheError("truncated cache file")
    magic, version, k, dig, N = _HEADER.unpack_from(data)
    if magic != _MAGIC or version != _VERSION or k != kind:
        raise CacheError("not a cache file of the expected kind/version")
    if dig != digest:
        raise CacheError("descriptor hash mismatch")
    return N, data[_HEADER.size :]


def save_char_table(table: CharTable, path: Path) -> None:
    payload = np.packbits(table.bits, bitorder="little").tobytes()
    write_envelope(path, KIND_CHAR, table.digest, table.N, payload)


def load_char_table(path: Path, desc: SetDescriptor) -> CharTable:
    N, payload = read_envelope(path, KIND_CHAR, desc.digest())
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), count=N + 1,
                         bitorder="little").astype(bool)
    bits.flags.writeable = False
    return CharTable(desc.name, N, bits, digest=desc.digest())


def cached_char_table(desc: SetDescriptor, N: int, cache_dir: Path | None) -> CharTable:
    """Build a table, reusing a cached one of the same descriptor when it
    covers N.  Stale or foreign cache files are rebuilt."""
    if cache_dir is None:
        return build_char_table(desc, N)
    path = Path(cache_dir) / f"{desc.digest().hex()[:24]}.mset"
    if path.exists():
        try:
            table = load_char_table(path, desc)
            if table.N >= N:
                return table
        except CacheError:
            pass
    table = build_char_table(desc, N)
    save_char_table(table, path)
    return table
