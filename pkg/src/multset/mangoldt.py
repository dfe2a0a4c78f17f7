"""Generalized von Mangoldt function of a multiplicative set.

-L_S'(s)/L_S(s) = sum Lambda_S(n) n^{-s} where Lambda_S vanishes off prime
powers and Lambda_S(p^e) = c_S(p^e) log p with an integer coefficient c_S.
Coefficients are kept exact; only the final multiplication by log p is
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import factorial

import numpy as np

from .setspec import Predicate, SetDescriptor, classify_prime
from .sieve import PrimeTable, primes_up_to, rule_indices

__all__ = [
    "MangoldtValue",
    "ExponentGuardError",
    "chi_row",
    "coefficients_recursive",
    "coefficients_composition",
    "coefficients_partition",
    "lambda_recursive",
    "lambda_closed",
    "lambda_partition",
    "mangoldt_partial_sum",
    "generator_sum",
    "iroot",
]

CLOSED_FORM_MAX_E = 12


class ExponentGuardError(ValueError):
    pass


@dataclass(frozen=True)
class MangoldtValue:
    p: int
    e: int
    coeff: int

    @property
    def value(self) -> float:
        return self.coeff * math.log(self.p)


def iroot(x: int, k: int) -> int:
    """Largest r with r**k <= x."""
    r = int(round(x ** (1.0 / k)))
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def chi_row(exps, e: int) -> list[int]:
    """[chi(p^0), chi(p^1), ..., chi(p^e)] for allowed exponents ``exps``."""
    return [1] + [int(j in exps) for j in range(1, e + 1)]


def coefficients_recursive(row: list[int]) -> list[int]:
    """c[1..e] from c(p^e) = e chi(p^e) - sum_{j<e} c(p^j) chi(p^{e-j}).

    Returned list is indexed from 0 with c[0] = 0.
    """
    e = len(row) - 1
    c = [0] * (e + 1)
    for k in range(1, e + 1):
        c[k] = k * row[k] - sum(c[j] * row[k - j] for j in range(1, k))
    return c


def _compositions(e: int):
    for m in range(1, e + 1):
        for cuts in combinations(range(1, e), m - 1):
            bounds = (0,) + cuts + (e,)
            yield m, [bounds[i + 1] - bounds[i] for i in range(m)]


def coefficients_composition(row: list[int]) -> int:
    """c(p^e) = e * sum_m (-1)^(m-1)/m * sum_{k_1+..+k_m=e} prod chi(p^{k_i})."""
    e = len(row) - 1
    if e > CLOSED_FORM_MAX_E:
        raise ExponentGuardError(f"closed form limited to e <= {CLOSED_FORM_MAX_E}")
    total = Fraction(0)
    for m, parts in _compositions(e):
        term = 1
        for k in parts:
            term *= row[k]
            if not term:
                break
        if term:
            total += Fraction((-1) ** (m - 1) * term, m)
    value = e * total
    if value.denominator != 1:
        raise ArithmeticError("closed form produced a non-integer coefficient")
    return int(value)


def _partitions(e: int, largest: int | None = None):
    """Partitions of e as dicts {part: multiplicity}."""
    if largest is None:
        largest = e
    if e == 0:
        yield {}
        return
    for part in range(min(e, largest), 0, -1):
        for rest in _partitions(e - part, part):
            out = dict(rest)
            out[part] = out.get(part, 0) + 1
            yield out


def coefficients_partition(row: list[int]) -> int:
    """c(p^e) = e * W with W summed over l_1 + 2 l_2 + ... + e l_e = e of
    (-1)^(L-1)/L * L!/(l_1! ... l_e!) * prod chi(p^j)^{l_j}, L = sum l_j."""
    e = len(row) - 1
    if e > CLOSED_FORM_MAX_E:
        raise ExponentGuardError(f"closed form limited to e <= {CLOSED_FORM_MAX_E}")
    W = Fraction(0)
    for mult in _partitions(e):
        L = sum(mult.values())
        weight = 1
        denom = 1
        for j, l in mult.items():
            weight *= row[j] ** l
            denom *= factorial(l)
        if weight:
            W += Fraction((-1) ** (L - 1) * factorial(L) * weight, L * denom)
    value = e * W
    if value.denominator != 1:
        raise ArithmeticError("partition form produced a non-integer coefficient")
    return int(value)


def lambda_recursive(desc: SetDescriptor, p: int, e: int) -> MangoldtValue:
    if e < 1:
        raise ValueError("e must be positive")
    row = chi_row(classify_prime(desc, p), e)
    return MangoldtValue(p, e, coefficients_recursive(row)[e])


def lambda_closed(desc: SetDescriptor, p: int, e: int) -> MangoldtValue:
    if e < 1:
        raise ValueError("e must be positive")
    row = chi_row(classify_prime(desc, p), e)
    return MangoldtValue(p, e, coefficients_composition(row))


def lambda_partition(desc: SetDescriptor, p: int, e: int) -> MangoldtValue:
    if e < 1:
        raise ValueError("e must be positive")
    row = chi_row(classify_prime(desc, p), e)
    return MangoldtValue(p, e, coefficients_partition(row))


def mangoldt_partial_sum(desc: SetDescriptor, x: float, primes: PrimeTable | None = None) -> float:
    """sum_{p^e <= x} Lambda_S(p^e) / p^e."""
    x = math.floor(x)
    if x < 2:
        return 0.0
    if primes is None or primes.bound < x:
        primes = primes_up_to(x)
    ps = primes.upto(x)
    idx = rule_indices(desc, ps)
    emax = int(math.log(x) / math.log(2)) + 1
    terms: list[float] = []
    for i, rule in enumerate(desc.rules):
        sel = ps[idx == i]
        if not len(sel):
            continue
        if isinstance(rule.cond, Predicate):
            res = rule.cond.resolver
            one = sel[res.allows_one(sel)].astype(np.float64)
            terms.extend((np.log(one) / one).tolist())
            for p in sel[sel * sel <= x].tolist():
                row = chi_row(res.exponents(p), emax)
                c = coefficients_recursive(row)
                pe = p * p
                e = 2
                while pe <= x:
                    if c[e]:
                        terms.append(c[e] * math.log(p) / pe)
                    pe *= p
                    e += 1
            continue
        c = coefficients_recursive(chi_row(rule.exp, emax))
        for e in range(1, emax + 1):
            if not c[e]:
                continue
            sub = sel[sel <= iroot(x, e)]
            if not len(sub):
                continue
            f = np.asarray(sub, dtype=np.float64)
            terms.extend((c[e] * np.log(f) / f**e).tolist())
    return math.fsum(terms)


def generator_sum(desc: SetDescriptor, x: float, primes: PrimeTable | None = None) -> float:
    """sum over semigroup generators g <= x of log g / (g - 1)."""
    if not desc.is_semigroup:
        raise ValueError(f"{desc.name} is not a free multiplicative semigroup")
    x = math.floor(x)
    if x < 2:
        return 0.0
    if primes is None or primes.bound < x:
        primes = primes_up_to(x)
    ps = primes.upto(x)
    idx = rule_indices(desc, ps)
    terms: list[float] = []
    for i, rule in enumerate(desc.rules):
        k = rule.exp.generator_step
        if not k:
            continue
        sel = ps[idx == i]
        sel = sel[sel <= iroot(x, k)]
        g = np.asarray(sel, dtype=np.float64) ** k
        terms.extend((np.log(g) / (g - 1)).tolist())
    return math.fsum(terms)
