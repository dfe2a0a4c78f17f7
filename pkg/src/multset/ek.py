"""Euler-Kronecker constants of multiplicative sets.

Two families of estimators live here.  The partial-sum estimator works for
any descriptor the sieve can handle and carries only a heuristic error.  The
L-function estimators apply to sets whose Dirichlet series factor through
zeta(s), L(s, chi_D) and finitely many local corrections; they are evaluated
to the working precision of a :class:`PrecisionContext`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd

import mpmath
from mpmath import mpf

from .lfun import (
    DEFAULT_CTX,
    ConvergenceError,
    DiscriminantError,
    PrecisionContext,
    agm,
    euler_gamma,
    is_fundamental_discriminant,
    kronecker,
    L_log_deriv,
    l_log_deriv_at_1,
    prime_divisors,
    zeta_log_deriv,
)
from .mangoldt import generator_sum, mangoldt_partial_sum
from .setspec import (
    ALL,
    EVEN,
    NONE,
    ExplicitPrime,
    ExponentRule,
    SetDescriptor,
    _first_class_rule,
    classify_prime,
    resolve_set,
)
from .sieve import PrimeTable, primes_up_to

__all__ = [
    "EKEstimate",
    "QuadraticStructure",
    "ek_partial_sum",
    "doubling_term",
    "doubling_terms",
    "prime_square_sum",
    "prime_square_sum_mobius",
    "chi_prime_sum",
    "ek_quadratic",
    "ek_sum_two_squares",
    "ek_nonhypotenuse",
    "ek_sprime_quadratic",
    "sprime_expressions",
    "lcm_constant",
    "lcm_constant_direct",
    "quadratic_structure",
    "ek_lfunction",
    "ProgressionConsistency",
    "progression_consistency",
]

MIN_PARTIAL_X = 100
DOUBLING_MAX_K = 12
MOBIUS_CUTOFF = 1000


@dataclass(frozen=True)
class EKEstimate:
    """An estimate of gamma_S.

    ``truncation`` is the sieve limit x for the partial-sum method and the
    number of doubling-series terms for the L-function method.  ``error`` is
    a bound on the L-function path and an order-of-magnitude guess
    (1/log x, constant unknown) on the partial-sum path.
    """

    name: str
    value: float
    method: str
    truncation: int
    error: float
    notes: tuple[str, ...] = ()
    exact: mpf | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.method not in ("partial-sum", "lfunction", "derived"):
            raise ValueError(f"unknown method {self.method!r}")

    def __float__(self) -> float:
        return self.value

    def as_dict(self) -> dict:
        out = {
            "set": self.name,
            "value": self.value,
            "method": self.method,
            "truncation": self.truncation,
            "error": self.error,
            "notes": list(self.notes),
        }
        if self.exact is not None:
            out["digits"] = mpmath.nstr(self.exact, 20)
        return out


def _lfun_estimate(name: str, value: mpf, method: str, terms: int, error,
                   notes=()) -> EKEstimate:
    return EKEstimate(name, float(value), method, int(terms), float(error), tuple(notes), value)


# ---------------------------------------------------------------------------
# partial sums


def ek_partial_sum(desc: SetDescriptor, x: int, primes: PrimeTable | None = None) -> EKEstimate:
    """delta log x - sum_{n <= x} Lambda_S(n)/n, or the generator form
    delta log x - sum_{q <= x} log q/(q - 1) for free semigroups."""
    x = int(x)
    if x < MIN_PARTIAL_X:
        raise ValueError(f"partial-sum estimator needs x >= {MIN_PARTIAL_X}")
    if primes is None or primes.bound < x:
        primes = primes_up_to(x)
    delta = float(desc.delta)
    if desc.is_semigroup:
        value = delta * math.log(x) - generator_sum(desc, x, primes)
        note = "generator form"
    else:
        value = delta * math.log(x) - mangoldt_partial_sum(desc, x, primes)
        note = "von Mangoldt form"
    return EKEstimate(desc.name, value, "partial-sum", x, 1.0 / math.log(x),
                      (note, "heuristic error c/log x, c unknown"))


# ---------------------------------------------------------------------------
# prime sums over inert primes


def _check_negative_discriminant(D: int) -> None:
    if D >= 0 or not is_fundamental_discriminant(D):
        raise DiscriminantError(f"{D} is not a negative fundamental discriminant")


def _ramified_correction(D: int, s) -> mpf:
    return mpmath.fsum(mpmath.log(p) / (mpf(p) ** s - 1) for p in prime_divisors(abs(D)))


def doubling_term(D: int, k: int, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """L'/L(2^k) - zeta'/zeta(2^k) - sum_{p|D} log p/(p^{2^k} - 1)."""
    with mpmath.workdps(ctx.dps):
        s = mpf(2) ** k
        return L_log_deriv(s, D, ctx) - zeta_log_deriv(s, ctx) - _ramified_correction(D, s)


def doubling_terms(D: int, count: int, ctx: PrecisionContext = DEFAULT_CTX) -> list[mpf]:
    """The first ``count`` terms of the doubling series for the inert-prime sum."""
    _check_negative_discriminant(D)
    return [doubling_term(D, k, ctx) for k in range(1, count + 1)]


@lru_cache(maxsize=256)
def _prime_square_sum(D: int, ctx: PrecisionContext) -> tuple[mpf, int, mpf]:
    _check_negative_discriminant(D)
    total = mpf(0)
    with mpmath.workdps(ctx.dps):
        for k in range(1, DOUBLING_MAX_K + 1):
            term = doubling_term(D, k, ctx)
            total += term
            if abs(term) < ctx.eps:
                # the next term is roughly the square of this one
                return +total, k, max(abs(term), ctx.eps) * k
        raise ConvergenceError(f"doubling series for D={D} did not settle")


def prime_square_sum(D: int, ctx: PrecisionContext = DEFAULT_CTX, *,
                     with_error: bool = False):
    """sum over primes with (D/p) = -1 of 2 log p/(p^2 - 1), by the doubling series."""
    value, terms, err = _prime_square_sum(int(D), ctx)
    if with_error:
        return value, terms, err
    return value


def _mobius(m: int) -> int:
    ps = prime_divisors(m)
    prod = 1
    for p in ps:
        prod *= p
    return 0 if prod != m else (-1) ** len(ps)


@lru_cache(maxsize=64)
def prime_square_sum_mobius(D: int, ctx: PrecisionContext = DEFAULT_CTX,
                            cutoff: int = MOBIUS_CUTOFF) -> mpf:
    """The same inert-prime sum computed differently: primes up to ``cutoff``
    directly, the tail from prime-zeta style sums obtained by Mobius
    inversion of -zeta'/zeta and -L'/L at integer arguments."""
    _check_negative_discriminant(D)
    cutoff = max(cutoff, abs(D) + 1)
    ps = primes_up_to(cutoff).primes.tolist()
    with mpmath.workdps(ctx.dps):
        eps = ctx.eps * mpf(10) ** -3
        smax = int(math.ceil(ctx.dps * math.log(10) / math.log(cutoff))) + 2
        logs = {p: mpmath.log(p) for p in ps}
        chis = {p: kronecker(D, p) for p in ps}

        @lru_cache(maxsize=None)
        def Z(s: int) -> mpf:
            # sum_{p > cutoff} log p / (p^s - 1) = sum_m A(ms)
            head = mpmath.fsum(logs[p] / (mpf(p) ** s - 1) for p in ps)
            return -zeta_log_deriv(s, ctx) - head

        @lru_cache(maxsize=None)
        def Y(s: int) -> mpf:
            # sum_{p > cutoff} chi(p) log p / (p^s - chi(p))
            head = mpmath.fsum(chis[p] * logs[p] / (mpf(p) ** s - chis[p]) for p in ps if chis[p])
            return -L_log_deriv(s, D, ctx) - head

        @lru_cache(maxsize=None)
        def A(s: int) -> mpf:
            # sum_{p > cutoff} log p p^-s
            if s > smax:
                return mpf(0)
            return mpmath.fsum(_mobius(m) * Z(m * s) for m in range(1, smax // s + 1)
                               if _mobius(m))

        @lru_cache(maxsize=None)
        def B(s: int) -> mpf:
            # sum_{p > cutoff} chi(p) log p p^-s
            if s > smax:
                return mpf(0)
            rest = mpf(0)
            for m in range(2, smax // s + 1):
                rest += A(m * s) if m % 2 == 0 else B(m * s)
            return Y(s) - rest

        head = mpmath.fsum(2 * logs[p] / (mpf(p) ** 2 - 1) for p in ps if chis[p] == -1)
        tail = mpmath.fsum(A(2 * j) - B(2 * j) for j in range(1, smax // 2 + 1))
        if abs(A(2 * (smax // 2))) > eps * 10**3:
            raise ConvergenceError("Mobius tail did not decay")
        return +(head + tail)


def chi_prime_sum(D: int, ctx: PrecisionContext = DEFAULT_CTX, route: str = "series") -> mpf:
    """sum_p (D/p) log p/(p - 1).

    ``series``: -L'/L(1) minus the doubling series, summed term by term.
    ``mobius``: -L'/L(1) minus the inert-prime sum computed by Mobius inversion.
    """
    _check_negative_discriminant(D)
    with mpmath.workdps(ctx.dps):
        head = -l_log_deriv_at_1(D, ctx)
        if route == "series":
            _, terms, _ = prime_square_sum(D, ctx, with_error=True)
            return head + mpmath.fsum(-t for t in doubling_terms(D, terms, ctx))
        if route == "mobius":
            return head - prime_square_sum_mobius(D, ctx)
    raise ValueError(f"unknown route {route!r}")


# ---------------------------------------------------------------------------
# quadratic semigroups


def _ramified_log_sum(D: int) -> mpf:
    return mpmath.fsum(mpmath.log(p) / (p - 1) for p in prime_divisors(abs(D)))


def ek_quadratic(D: int, ctx: PrecisionContext = DEFAULT_CTX) -> EKEstimate:
    """gamma of the set built from primes with (D/p) = 1 (any exponent) and
    (D/p) = -1 (even exponents), ramified primes excluded."""
    _check_negative_discriminant(D)
    with mpmath.workdps(ctx.dps):
        pss, terms, err = prime_square_sum(D, ctx, with_error=True)
        two_gamma = (euler_gamma(ctx) + l_log_deriv_at_1(D, ctx) - pss + _ramified_log_sum(D))
        value = two_gamma / 2
    return _lfun_estimate(f"quadsem:{D}", value, "lfunction", terms, err + 10 * ctx.eps)


def _agm_route(ctx: PrecisionContext) -> mpf:
    """gamma/2 + (1/2) log(M(1, sqrt 2)^2 e^gamma / 2) - log 2/2 - sum_{p = 3 (4)} log p/(p^2 - 1)."""
    with mpmath.workdps(ctx.dps):
        g = euler_gamma(ctx)
        M = agm(1, mpmath.sqrt(2), ctx)
        llog = mpmath.log(M * M * mpmath.exp(g) / 2)
        return g / 2 + llog / 2 - mpmath.log(2) / 2 - prime_square_sum_mobius(-4, ctx) / 2


def ek_sum_two_squares(ctx: PrecisionContext = DEFAULT_CTX) -> EKEstimate:
    """gamma for sums of two squares, from the D = -4 semigroup and checked
    against the AGM closed form of L'/L(1, chi_{-4})."""
    quad = ek_quadratic(-4, ctx)
    with mpmath.workdps(ctx.dps):
        via_quad = quad.exact - mpmath.log(2)
        via_agm = _agm_route(ctx)
        gap = abs(via_quad - via_agm)
    if gap > mpf(10) ** -(ctx.digits - 4):
        raise ConvergenceError(f"the two routes to gamma(sum2sq) differ by {mpmath.nstr(gap, 3)}")
    return _lfun_estimate("sum2sq", via_quad, "lfunction", quad.truncation,
                          quad.error + float(gap),
                          (f"AGM route agrees to {mpmath.nstr(gap, 3)}",))


def ek_nonhypotenuse(ctx: PrecisionContext = DEFAULT_CTX) -> EKEstimate:
    """gamma of the semigroup generated by 2 and the primes 3 (mod 4)."""
    base = ek_sum_two_squares(ctx)
    with mpmath.workdps(ctx.dps):
        value = base.exact - l_log_deriv_at_1(-4, ctx)
        g = euler_gamma(ctx)
        alt = (g - mpmath.log(2) + chi_prime_sum(-4, ctx, "series")) / 2
        gap = abs(value - alt)
    return _lfun_estimate("nonhyp", value, "derived", base.truncation, base.error + float(gap),
                          (f"prime-sum form agrees to {mpmath.nstr(gap, 3)}",))


def sprime_expressions(D: int, ctx: PrecisionContext = DEFAULT_CTX) -> tuple[mpf, mpf, mpf]:
    """Three expressions for 2 gamma of the semigroup on primes with (D/p) = -1."""
    _check_negative_discriminant(D)
    with mpmath.workdps(ctx.dps):
        g = euler_gamma(ctx)
        ld = l_log_deriv_at_1(D, ctx)
        ram = _ramified_log_sum(D)
        first = 2 * ek_quadratic(D, ctx).exact - 2 * ld
        second = g - ld - prime_square_sum(D, ctx) + ram
        third = g + chi_prime_sum(D, ctx, "mobius") + ram
        return first, second, third


def ek_sprime_quadratic(D: int, ctx: PrecisionContext = DEFAULT_CTX) -> EKEstimate:
    first, second, third = sprime_expressions(D, ctx)
    with mpmath.workdps(ctx.dps):
        spread = max(abs(first - second), abs(first - third), abs(second - third))
        value = first / 2
    _, terms, err = prime_square_sum(D, ctx, with_error=True)
    return _lfun_estimate(f"sprime:{D}", value, "lfunction", terms, float(err + spread) + 1e-30,
                          (f"three expressions agree to {mpmath.nstr(spread, 3)}",))


def lcm_constant(ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """Constant J in log lcm(1^2+1, ..., n^2+1) = n log n + J n + o(n)."""
    nh = ek_nonhypotenuse(ctx).exact
    with mpmath.workdps(ctx.dps):
        g = euler_gamma(ctx)
        return +(2 * g - 1 - mpmath.mpf(3) / 2 * mpmath.log(2) - 2 * nh)


def lcm_constant_direct(ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """J = gamma - 1 - log 2/2 - sum_{p > 2} (-1/p) log p/(p - 1)."""
    with mpmath.workdps(ctx.dps):
        g = euler_gamma(ctx)
        return +(g - 1 - mpmath.log(2) / 2 - chi_prime_sum(-4, ctx, "mobius"))


# ---------------------------------------------------------------------------
# general L-function route


@dataclass(frozen=True)
class QuadraticStructure:
    """L_S(s) = base(s) * prod_p (local_S(p) / local_base(p)) over finitely
    many exceptional primes.  ``kind`` is ``zeta``, ``quadsem`` or ``sprime``."""

    kind: str
    D: int
    exceptions: tuple[tuple[int, ExponentRule, ExponentRule], ...]


def _base_rule(kind: str, D: int, p: int) -> ExponentRule:
    if kind == "zeta":
        return ALL
    c = kronecker(D, p)
    if kind == "quadsem":
        return {1: ALL, -1: EVEN, 0: NONE}[c]
    return {1: NONE, -1: ALL, 0: NONE}[c]


def _same_rule(a: ExponentRule, b: ExponentRule, upto: int = 64) -> bool:
    return all((e in a) == (e in b) for e in range(1, upto + 1))


def _candidate_discriminants(M: int) -> list[int]:
    out = []
    for d in range(3, M + 1):
        if M % d == 0 and is_fundamental_discriminant(-d):
            out.append(-d)
    return out


def quadratic_structure(desc: SetDescriptor) -> QuadraticStructure | None:
    """Recognise sets whose exponent rules follow a quadratic character
    (or no character at all) outside finitely many primes."""
    if desc.predicate is not None:
        return None
    M = desc.modulus
    classes = [r for r in range(1, M + 1) if gcd(r, M) == 1]
    special = set(prime_divisors(M))
    for rule in desc.rules:
        if isinstance(rule.cond, ExplicitPrime):
            special.add(rule.cond.p)
    candidates = [("zeta", 1)]
    for D in _candidate_discriminants(M):
        candidates += [("quadsem", D), ("sprime", D)]
    for kind, D in candidates:
        if kind != "zeta" and not any(kronecker(D, r) == -1 for r in classes):
            continue
        ok = True
        for r in classes:
            rule = _first_class_rule(desc.rules, r)
            base = ALL if kind == "zeta" else _base_rule(kind, D, r)
            if rule is None or not _same_rule(rule.exp, base):
                ok = False
                break
        if not ok:
            continue
        exceptions = []
        for p in sorted(special):
            actual = classify_prime(desc, p)
            base = _base_rule(kind, D, p)
            if not _same_rule(actual, base):
                exceptions.append((p, actual, base))
        return QuadraticStructure(kind, D, tuple(exceptions))
    return None


def _local_log_derivative(rule: ExponentRule, p: int) -> mpf:
    """d/ds log sum_{e in E} p^{-es} at s = 1."""
    x = mpf(1) / p
    if rule.kind == "all":
        f, xf = 1 / (1 - x), x / (1 - x) ** 2
    elif rule.kind == "even":
        f, xf = 1 / (1 - x * x), 2 * x * x / (1 - x * x) ** 2
    elif rule.kind == "none":
        f, xf = mpf(1), mpf(0)
    else:
        t = rule.tail
        finite = [v for v in rule.values if t is None or v < t]
        f = 1 + mpmath.fsum(x**v for v in finite)
        xf = mpmath.fsum(v * x**v for v in finite)
        if t is not None:
            f += x**t / (1 - x)
            xf += x**t * (t - (t - 1) * x) / (1 - x) ** 2
    return -mpmath.log(p) * xf / f


def ek_lfunction(desc: SetDescriptor, ctx: PrecisionContext = DEFAULT_CTX) -> EKEstimate:
    """L-function value of gamma_S for sets with a recognised quadratic structure."""
    if desc.name == "sum2sq":
        return ek_sum_two_squares(ctx)
    if desc.name == "nonhyp":
        return ek_nonhypotenuse(ctx)
    st = quadratic_structure(desc)
    if st is None:
        raise ValueError(f"{desc.name}: no L-function factorisation known; use partial-sum")
    with mpmath.workdps(ctx.dps):
        if st.kind == "zeta":
            base = _lfun_estimate("naturals", euler_gamma(ctx), "lfunction", 0, ctx.eps)
        elif st.kind == "quadsem":
            base = ek_quadratic(st.D, ctx)
        else:
            base = ek_sprime_quadratic(st.D, ctx)
        value = base.exact + mpmath.fsum(
            _local_log_derivative(actual, p) - _local_log_derivative(b, p)
            for p, actual, b in st.exceptions)
    notes = [f"base {st.kind}" + ("" if st.kind == "zeta" else f" D={st.D}")]
    notes += [f"local factor at {p}: {a.text()} instead of {b.text()}" for p, a, b in st.exceptions]
    return _lfun_estimate(desc.name, value, "lfunction", base.truncation,
                          base.error + 10 * float(ctx.eps), notes)


# ---------------------------------------------------------------------------
# primes in a progression 1 mod q and its complement


THRESHOLD_NOTES = {
    "small": "expected bound for q <= 7: gamma > 0.5247 (not checked at estimator precision)",
    "large": "expected bound for q > 7: gamma < 0.2862 (not checked at estimator precision)",
}


@dataclass(frozen=True)
class ProgressionConsistency:
    q: int
    x: int
    gamma_progression: EKEstimate
    gamma_phi: EKEstimate
    target: float
    residual: float
    notes: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "q": self.q,
            "x": self.x,
            "gamma_progression": self.gamma_progression.as_dict(),
            "gamma_phi": self.gamma_phi.as_dict(),
            "target": self.target,
            "residual": self.residual,
            "notes": list(self.notes),
        }


def progression_consistency(q: int, x: int, primes: PrimeTable | None = None) -> ProgressionConsistency:
    """Partial-sum estimates for progsem:q:1 and phi-nondiv:q; their sum
    should approach gamma + 2 log q/(q^2 - 1)."""
    if q < 3 or prime_divisors(q) != [q]:
        raise ValueError("q must be an odd prime")
    if primes is None or primes.bound < x:
        primes = primes_up_to(x)
    prog = ek_partial_sum(resolve_set(f"progsem:{q}:1"), x, primes)
    phi = ek_partial_sum(resolve_set(f"phi-nondiv:{q}"), x, primes)
    target = float(euler_gamma(DEFAULT_CTX)) + 2 * math.log(q) / (q * q - 1)
    residual = prog.value + phi.value - target
    note = THRESHOLD_NOTES["small" if q <= 7 else "large"]
    return ProgressionConsistency(q, x, prog, phi, target, residual, (note,))

