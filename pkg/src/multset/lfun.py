"""Extended-precision special values: zeta, Dirichlet L-functions of quadratic
characters, digamma and first Stieltjes constants, AGM, Gamma.

Everything here runs on :mod:`mpmath` multiprecision floats.  Sums over
integers are evaluated by Euler-Maclaurin summation with an explicit
remainder check, so a result is either accurate to the requested tolerance or
a :class:`ConvergenceError` is raised.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mpf

__all__ = [
    "ConvergenceError",
    "DiscriminantError",
    "PrecisionContext",
    "QuadraticCharacter",
    "kronecker",
    "jacobi",
    "is_fundamental_discriminant",
    "euler_gamma",
    "gamma_function",
    "agm",
    "lemniscate_constant",
    "hurwitz_zeta",
    "digamma",
    "stieltjes1",
    "zeta",
    "zeta_prime",
    "zeta_log_deriv",
    "L",
    "L_prime",
    "L_log_deriv",
    "l_log_deriv_at_1",
]

# 60 correct digits.
EULER_GAMMA = "0.577215664901532860606512090082402431042159335939923598805767"

GUARD_DIGITS = 12


class ConvergenceError(ArithmeticError):
    """A series could not be summed to the requested tolerance."""


class DiscriminantError(ValueError):
    pass


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision for the L-function path.

    ``digits`` is the number of significant decimal digits requested in the
    final results; internally ``GUARD_DIGITS`` more are carried.
    """

    digits: int = 30
    tol: float | None = None

    def __post_init__(self):
        if self.digits < 15:
            raise ValueError("precision must be at least 15 digits")

    @property
    def eps(self) -> mpf:
        if self.tol is not None:
            return mpf(self.tol)
        return mpf(10) ** (-self.digits)

    @property
    def dps(self) -> int:
        return self.digits + GUARD_DIGITS


DEFAULT_CTX = PrecisionContext()


# ---------------------------------------------------------------------------
# Kronecker symbol and quadratic characters


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("n must be odd and positive")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D/n) for n >= 1."""
    if n < 1:
        raise ValueError("n must be positive")
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if D % 2 == 0:
            return 0
        two = 1 if D % 8 in (1, 7) else -1
        sign = two ** (v % 2)
    else:
        sign = 1
    if n == 1:
        return sign
    return sign * jacobi(D, n)


def _squarefree(m: int) -> bool:
    d = 2
    while d * d <= m:
        if m % (d * d) == 0:
            return False
        d += 1
    return True


def is_fundamental_discriminant(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return _squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def prime_divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class QuadraticCharacter:
    """The character n -> (D/n) attached to a fundamental discriminant D."""

    D: int

    def __post_init__(self):
        if not is_fundamental_discriminant(self.D):
            raise DiscriminantError(f"{self.D} is not a fundamental discriminant")

    @property
    def modulus(self) -> int:
        return abs(self.D)

    @property
    def values(self) -> tuple[int, ...]:
        """Values on residues 0..|D|-1 (period table)."""
        return _char_table(self.D)

    @property
    def ramified_primes(self) -> list[int]:
        return prime_divisors(self.D)

    def __call__(self, n: int) -> int:
        return self.values[n % self.modulus]


@lru_cache(maxsize=None)
def _char_table(D: int) -> tuple[int, ...]:
    q = abs(D)
    return tuple(kronecker(D, r) if r else 0 for r in range(q))


# ---------------------------------------------------------------------------
# Constants, Gamma, AGM


def euler_gamma(ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    if ctx.dps > 60:
        raise ConvergenceError("embedded Euler constant carries 60 digits")
    with mpmath.workdps(ctx.dps):
        return +mpf(EULER_GAMMA)


@lru_cache(maxsize=None)
def _bernoulli(dps: int, count: int) -> tuple[mpf, ...]:
    """B_2, B_4, ..., B_{2*count} at the given precision."""
    with mpmath.workdps(dps):
        return tuple(mpmath.bernoulli(2 * k) for k in range(1, count + 1))


def _em_plan(dps: int, s) -> tuple[int, int]:
    """(number of direct terms, number of Bernoulli corrections)."""
    m = int(dps / 1.2) + 5
    n = int(0.64 * (float(s) + 2 * m)) + 5
    return n, m


def gamma_function(x, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """Gamma(x) for real x > 0 via Stirling's series after an upward shift."""
    with mpmath.workdps(ctx.dps):
        x = mpf(x)
        if x <= 0:
            raise ValueError("x must be positive")
        n_direct, m = _em_plan(ctx.dps, 0)
        shift = max(0, int(n_direct - x) + 1)
        y = x + shift
        bern = _bernoulli(ctx.dps, m)
        lg = (y - mpf(0.5)) * mpmath.log(y) - y + mpmath.log(2 * mpmath.pi) / 2
        last = mpf(0)
        for k in range(1, m + 1):
            last = bern[k - 1] / (2 * k * (2 * k - 1) * y ** (2 * k - 1))
            lg += last
        if abs(last) > ctx.eps * mpf(10) ** -4:
            raise ConvergenceError("Stirling series did not converge")
        prod = mpf(1)
        for j in range(shift):
            prod *= x + j
        return +(mpmath.exp(lg) / prod)


def agm(a, b, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """Arithmetic-geometric mean of two positive reals."""
    with mpmath.workdps(ctx.dps):
        a, b = mpf(a), mpf(b)
        if a <= 0 or b <= 0:
            raise ValueError("agm needs positive arguments")
        tol = mpf(10) ** (-ctx.dps + 2)
        for _ in range(200):
            if abs(a - b) <= tol * a:
                return +((a + b) / 2)
            a, b = (a + b) / 2, mpmath.sqrt(a * b)
        raise ConvergenceError("agm iteration did not settle")


def lemniscate_constant(ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    with mpmath.workdps(ctx.dps):
        return +(mpmath.pi / agm(1, mpmath.sqrt(2), ctx))


# ---------------------------------------------------------------------------
# Euler-Maclaurin kernels


def hurwitz_zeta(s, a, ctx: PrecisionContext = DEFAULT_CTX) -> tuple[mpf, mpf]:
    """Return (zeta(s, a), d/ds zeta(s, a)) for real s > 1, a > 0."""
    with mpmath.workdps(ctx.dps):
        s, a = mpf(s), mpf(a)
        if s <= 1:
            raise ValueError("hurwitz_zeta needs s > 1")
        n_direct, m = _em_plan(ctx.dps, s)
        val = mpf(0)
        der = mpf(0)
        for n in range(n_direct):
            t = (n + a) ** -s
            val += t
            der -= mpmath.log(n + a) * t
        u = n_direct + a
        logu = mpmath.log(u)
        us = u ** -s
        t0 = u * us / (s - 1)
        val += t0 + us / 2
        der += -logu * t0 - t0 / (s - 1) - logu * us / 2
        bern = _bernoulli(ctx.dps, m + 1)
        rising = s  # (s)_{2k-1}
        recip = 1 / s  # sum_{i<2k-1} 1/(s+i)
        fact = mpf(2)  # (2k)!
        upow = us / u  # u^{-s-2k+1}
        term = mpf(0)
        for k in range(1, m + 2):
            term = bern[k - 1] / fact * rising * upow
            if k == m + 1:
                break
            val += term
            der += term * (recip - logu)
            rising *= (s + 2 * k - 1) * (s + 2 * k)
            recip += 1 / (s + 2 * k - 1) + 1 / (s + 2 * k)
            fact *= (2 * k + 1) * (2 * k + 2)
            upow /= u * u
        if abs(term) > ctx.eps * abs(val) * mpf(10) ** -4:
            raise ConvergenceError("Euler-Maclaurin remainder too large")
        return val, der


def digamma(a, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """psi(a) for a > 0."""
    with mpmath.workdps(ctx.dps):
        a = mpf(a)
        n_direct, m = _em_plan(ctx.dps, 1)
        total = mpf(0)
        for n in range(n_direct):
            total += 1 / (n + a)
        u = n_direct + a
        val = mpmath.log(u) - total - 1 / (2 * u)
        bern = _bernoulli(ctx.dps, m + 1)
        term = mpf(0)
        for k in range(1, m + 2):
            term = bern[k - 1] / (2 * k * u ** (2 * k))
            if k == m + 1:
                break
            val -= term
        if abs(term) > ctx.eps * mpf(10) ** -4:
            raise ConvergenceError("digamma remainder too large")
        return val


def stieltjes1(a, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """First generalized Stieltjes constant gamma_1(a), a > 0.

    zeta(s, a) = 1/(s-1) - psi(a) - gamma_1(a) (s-1) + O((s-1)^2).
    """
    with mpmath.workdps(ctx.dps):
        a = mpf(a)
        n_direct, m = _em_plan(ctx.dps, 1)
        val = mpf(0)
        for n in range(n_direct):
            val += mpmath.log(n + a) / (n + a)
        u = n_direct + a
        logu = mpmath.log(u)
        val += -logu ** 2 / 2 + logu / (2 * u)
        bern = _bernoulli(ctx.dps, m + 1)
        harmonic = mpf(1)  # H_{2k-1}
        term = mpf(0)
        for k in range(1, m + 2):
            term = bern[k - 1] / (2 * k) * u ** (-2 * k) * (logu - harmonic)
            if k == m + 1:
                break
            val += term
            harmonic += mpf(1) / (2 * k) + mpf(1) / (2 * k + 1)
        if abs(term) > ctx.eps * mpf(10) ** -4:
            raise ConvergenceError("Stieltjes remainder too large")
        return val


# ---------------------------------------------------------------------------
# zeta and L


def zeta(s, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    return hurwitz_zeta(s, 1, ctx)[0]


def zeta_prime(s, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    return hurwitz_zeta(s, 1, ctx)[1]


@lru_cache(maxsize=4096)
def _zeta_log_deriv_cached(s: mpf, ctx: PrecisionContext) -> mpf:
    val, der = hurwitz_zeta(s, 1, ctx)
    with mpmath.workdps(ctx.dps):
        return der / val


def zeta_log_deriv(s, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """zeta'(s)/zeta(s) for real s > 1."""
    if s <= 1:
        raise ValueError("zeta_log_deriv needs s > 1")
    return _zeta_log_deriv_cached(mpf(s), ctx)


def _as_character(chi) -> QuadraticCharacter:
    return chi if isinstance(chi, QuadraticCharacter) else QuadraticCharacter(int(chi))


@lru_cache(maxsize=4096)
def _L_pair(s: mpf, D: int, ctx: PrecisionContext) -> tuple[mpf, mpf]:
    chi = QuadraticCharacter(D)
    q = chi.modulus
    with mpmath.workdps(ctx.dps):
        logq = mpmath.log(q)
        if s == 1:
            A = mpf(0)
            B = mpf(0)
            for r in range(1, q):
                c = chi.values[r]
                if c:
                    A -= c * digamma(mpf(r) / q, ctx)
                    B -= c * stieltjes1(mpf(r) / q, ctx)
            return A / q, (B - A * logq) / q
        val = mpf(0)
        der = mpf(0)
        for r in range(1, q):
            c = chi.values[r]
            if c:
                hv, hd = hurwitz_zeta(s, mpf(r) / q, ctx)
                val += c * hv
                der += c * hd
        scale = mpf(q) ** -s
        val *= scale
        der = scale * der - logq * val
        return val, der


def _check_s(s):
    if s < 1:
        raise ValueError("L-functions are evaluated for real s >= 1 only")


def L(s, chi, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """L(s, chi_D) for real s >= 1."""
    _check_s(s)
    return _L_pair(mpf(s), _as_character(chi).D, ctx)[0]


def L_prime(s, chi, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """d/ds L(s, chi_D) for real s >= 1."""
    _check_s(s)
    return _L_pair(mpf(s), _as_character(chi).D, ctx)[1]


def L_log_deriv(s, chi, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    _check_s(s)
    val, der = _L_pair(mpf(s), _as_character(chi).D, ctx)
    with mpmath.workdps(ctx.dps):
        return der / val


def l_log_deriv_at_1(D: int, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """L'/L(1, chi_D) for a negative fundamental discriminant D."""
    if D >= 0 or not is_fundamental_discriminant(D):
        raise DiscriminantError(f"{D} is not a negative fundamental discriminant")
    return L_log_deriv(1, D, ctx)

