"""Wirsing constants and the Landau / Ramanujan approximations.

For a set S of prime density delta the counting function behaves like
C0 x log^{delta-1} x.  Two competing approximants are compared here::

    landau(x)    = C0 x log^{delta-1} x
    ramanujan(x) = C0 int_2^x log^{delta-1} t dt

Which of them is asymptotically closer is decided by the sign of
gamma_S - 1/2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from mpmath import mpf
from scipy import integrate

from .ek import EKEstimate, quadratic_structure
from .lfun import (
    DEFAULT_CTX,
    ConvergenceError,
    PrecisionContext,
    L,
    gamma_function,
    prime_divisors,
    zeta,
)
from .setspec import Predicate, SetDescriptor
from .sieve import CharTable, PrimeTable, primes_up_to, rule_indices

__all__ = [
    "WirsingConstant",
    "ApproxComparison",
    "wirsing_C0",
    "wirsing_direct",
    "wirsing_accelerated",
    "inert_euler_product",
    "c1",
    "landau_approx",
    "ramanujan_approx",
    "winner",
    "empirical_compare",
    "LANDAU",
    "RAMANUJAN",
    "UNDECIDED",
]

LANDAU = "Landau"
RAMANUJAN = "Ramanujan"
UNDECIDED = "undecided"

DIRECT_P = 10**8
QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class WirsingConstant:
    name: str
    value: float
    method: str
    error: float
    P: int | None = None
    notes: tuple[str, ...] = ()

    def __float__(self) -> float:
        return self.value

    def as_dict(self) -> dict:
        return {"set": self.name, "value": self.value, "method": self.method,
                "error": self.error, "P": self.P, "notes": list(self.notes)}


# ---------------------------------------------------------------------------
# direct Euler product


def _local_sums(desc: SetDescriptor, ps: np.ndarray) -> np.ndarray:
    """sum_{e in E(p)} p^{-e} for every prime in ``ps``."""
    idx = rule_indices(desc, ps)
    out = np.empty(len(ps), dtype=np.float64)
    x = 1.0 / ps.astype(np.float64)
    for i, rule in enumerate(desc.rules):
        sel = idx == i
        if not sel.any():
            continue
        if isinstance(rule.cond, Predicate):
            res = rule.cond.resolver
            out[sel] = [res.exponents(int(p)).local_sum(1.0 / p) for p in ps[sel].tolist()]
        else:
            out[sel] = rule.exp.local_sum(x[sel])
    return out


def _log_partial_products(desc: SetDescriptor, ps: np.ndarray) -> np.ndarray:
    """Running sums of log(local(p) (1 - 1/p)^delta) in prime order."""
    delta = float(desc.delta)
    x = 1.0 / ps.astype(np.float64)
    terms = np.log(_local_sums(desc, ps)) + delta * np.log1p(-x)
    return np.cumsum(terms)


def wirsing_direct(desc: SetDescriptor, P: int = DIRECT_P, *, extrapolate: bool = False,
                   primes: PrimeTable | None = None) -> WirsingConstant:
    """(1/Gamma(delta)) prod_{p < P} local(p) (1 - 1/p)^delta.

    The error column is the change between P/10 and P.  With ``extrapolate``
    the values at P/100, P/10, P are fitted by c + a/log P + b/log^2 P and
    c is returned instead.
    """
    pred = desc.predicate
    if pred is not None:
        P = min(P, pred.resolver.bound)
    if P < 1000:
        raise ValueError("direct product needs P >= 1000")
    if primes is None or primes.bound < P:
        primes = primes_up_to(P)
    ps = primes.upto(P - 1)
    logs = _log_partial_products(desc, ps)
    checkpoints = [P // 100, P // 10, P]
    vals = []
    for c in checkpoints:
        k = int(np.searchsorted(ps, c, side="left"))
        vals.append(float(logs[k - 1]) if k else 0.0)
    inv_gamma = 1.0 / float(gamma_function(float(desc.delta)))
    prods = [inv_gamma * math.exp(v) for v in vals]
    err = abs(prods[2] - prods[1])
    if not extrapolate:
        return WirsingConstant(desc.name, prods[2], "direct", err, P,
                               ("error is the change from P/10 to P",))
    u = np.array([1 / math.log(c) for c in checkpoints])
    A = np.vstack([np.ones(3), u, u * u]).T
    coef = np.linalg.solve(A, np.array(prods))
    return WirsingConstant(desc.name, float(coef[0]), "direct-extrapolated",
                           max(err, abs(coef[0] - prods[2])), P,
                           ("fit c + a/log P + b/log^2 P at P/100, P/10, P",))


# ---------------------------------------------------------------------------
# accelerated path for quadratic sets


def inert_euler_product(D: int, ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """prod over primes with (D/p) = -1 of (1 - p^{-2})^{-1}.

    With R(s) = zeta(s) prod_{p|D}(1 - p^{-s}) / L(s, chi_D), which equals
    prod_inert (1 + p^{-s})/(1 - p^{-s}), the log of the product is
    sum_{k >= 0} 2^{-k-1} log R(2^{k+1}).
    """
    ram = prime_divisors(abs(D))
    with mpmath.workdps(ctx.dps):
        total = mpf(0)
        for k in range(0, 40):
            s = mpf(2) ** (k + 1)
            R = zeta(s, ctx) / L(s, D, ctx)
            for p in ram:
                R *= 1 - mpf(p) ** -s
            term = mpmath.log(R) / mpf(2) ** (k + 1)
            total += term
            if abs(term) < ctx.eps:
                return mpmath.exp(total)
    raise ConvergenceError("doubling product did not settle")


def _local_value(rule, p: int) -> mpf:
    return mpf(rule.local_sum(mpf(1) / p))


def wirsing_accelerated(desc: SetDescriptor, ctx: PrecisionContext = DEFAULT_CTX) -> WirsingConstant:
    """C0 from the factorisation through zeta and L(s, chi_D)."""
    st = quadratic_structure(desc)
    if st is None:
        raise ValueError(f"{desc.name}: no L-function factorisation known")
    with mpmath.workdps(ctx.dps):
        corr = mpf(1)
        for p, actual, base in st.exceptions:
            corr *= _local_value(actual, p) / _local_value(base, p)
        if st.kind == "zeta":
            value = corr
        else:
            ram = mpf(1)
            for p in prime_divisors(abs(st.D)):
                ram *= 1 - mpf(1) / p
            Lval = L(1, st.D, ctx)
            core = inert_euler_product(st.D, ctx) * ram
            core = core * Lval if st.kind == "quadsem" else core / Lval
            value = corr * mpmath.sqrt(core) / gamma_function(mpf(1) / 2, ctx)
    return WirsingConstant(desc.name, float(value), "accelerated", float(10 * ctx.eps), None,
                           (f"{st.kind} factorisation",))


def wirsing_C0(desc: SetDescriptor, ctx: PrecisionContext = DEFAULT_CTX, *,
               method: str = "auto", P: int = DIRECT_P, extrapolate: bool = False,
               primes: PrimeTable | None = None) -> WirsingConstant:
    """Wirsing constant C0(S); ``method`` is auto, direct or accelerated."""
    if method == "accelerated" or (method == "auto" and quadratic_structure(desc) is not None):
        return wirsing_accelerated(desc, ctx)
    if method in ("auto", "direct"):
        return wirsing_direct(desc, P, extrapolate=extrapolate, primes=primes)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# approximants


def c1(desc: SetDescriptor, gamma_S: EKEstimate | float) -> float:
    """Second-order coefficient (1 - delta)(1 - gamma_S)."""
    return float(1 - desc.delta) * (1.0 - float(gamma_S))


def landau_approx(desc: SetDescriptor, C0: float, x: float) -> float:
    if x <= 2:
        raise ValueError("x must exceed 2")
    return float(C0) * x * math.log(x) ** (float(desc.delta) - 1)


def _log_integral(delta: float, x: float) -> float:
    """int_2^x log^{delta-1} t dt, as int_{log 2}^{log x} u^{delta-1} e^u du."""
    if delta == 1:
        return x - 2.0
    a, b = math.log(2.0), math.log(x)
    # scaling by e^{-b} keeps the integrand O(1) near the upper end
    f = lambda u: u ** (delta - 1) * math.exp(u - b)  # noqa: E731
    breaks = np.linspace(a, b, max(2, int(b - a) + 2))
    total = 0.0
    abserr = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        val, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=QUAD_RTOL / 10, limit=200)
        total += val
        abserr += err
    if abserr > QUAD_RTOL * abs(total):
        raise ConvergenceError("quadrature did not reach the requested tolerance")
    return total * x


def ramanujan_approx(desc: SetDescriptor, C0: float, x: float) -> float:
    if x <= 2:
        raise ValueError("x must exceed 2")
    return float(C0) * _log_integral(float(desc.delta), x)


def winner(gamma_S: EKEstimate | float, error: float | None = None) -> str:
    """Ramanujan when gamma_S is surely below 1/2, Landau when surely above."""
    value = float(gamma_S)
    err = error if error is not None else getattr(gamma_S, "error", 0.0)
    if value + err < 0.5:
        return RAMANUJAN
    if value - err > 0.5:
        return LANDAU
    return UNDECIDED


# ---------------------------------------------------------------------------
# empirical comparison

CSV_COLUMNS = ("x", "S", "landau", "ramanujan", "err_l", "err_r", "theta", "closer")


@dataclass
class ApproxComparison:
    name: str
    C0: float
    delta: float
    xs: list[int]
    counts: list[int]
    landau: list[float]
    ramanujan: list[float]
    winner: str
    gamma: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def err_l(self) -> list[float]:
        return [abs(s - v) for s, v in zip(self.counts, self.landau)]

    @property
    def err_r(self) -> list[float]:
        return [abs(s - v) for s, v in zip(self.counts, self.ramanujan)]

    @property
    def theta(self) -> list[float]:
        return [s - v for s, v in zip(self.counts, self.ramanujan)]

    def closer(self) -> list[str]:
        out = []
        for el, er in zip(self.err_l, self.err_r):
            out.append(RAMANUJAN if er < el else LANDAU if el < er else UNDECIDED)
        return out

    def theta_exponent(self) -> float | None:
        """Least-squares slope of log|theta| against log x."""
        pts = [(math.log(x), math.log(abs(t))) for x, t in zip(self.xs, self.theta) if t]
        if len(pts) < 2:
            return None
        a, b = np.array(pts).T
        return float(np.polyfit(a, b, 1)[0])

    def rows(self) -> list[tuple]:
        return list(zip(self.xs, self.counts, self.landau, self.ramanujan,
                        self.err_l, self.err_r, self.theta, self.closer()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows():
            w.writerow([row[0], row[1]] + [f"{v:.6f}" for v in row[2:7]] + [row[7]])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "set": self.name,
            "C0": self.C0,
            "delta": self.delta,
            "gamma": self.gamma,
            "winner": self.winner,
            "theta_exponent": self.theta_exponent(),
            "rows": [dict(zip(CSV_COLUMNS, r)) for r in self.rows()],
            "notes": self.notes,
        }


def empirical_compare(desc: SetDescriptor, xs, table: CharTable, *,
                      C0: float | WirsingConstant | None = None,
                      gamma_S: EKEstimate | None = None,
                      ctx: PrecisionContext = DEFAULT_CTX) -> ApproxComparison:
    """Exact counts against both approximants at each sample point."""
    xs = sorted(int(x) for x in xs)
    if not xs:
        raise ValueError("no sample points")
    if xs[-1] > table.N:
        raise ValueError(f"sample point {xs[-1]} beyond table bound {table.N}")
    if xs[0] <= 2:
        raise ValueError("sample points must exceed 2")
    if C0 is None:
        C0 = wirsing_C0(desc, ctx, P=min(DIRECT_P, max(10**6, xs[-1])))
    c0 = float(C0)
    counts = [int(table.counts[x]) for x in xs]
    lan = [landau_approx(desc, c0, x) for x in xs]
    ram = [ramanujan_approx(desc, c0, x) for x in xs]
    declared = winner(gamma_S) if gamma_S is not None else UNDECIDED
    notes = []
    if isinstance(C0, WirsingConstant):
        notes.append(f"C0 via {C0.method}")
    return ApproxComparison(desc.name, c0, float(desc.delta), xs, counts, lan, ram, declared,
                            None if gamma_S is None else float(gamma_S), notes)
