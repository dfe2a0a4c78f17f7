"""Command-line front end: ``multset <command> [options]``.

Exit status is 0 on success, 1 when a race is violated or a verification
fails, 2 on usage errors (bad arguments, unknown sets, bounds out of range).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_DOWN, Decimal
from fractions import Fraction
from pathlib import Path

import mpmath

from . import asymptotics, ek, races, sieve, tau
from .lfun import PrecisionContext
from .setspec import BoundError, DescriptorError, SetDescriptor, parse_descriptor

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

# published Table entries: (label, value text, winner)
TAU_ROWS = {
    3: ("+0.5349", "Landau"),
    5: ("+0.3995", "Ramanujan"),
    7: ("+0.2316", "Ramanujan"),
    23: ("+0.2166", "Ramanujan"),
    691: ("+0.5717", "Landau"),
}
PHI_ROWS = {67: ("<0.4977", "Ramanujan"), 71: (">0.5023", "Landau")}
PROGRESSION_ROWS = {3: (">0.5247", "Landau"), 5: (">0.5247", "Landau"), 7: (">0.5247", "Landau"),
                    11: ("<0.2862", "Ramanujan"), 13: ("<0.2862", "Ramanujan")}
LFUNCTION_ROWS = {"sum2sq": ("-0.1638", "Ramanujan"), "nonhyp": ("-0.4095", "Ramanujan")}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    sets: tuple[str, ...]
    x: int | None
    limit: int | None
    digits: int
    method: str
    fmt: str
    threads: int
    cache_dir: Path | None
    delta: Fraction | None

    def __post_init__(self):
        for name in ("x", "limit"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise UsageError(f"--{name} must be non-negative")
        if self.digits < 1:
            raise UsageError("--digits must be positive")
        if self.threads < 1:
            raise UsageError("--threads must be positive")

    @property
    def ctx(self) -> PrecisionContext:
        # --digits sets the printed digits; the working precision never drops below 30
        return PrecisionContext(max(30, self.digits + 5))


def _int(text: str) -> int:
    """Accept 10000000, 1e7 or 10**7."""
    text = text.strip()
    try:
        if "**" in text:
            b, e = text.split("**")
            return int(b) ** int(e)
        v = float(text) if any(c in text for c in ".eE") else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def _points(text: str) -> list[int]:
    return [_int(t) for t in text.split(",") if t.strip()]


def load_set(source: str, *, bound: int | None = None, delta=None) -> SetDescriptor:
    """Builtin name, or the path of a descriptor document."""
    path = Path(source)
    text = path.read_text() if path.is_file() else source
    return parse_descriptor(text, bound=bound, delta=delta)


def _emit(cfg: RunConfig, result: dict, text: str, csv_text: str | None = None) -> None:
    if cfg.fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": cfg.command, "result": result}
        print(json.dumps(doc, indent=2, default=str))
    elif cfg.fmt == "csv":
        if csv_text is None:
            keys = [k for k, v in result.items() if not isinstance(v, (dict, list))]
            csv_text = ",".join(keys) + "\n" + ",".join(str(result[k]) for k in keys) + "\n"
        sys.stdout.write(csv_text)
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands


def cmd_count(cfg: RunConfig, args) -> int:
    x = cfg.x if cfg.x is not None else 10**6
    desc = load_set(cfg.sets[0], bound=max(x, 2), delta=cfg.delta)
    table = sieve.cached_char_table(desc, max(x, 1), cfg.cache_dir)
    S = sieve.count(table, x)
    pi = sieve.pi_S(desc, x)
    res = {"set": desc.name, "x": x, "S": S, "pi_S": pi, "delta": str(desc.delta)}
    _emit(cfg, res, f"{desc.name}: S({x}) = {S}, pi_S({x}) = {pi}, delta = {desc.delta}")
    return EXIT_OK


def _gamma(desc: SetDescriptor, cfg: RunConfig, x: int) -> ek.EKEstimate:
    method = cfg.method
    if method == "auto":
        method = "lfunction" if (desc.name in ("sum2sq", "nonhyp")
                                 or ek.quadratic_structure(desc)) else "partial-sum"
    if method == "lfunction":
        return ek.ek_lfunction(desc, cfg.ctx)
    if method == "partial-sum":
        return ek.ek_partial_sum(desc, x)
    raise UsageError(f"unknown method {cfg.method!r}")


def truncate_digits(value, digits: int) -> str:
    """First ``digits`` significant digits, cut rather than rounded."""
    d = Decimal(mpmath.nstr(value, digits + 10, min_fixed=-math.inf, max_fixed=math.inf))
    if d == 0:
        return "0"
    q = Decimal(1).scaleb(d.adjusted() - digits + 1)
    return str(d.quantize(q, rounding=ROUND_DOWN))


def _fmt_value(est: ek.EKEstimate, digits: int) -> str:
    if est.exact is not None:
        return truncate_digits(est.exact, digits)
    return f"{est.value:.{min(digits, 6)}f}"


def cmd_gamma(cfg: RunConfig, args) -> int:
    x = cfg.x if cfg.x is not None else 10**7
    desc = load_set(cfg.sets[0], bound=x, delta=cfg.delta)
    est = _gamma(desc, cfg, x)
    shown = _fmt_value(est, cfg.digits)
    w = asymptotics.winner(est)
    res = dict(est.as_dict(), shown=shown, winner=w)
    text = f"gamma({desc.name}) = {shown}  [{est.method}, error {est.error:.2g}, winner {w}]"
    _emit(cfg, res, text)
    return EXIT_OK


def cmd_c0(cfg: RunConfig, args) -> int:
    desc = load_set(cfg.sets[0], bound=cfg.limit, delta=cfg.delta)
    method = cfg.method if cfg.method in ("direct", "accelerated") else "auto"
    P = cfg.limit or asymptotics.DIRECT_P
    c0 = asymptotics.wirsing_C0(desc, cfg.ctx, method=method, P=P, extrapolate=args.extrapolate)
    text = f"C0({desc.name}) = {c0.value:.12f}  [{c0.method}, error {c0.error:.2g}]"
    _emit(cfg, c0.as_dict(), text)
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args) -> int:
    xs = args.points or [10**4, 10**5, 10**6]
    top = max(xs)
    desc = load_set(cfg.sets[0], bound=top, delta=cfg.delta)
    table = sieve.cached_char_table(desc, top, cfg.cache_dir)
    try:
        gamma = _gamma(desc, RunConfig(**{**cfg.__dict__, "method": "auto"}), max(top, 100))
    except (ValueError, BoundError):
        gamma = None
    cmp = asymptotics.empirical_compare(desc, xs, table, gamma_S=gamma, ctx=cfg.ctx)
    lines = [f"{desc.name}: C0 = {cmp.C0:.6f}, delta = {cmp.delta}, declared winner {cmp.winner}",
             cmp.to_csv().rstrip()]
    te = cmp.theta_exponent()
    if te is not None:
        lines.append(f"growth exponent of |theta(x)|: {te:.3f}")
    _emit(cfg, cmp.as_dict(), "\n".join(lines), cmp.to_csv())
    return EXIT_OK


def _race_text(r: races.RaceReport) -> str:
    return (f"{r.a} vs {r.b} ({r.kind}), X = {r.X}: {r.verdict}; "
            f"min margin {r.min_margin} at {r.min_at}; counts {r.a_count} vs {r.b_count}")


def cmd_race(cfg: RunConfig, args) -> int:
    if not args.a or not args.b:
        raise UsageError("race needs --a and --b")
    X = cfg.limit if cfg.limit is not None else 10**6
    a = load_set(args.a, bound=max(X, 2), delta=cfg.delta)
    b = load_set(args.b, bound=max(X, 2), delta=cfg.delta)
    run = races.prime_race if args.primes else races.race
    r = run(a, b, X)
    _emit(cfg, r.as_dict(), _race_text(r))
    return EXIT_OK if r.ok else EXIT_FAIL


def cmd_race_suite(cfg: RunConfig, args) -> int:
    X = cfg.limit if cfg.limit is not None else 10**6
    from .setspec import resolve_set

    pairs = [(resolve_set(x), resolve_set(y)) for x, y in races.PROGRESSION_RACE_PAIRS]
    with ThreadPoolExecutor(cfg.threads) as pool:
        reports = list(pool.map(lambda ab: races.race(ab[0], ab[1], X), pairs))
    _emit(cfg, {"X": X, "races": [r.as_dict() for r in reports]},
          "\n".join(_race_text(r) for r in reports))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def cmd_tau_sieve(cfg: RunConfig, args) -> int:
    q = args.q or 691
    N = args.n or 10**5
    table = tau.tau_mod_sieve(q, N)
    res = {"q": q, "N": N, "divisibility_density": tau.divisibility_density(q, N, table),
           "nondivisibility_density": tau.delta_empirical(q, N, table)}
    if q in tau.RAMANUJAN_DELTA:
        res["delta_q"] = str(tau.RAMANUJAN_DELTA[q])
    lines = [f"tau(n) mod {q} for n <= {N}",
             f"fraction of primes p <= {N} with {q} | tau(p): {res['divisibility_density']:.4f}"
             + (f" (delta_q = {res['delta_q']})" if "delta_q" in res else "")]
    status = EXIT_OK
    if args.verify_sigma11:
        if q != 691:
            raise UsageError("--verify-sigma11 applies to q = 691")
        bad = tau.verify_sigma11(table)
        res["sigma11_congruence"] = bad is None
        res["first_failure"] = bad
        lines.append("tau(n) = sigma_11(n) (mod 691) for all n <= %d: %s"
                     % (N, "verified" if bad is None else f"FAILS at n = {bad}"))
        if bad is not None:
            status = EXIT_FAIL
    _emit(cfg, res, "\n".join(lines))
    return status


def cmd_lcm_f(cfg: RunConfig, args) -> int:
    n = args.n or cfg.x or 10**4
    val = sieve.log_lcm_f(n)
    J = float(ek.lcm_constant(cfg.ctx))
    slope = (val - n * math.log(n)) / n
    res = {"n": n, "log_lcm": val, "slope": slope, "J": J}
    _emit(cfg, res, f"log lcm(1^2+1, ..., {n}^2+1) = {val:.6f}; "
                    f"(value - n log n)/n = {slope:.6f}; J = {J:.10f}")
    return EXIT_OK


def _table_rows(cfg: RunConfig) -> list[dict]:
    x_tau = cfg.x or 10**6
    x_other = cfg.limit or 10**7
    rows = []
    for name, (reference, ref_w) in LFUNCTION_ROWS.items():
        est = _gamma(load_set(name), RunConfig(**{**cfg.__dict__, "method": "lfunction"}), 0)
        rows.append({"set": name, "computed": truncate_digits(est.exact, 13), "reference": reference,
                     "winner": asymptotics.winner(est), "reference_winner": ref_w,
                     "provenance": "computed (L-function)"})

    def estimate(label, source, x, reference, ref_w):
        desc = load_set(source, bound=x)
        est = ek.ek_partial_sum(desc, x)
        return {"set": label, "computed": f"{est.value:+.4f}", "reference": reference,
                "winner": asymptotics.winner(est), "reference_winner": ref_w,
                "provenance": f"estimate (partial sum, x={x}); reference value quoted"}

    jobs = [(f"{q} nmid tau", f"tau-nondiv:{q}", x_tau, *v) for q, v in TAU_ROWS.items()]
    jobs += [(f"{q} nmid phi", f"phi-nondiv:{q}", x_other, *v) for q, v in PHI_ROWS.items()]
    jobs += [(f"S'({q};1)", f"progsem:{q}:1", x_other, *v) for q, v in PROGRESSION_ROWS.items()]
    tau.tau_tables(tau.RAMANUJAN_DELTA, x_tau)
    with ThreadPoolExecutor(cfg.threads) as pool:
        rows += list(pool.map(lambda j: estimate(*j), jobs))
    return rows


def cmd_table(cfg: RunConfig, args) -> int:
    rows = _table_rows(cfg)
    width = max(len(r["set"]) for r in rows)
    lines = [f"{'set':<{width}}  {'computed':>20}  {'reference':>9}  {'winner':>10}  "
             f"{'ref winner':>10}  provenance"]
    for r in rows:
        lines.append(f"{r['set']:<{width}}  {r['computed']:>20}  {r['reference']:>9}  "
                     f"{r['winner']:>10}  {r['reference_winner']:>10}  {r['provenance']}")
    csv_text = "set,computed,reference,winner,reference_winner,provenance\n" + "".join(
        ",".join(str(r[k]) for k in ("set", "computed", "reference", "winner", "reference_winner"))
        + f",\"{r['provenance']}\"\n" for r in rows)
    _emit(cfg, {"rows": rows}, "\n".join(lines), csv_text)
    return EXIT_OK


COMMANDS = {
    "count": cmd_count,
    "gamma": cmd_gamma,
    "c0": cmd_c0,
    "compare": cmd_compare,
    "race": cmd_race,
    "race-suite": cmd_race_suite,
    "tau-sieve": cmd_tau_sieve,
    "table": cmd_table,
    "lcm-f": cmd_lcm_f,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--set", dest="set", help="builtin set name or descriptor file")
    common.add_argument("--x", type=_int, help="evaluation point / sieve limit")
    common.add_argument("--limit", type=_int, help="range limit for races, P for c0")
    common.add_argument("--digits", type=int, default=15, help="significant digits shown")
    common.add_argument("--method", default="auto",
                        choices=["auto", "lfunction", "partial-sum", "direct", "accelerated"])
    common.add_argument("--format", dest="fmt", default="text", choices=["text", "json", "csv"])
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--cache-dir", type=Path)
    common.add_argument("--delta", type=Fraction, help="prime density for computed sets")

    parser = argparse.ArgumentParser(prog="multset", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("count", parents=[common], help="S(x) and pi_S(x)")
    sub.add_parser("gamma", parents=[common], help="Euler-Kronecker constant")
    p = sub.add_parser("c0", parents=[common], help="Wirsing constant")
    p.add_argument("--extrapolate", action="store_true")
    p = sub.add_parser("compare", parents=[common], help="Landau vs Ramanujan at sample points")
    p.add_argument("--points", type=_points)
    p = sub.add_parser("race", parents=[common], help="check A(x) >= B(x) up to --limit")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--primes", action="store_true", help="race prime counts instead")
    sub.add_parser("race-suite", parents=[common], help="the four progression races")
    p = sub.add_parser("tau-sieve", parents=[common], help="tau(n) mod q")
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=_int)
    p.add_argument("--verify-sigma11", action="store_true")
    sub.add_parser("table", parents=[common], help="overview of gamma values and winners")
    p = sub.add_parser("lcm-f", parents=[common], help="log lcm of n^2 + 1")
    p.add_argument("--n", type=_int)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    needs_set = args.command in ("count", "gamma", "c0", "compare")
    try:
        if needs_set and not args.set:
            raise UsageError(f"{args.command} needs --set")
        cfg = RunConfig(args.command, (args.set,) if args.set else (), args.x, args.limit,
                        args.digits, args.method, args.fmt, args.threads, args.cache_dir,
                        args.delta)
        return COMMANDS[args.command](cfg, args)
    except (UsageError, DescriptorError, BoundError, ValueError, OSError) as exc:
        print(f"multset {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
