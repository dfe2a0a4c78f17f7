"""Declarative multiplicative sets.

A multiplicative set is fixed by attaching to every prime p a set E(p) of
allowed positive exponents; n is in the set iff every exact prime power
p^e || n has e in E(p).  A :class:`SetDescriptor` encodes the map p -> E(p)
as an ordered rule list (first match wins, last rule must catch every prime).

Descriptor documents look like::

    # integers that are sums of two squares
    name  = sum2sq
    delta = 1/2
    rule  = cond=residue 4 3; exp=even
    rule  = cond=any; exp=all

Builtin sets are addressed as ``name`` or ``name:param(:param)``, see
:data:`BUILTIN_NAMES`.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Any, Protocol

from .lfun import is_fundamental_discriminant, kronecker, prime_divisors

__all__ = [
    "ExponentRule",
    "ALL",
    "NONE",
    "EVEN",
    "Residue",
    "Kronecker",
    "ExplicitPrime",
    "AnyPrime",
    "Predicate",
    "Rule",
    "SetDescriptor",
    "DescriptorError",
    "DescriptorParseError",
    "DescriptorValidationError",
    "BoundError",
    "parse_descriptor",
    "resolve_set",
    "chi",
    "classify_prime",
    "delta_of",
    "factorize",
    "BUILTIN_NAMES",
]

FACTOR_BOUND = 10**12


class DescriptorError(ValueError):
    pass


class DescriptorParseError(DescriptorError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


class DescriptorValidationError(DescriptorError):
    pass


class BoundError(ValueError):
    """An argument exceeds a configured factorization or sieve bound."""


# ---------------------------------------------------------------------------
# exponent rules


@dataclass(frozen=True)
class ExponentRule:
    """Allowed exponents: ``all``, ``none``, ``even`` or a finite set plus an
    optional tail ``e >= tail``."""

    kind: str
    values: frozenset[int] = frozenset()
    tail: int | None = None

    def __post_init__(self):
        if self.kind not in ("all", "none", "even", "set"):
            raise DescriptorError(f"unknown exponent rule {self.kind!r}")
        if any(v < 1 for v in self.values) or (self.tail is not None and self.tail < 1):
            raise DescriptorError("exponents must be positive")

    def __contains__(self, e: int) -> bool:
        if e == 0:
            return True
        if self.kind == "all":
            return True
        if self.kind == "none":
            return False
        if self.kind == "even":
            return e % 2 == 0
        return e in self.values or (self.tail is not None and e >= self.tail)

    def local_sum(self, x):
        """sum over e in E u {0} of x**e; works elementwise on numpy arrays."""
        if self.kind == "all":
            return 1 / (1 - x)
        if self.kind == "none":
            return 1 + 0 * x
        if self.kind == "even":
            return 1 / (1 - x * x)
        total = 1 + 0 * x
        for v in sorted(self.values):
            if self.tail is None or v < self.tail:
                total = total + x**v
        if self.tail is not None:
            total = total + x**self.tail / (1 - x)
        return total

    @property
    def generator_step(self) -> int | None:
        """k when E(p) = {k, 2k, 3k, ...}; 0 when E(p) is empty; else None."""
        if self.kind == "all":
            return 1
        if self.kind == "even":
            return 2
        if self.kind == "none":
            return 0
        if self.tail == 1:
            return 1
        if self.tail is None and not self.values:
            return 0
        return None

    def text(self) -> str:
        if self.kind != "set":
            return self.kind
        out = "set:[" + ",".join(str(v) for v in sorted(self.values)) + "]"
        if self.tail is not None:
            out += f",tail>={self.tail}"
        return out


ALL = ExponentRule("all")
NONE = ExponentRule("none")
EVEN = ExponentRule("even")


# ---------------------------------------------------------------------------
# prime conditions


@dataclass(frozen=True)
class Residue:
    modulus: int
    residue: int

    def __post_init__(self):
        if self.modulus < 1:
            raise DescriptorError("modulus must be positive")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    def matches(self, p: int) -> bool:
        return p % self.modulus == self.residue

    def text(self) -> str:
        return f"residue {self.modulus} {self.residue}"


@dataclass(frozen=True)
class Kronecker:
    D: int
    value: int

    def __post_init__(self):
        if self.D == 0 or self.D % 4 not in (0, 1):
            raise DescriptorError(f"{self.D} is not a discriminant")
        if self.value not in (-1, 0, 1):
            raise DescriptorError("Kronecker value must be -1, 0 or 1")

    def matches(self, p: int) -> bool:
        return kronecker(self.D, p) == self.value

    def text(self) -> str:
        return f"kronecker {self.D} {self.value}"


@dataclass(frozen=True)
class ExplicitPrime:
    p: int

    def matches(self, p: int) -> bool:
        return p == self.p

    def text(self) -> str:
        return f"prime {self.p}"


@dataclass(frozen=True)
class AnyPrime:
    def matches(self, p: int) -> bool:
        return True

    def text(self) -> str:
        return "any"


class PredicateResolver(Protocol):
    bound: int

    def exponents(self, p: int) -> Any: ...

    def chi(self, n: int) -> int: ...


@dataclass(frozen=True)
class Predicate:
    """Computed rule: every prime matches and E(p) comes from ``resolver``."""

    key: str
    resolver: Any = field(compare=False, hash=False, repr=False, default=None)

    def matches(self, p: int) -> bool:
        return True

    def text(self) -> str:
        return f"predicate {self.key}"


@dataclass(frozen=True)
class Rule:
    cond: Residue | Kronecker | ExplicitPrime | AnyPrime | Predicate
    exp: ExponentRule | None

    def text(self) -> str:
        exp = "computed" if self.exp is None else self.exp.text()
        return f"cond={self.cond.text()}; exp={exp}"


# ---------------------------------------------------------------------------
# descriptor


@dataclass(frozen=True)
class SetDescriptor:
    name: str
    rules: tuple[Rule, ...]
    delta: Fraction
    rho_hint: float | None = None

    def canonical(self) -> str:
        lines = [f"name = {self.name}", f"delta = {self.delta}"]
        lines += [f"rule = {r.text()}" for r in self.rules]
        return "\n".join(lines) + "\n"

    def digest(self) -> bytes:
        return hashlib.sha256(self.canonical().encode()).digest()

    @property
    def predicate(self) -> Predicate | None:
        for r in self.rules:
            if isinstance(r.cond, Predicate):
                return r.cond
        return None

    @property
    def is_semigroup(self) -> bool:
        """True when every E(p) is {k, 2k, ...} or empty, i.e. the set is the
        free semigroup on the prime powers p^k."""
        if self.predicate is not None:
            return False
        return all(r.exp.generator_step is not None for r in self.rules)

    @property
    def modulus(self) -> int:
        """lcm of the moduli appearing in residue and Kronecker conditions."""
        m = 1
        for r in self.rules:
            if isinstance(r.cond, Residue):
                d = r.cond.modulus
            elif isinstance(r.cond, Kronecker):
                d = abs(r.cond.D)
            else:
                continue
            m = m * d // gcd(m, d)
        return m

    def __str__(self) -> str:
        return self.name


def classify_prime(desc: SetDescriptor, p: int):
    """Exponent rule E(p) of the first rule matching the prime p."""
    for r in desc.rules:
        if r.cond.matches(p):
            if isinstance(r.cond, Predicate):
                return r.cond.resolver.exponents(p)
            return r.exp
    raise DescriptorValidationError(f"prime {p} matches no rule of {desc.name}")


def delta_of(desc: SetDescriptor) -> Fraction:
    """Dirichlet density of the primes p with 1 in E(p)."""
    return desc.delta


def factorize(n: int) -> list[tuple[int, int]]:
    if n < 1:
        raise ValueError("n must be positive")
    if n > FACTOR_BOUND:
        raise BoundError(f"{n} exceeds factorization bound {FACTOR_BOUND}")
    out = []
    for d in (2, 3):
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            out.append((d, e))
    d = 5
    step = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            out.append((d, e))
        d += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return out


def chi(desc: SetDescriptor, n: int) -> int:
    """Characteristic function of the set: 1 if n is in it, else 0."""
    pred = desc.predicate
    if pred is not None and n > pred.resolver.bound:
        raise BoundError(f"{n} exceeds the backing sieve bound {pred.resolver.bound}")
    for p, e in factorize(n):
        if e not in classify_prime(desc, p):
            return 0
    return 1


# ---------------------------------------------------------------------------
# validation


def _phi(n: int) -> int:
    out = n
    for p in prime_divisors(n):
        out -= out // p
    return out


def _first_class_rule(rules, r: int) -> Rule | None:
    """First non-explicit rule matching primes in the class r (mod L)."""
    for rule in rules:
        if isinstance(rule.cond, ExplicitPrime):
            continue
        if rule.cond.matches(r):
            return rule
    return None


def rule_density(rules: tuple[Rule, ...]) -> Fraction | None:
    """Prime density implied by residue/Kronecker rules, None when a
    computed predicate decides some class."""
    tmp = SetDescriptor("tmp", rules, Fraction(1))
    L = tmp.modulus
    hits = 0
    classes = 0
    for r in range(1, L + 1):
        if gcd(r, L) != 1:
            continue
        classes += 1
        rule = _first_class_rule(rules, r)
        if rule is None or isinstance(rule.cond, Predicate):
            return None
        if 1 in rule.exp:
            hits += 1
    return Fraction(hits, classes)


def validate(name: str, rules: tuple[Rule, ...], delta: Fraction | None,
             rho_hint: float | None = None) -> SetDescriptor:
    if not rules:
        raise DescriptorValidationError("descriptor has no rules")
    for rule in rules:
        if rule.exp is None and not isinstance(rule.cond, Predicate):
            raise DescriptorValidationError(f"rule '{rule.cond.text()}' needs an exponent rule")
        if isinstance(rule.cond, Predicate) and rule.cond.resolver is None:
            raise DescriptorValidationError(f"predicate {rule.cond.key!r} is unresolved")
    L = SetDescriptor("tmp", rules, Fraction(1)).modulus
    for r in range(1, L + 1):
        if gcd(r, L) == 1 and _first_class_rule(rules, r) is None:
            raise DescriptorValidationError(
                f"primes p = {r} (mod {L}) match no rule; add a catch-all 'cond=any'")
    for p in prime_divisors(L):
        if not any(rule.cond.matches(p) for rule in rules):
            raise DescriptorValidationError(f"prime {p} matches no rule")
    derived = rule_density(rules)
    if derived is None:
        if delta is None:
            raise DescriptorValidationError("computed-predicate sets must declare delta")
    elif delta is None:
        delta = derived
    elif Fraction(delta) != derived:
        raise DescriptorValidationError(
            f"declared delta {delta} disagrees with rule density {derived}")
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise DescriptorValidationError(f"delta {delta} outside (0, 1]")
    return SetDescriptor(name, tuple(rules), delta, rho_hint)


# ---------------------------------------------------------------------------
# parsing

_EXP_SET = re.compile(r"^set:\[([0-9,\s]*)\](?:,\s*tail>=(\d+))?$")


def parse_exponent_rule(text: str) -> ExponentRule:
    text = text.strip()
    if text in ("all", "none", "even"):
        return ExponentRule(text)
    m = _EXP_SET.match(text)
    if not m:
        raise DescriptorError(f"bad exponent rule {text!r}")
    values = frozenset(int(v) for v in m.group(1).split(",") if v.strip())
    tail = int(m.group(2)) if m.group(2) else None
    return ExponentRule("set", values, tail)


def parse_condition(text: str, bound: int | None = None):
    parts = text.split()
    if not parts:
        raise DescriptorError("empty condition")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "residue" and len(args) == 2:
            return Residue(int(args[0]), int(args[1]))
        if kind == "kronecker" and len(args) == 2:
            return Kronecker(int(args[0]), int(args[1]))
        if kind == "prime" and len(args) == 1:
            p = int(args[0])
            if len(prime_divisors(p)) != 1 or prime_divisors(p)[0] != p:
                raise DescriptorError(f"{p} is not prime")
            return ExplicitPrime(p)
    except ValueError as exc:
        raise DescriptorError(str(exc)) from None
    if kind == "any" and not args:
        return AnyPrime()
    if kind == "predicate" and len(args) == 1:
        return Predicate(args[0], _resolve_predicate(args[0], bound))
    raise DescriptorError(f"bad condition {text!r}")


def _parse_rule(text: str, bound: int | None) -> Rule:
    fields = {}
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        key, sep, value = chunk.partition("=")
        if not sep:
            raise DescriptorError(f"expected key=value, got {chunk.strip()!r}")
        fields[key.strip()] = value.strip()
    if "cond" not in fields:
        raise DescriptorError("rule lacks cond=")
    cond = parse_condition(fields["cond"], bound)
    exp_text = fields.get("exp")
    if isinstance(cond, Predicate):
        if exp_text not in (None, "computed"):
            raise DescriptorError("predicate rules take exp=computed")
        return Rule(cond, None)
    if exp_text is None:
        raise DescriptorError("rule lacks exp=")
    return Rule(cond, parse_exponent_rule(exp_text))


def parse_descriptor(text: str, *, bound: int | None = None,
                     delta: Fraction | str | None = None) -> SetDescriptor:
    """Parse a descriptor document or a builtin name such as ``quadsem:-4``.

    ``bound`` sizes the backing sieve of computed-predicate sets; ``delta``
    supplies a prime density where none is known.
    """
    stripped = text.strip()
    if "\n" not in stripped and "=" not in stripped:
        return resolve_set(stripped, bound=bound, delta=delta)
    name = None
    declared = None
    rho = None
    rules: list[Rule] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise DescriptorParseError("expected 'key = value'", lineno)
        value = value.strip()
        try:
            if key == "name":
                if not re.fullmatch(r"[\w:.+-]+", value):
                    raise DescriptorError(f"bad name {value!r}")
                name = value
            elif key == "delta":
                declared = Fraction(value)
            elif key == "rho":
                rho = float(value)
            elif key == "rule":
                rules.append(_parse_rule(value, bound))
            else:
                raise DescriptorError(f"unknown field {key!r}")
        except (DescriptorError, ValueError, ZeroDivisionError) as exc:
            raise DescriptorParseError(str(exc), lineno, key) from None
    if name is None:
        raise DescriptorParseError("missing name", None, "name")
    if delta is not None:
        declared = Fraction(delta)
    return validate(name, tuple(rules), declared, rho)


# ---------------------------------------------------------------------------
# builtin catalog

BUILTIN_NAMES = (
    "naturals", "sum2sq", "hex", "nonhyp", "quadsem:D", "sprime:D",
    "progsem:d:a", "phi-nondiv:q", "tau-nondiv:q",
)

_PREDICATES: dict[str, Any] = {}


def register_predicate(family: str, factory) -> None:
    """``factory(param: str, bound: int | None)`` returns a resolver."""
    _PREDICATES[family] = factory


def _resolve_predicate(key: str, bound: int | None):
    family, _, param = key.partition(":")
    if family not in _PREDICATES and family == "tau-nondiv":
        from . import tau  # noqa: F401  (registers itself)
    if family not in _PREDICATES:
        raise DescriptorError(f"unknown predicate {key!r}")
    return _PREDICATES[family](param, bound)


def _is_prime(n: int) -> bool:
    return n >= 2 and prime_divisors(n) == [n]


def _quad_D(text: str) -> int:
    D = int(text)
    if D >= 0 or not is_fundamental_discriminant(D):
        raise DescriptorError(f"{D} is not a negative fundamental discriminant")
    return D


def resolve_set(label: str, *, bound: int | None = None,
                delta: Fraction | str | None = None) -> SetDescriptor:
    """Builtin set by name, e.g. ``sum2sq``, ``quadsem:-3``, ``progsem:4:3``."""
    family, *params = label.split(":")
    try:
        if family == "naturals" and not params:
            rules = [Rule(AnyPrime(), ALL)]
        elif family == "sum2sq" and not params:
            rules = [Rule(Residue(4, 3), EVEN), Rule(AnyPrime(), ALL)]
        elif family == "hex" and not params:
            rules = [Rule(Residue(3, 2), EVEN), Rule(AnyPrime(), ALL)]
        elif family == "nonhyp" and not params:
            rules = [Rule(ExplicitPrime(2), ALL), Rule(Residue(4, 3), ALL),
                     Rule(AnyPrime(), NONE)]
        elif family == "quadsem" and len(params) == 1:
            D = _quad_D(params[0])
            rules = [Rule(Kronecker(D, 1), ALL), Rule(Kronecker(D, -1), EVEN),
                     Rule(AnyPrime(), NONE)]
        elif family == "sprime" and len(params) == 1:
            D = _quad_D(params[0])
            rules = [Rule(Kronecker(D, -1), ALL), Rule(AnyPrime(), NONE)]
        elif family == "progsem" and len(params) == 2:
            d, a = int(params[0]), int(params[1])
            if d < 1 or gcd(a, d) != 1:
                raise DescriptorError("progsem:d:a needs gcd(a, d) = 1")
            rules = [Rule(Residue(d, a), ALL), Rule(AnyPrime(), NONE)]
        elif family == "phi-nondiv" and len(params) == 1:
            q = int(params[0])
            if not _is_prime(q) or q == 2:
                raise DescriptorError("phi-nondiv:q needs an odd prime q")
            # q does not divide phi(p^e) = p^(e-1) (p-1)
            rules = [Rule(ExplicitPrime(q), ExponentRule("set", frozenset({1}))),
                     Rule(Residue(q, 1), NONE), Rule(AnyPrime(), ALL)]
        elif family == "tau-nondiv" and len(params) == 1:
            q = int(params[0])
            if not _is_prime(q):
                raise DescriptorError("tau-nondiv:q needs a prime q")
            key = f"tau-nondiv:{q}"
            resolver = _resolve_predicate(key, bound)
            if delta is None:
                delta = resolver.declared_delta
            if delta is None:
                raise DescriptorValidationError(
                    f"no known prime density for {key}; supply delta explicitly")
            return validate(label, (Rule(Predicate(key, resolver), None),), Fraction(delta))
        else:
            raise DescriptorError(f"unknown builtin set {label!r}")
    except ValueError as exc:
        if isinstance(exc, DescriptorError):
            raise
        raise DescriptorError(f"bad parameters in {label!r}: {exc}") from None
    return validate(label, tuple(rules), Fraction(delta) if delta is not None else None)
