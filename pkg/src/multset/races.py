"""Finite-range races between counting functions.

``race(a, b, X)`` checks A(x) >= B(x) for every integer 0 <= x <= X, where
A and B count members of two multiplicative sets.  ``prime_race`` does the
same for the primes each set admits.  Both stream over sieve segments and
keep only running totals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .setspec import Predicate, SetDescriptor, resolve_set
from .sieve import MAX_BOUND, SEGMENT_SIZE, char_segment, primes_up_to, rule_indices

__all__ = [
    "RaceCheckpoint",
    "RaceReport",
    "race",
    "prime_race",
    "race_suite_progressions",
    "PROGRESSION_RACE_PAIRS",
    "CHECKPOINT_EVERY",
]

CHECKPOINT_EVERY = 10**6

PROGRESSION_RACE_PAIRS = (
    ("progsem:3:2", "progsem:3:1"),
    ("progsem:4:3", "progsem:3:1"),
    ("progsem:3:2", "progsem:4:1"),
    ("progsem:4:3", "progsem:4:1"),
)


@dataclass(frozen=True)
class RaceCheckpoint:
    """Running state after processing every x <= ``x``; enough to resume."""

    x: int
    a_count: int
    b_count: int
    min_margin: int
    min_at: int
    violation_at: int | None = None


@dataclass(frozen=True)
class RaceReport:
    a: str
    b: str
    X: int
    kind: str
    violation_at: int | None
    min_margin: int
    min_at: int
    a_count: int
    b_count: int
    checkpoints: tuple[RaceCheckpoint, ...] = field(default=(), compare=True)

    @property
    def verdict(self) -> str:
        if self.violation_at is None:
            return "no-violation"
        return f"violation-at {self.violation_at}"

    @property
    def ok(self) -> bool:
        return self.violation_at is None

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "X": self.X,
            "kind": self.kind,
            "verdict": self.verdict,
            "violation_at": self.violation_at,
            "min_margin": self.min_margin,
            "min_at": self.min_at,
            "a_count": self.a_count,
            "b_count": self.b_count,
            "checkpoints": [
                {"x": c.x, "a": c.a_count, "b": c.b_count, "min_margin": c.min_margin}
                for c in self.checkpoints
            ],
        }


def _prime_segment(desc: SetDescriptor, lo: int, hi: int, ps: np.ndarray) -> np.ndarray:
    """Indicator of primes p in [lo, hi) with 1 in E(p)."""
    seg = np.zeros(hi - lo, dtype=bool)
    sel = ps[(ps >= lo) & (ps < hi)]
    if not len(sel):
        return seg
    idx = rule_indices(desc, sel)
    keep = np.zeros(len(sel), dtype=bool)
    for i, rule in enumerate(desc.rules):
        m = idx == i
        if not m.any():
            continue
        if isinstance(rule.cond, Predicate):
            keep[m] = rule.cond.resolver.allows_one(sel[m])
        else:
            keep[m] = 1 in rule.exp
    seg[sel[keep] - lo] = True
    return seg


def _run(a: SetDescriptor, b: SetDescriptor, X: int, kind: str,
         segment_size: int, resume: RaceCheckpoint | None) -> RaceReport:
    X = int(X)
    if X < 0:
        raise ValueError("X must be non-negative")
    if X > MAX_BOUND:
        raise ValueError(f"X={X} exceeds sieve capacity {MAX_BOUND}")
    state = resume or RaceCheckpoint(0, 0, 0, 0, 0)
    if state.x > X:
        raise ValueError("checkpoint lies beyond X")
    checkpoints: list[RaceCheckpoint] = []
    if state.violation_at is None and state.x < X:
        primes = primes_up_to(max(X, 2)).upto(X)
        ia = rule_indices(a, primes) if kind == "set" else None
        ib = rule_indices(b, primes) if kind == "set" else None
        a_count, b_count = state.a_count, state.b_count
        min_margin, min_at = state.min_margin, state.min_at
        violation = None
        lo = state.x + 1
        while lo <= X:
            hi = min(lo + segment_size, X + 1)
            if kind == "set":
                sa = char_segment(a, lo, hi, primes, ia)
                sb = char_segment(b, lo, hi, primes, ib)
            else:
                sa = _prime_segment(a, lo, hi, primes)
                sb = _prime_segment(b, lo, hi, primes)
            ca = a_count + np.cumsum(sa, dtype=np.int64)
            cb = b_count + np.cumsum(sb, dtype=np.int64)
            margin = ca - cb
            bad = np.flatnonzero(margin < 0)
            end = int(bad[0]) + 1 if bad.size else len(margin)
            prefix_min = np.minimum.accumulate(margin[:end])
            for c in range(-(-lo // CHECKPOINT_EVERY) * CHECKPOINT_EVERY, lo + end, CHECKPOINT_EVERY):
                j = c - lo
                m, at = min_margin, min_at
                if prefix_min[j] < m:
                    m, at = int(prefix_min[j]), lo + int(np.argmin(margin[: j + 1]))
                checkpoints.append(RaceCheckpoint(c, int(ca[j]), int(cb[j]), m, at))
            k = int(np.argmin(margin[:end]))
            if margin[k] < min_margin:
                min_margin, min_at = int(margin[k]), lo + k
            a_count, b_count = int(ca[end - 1]), int(cb[end - 1])
            if bad.size:
                violation = lo + end - 1
                break
            lo = hi
        state = RaceCheckpoint(X if violation is None else violation, a_count, b_count,
                               min_margin, min_at, violation)
    return RaceReport(a.name, b.name, X, kind, state.violation_at, state.min_margin,
                      state.min_at, state.a_count, state.b_count, tuple(checkpoints))


def race(a: SetDescriptor, b: SetDescriptor, X: int, *, segment_size: int = SEGMENT_SIZE,
         resume: RaceCheckpoint | None = None) -> RaceReport:
    """Check A(x) >= B(x) for all integers x <= X; stop at the first failure."""
    return _run(a, b, X, "set", segment_size, resume)


def prime_race(a: SetDescriptor, b: SetDescriptor, X: int, *, segment_size: int = SEGMENT_SIZE,
               resume: RaceCheckpoint | None = None) -> RaceReport:
    """Same as :func:`race` for the counts of primes admitted by each set."""
    return _run(a, b, X, "prime", segment_size, resume)


def race_suite_progressions(X: int, *, segment_size: int = SEGMENT_SIZE) -> list[RaceReport]:
    """The four progression-semigroup races 3;2, 4;3 against 3;1, 4;1."""
    return [race(resolve_set(x), resolve_set(y), X, segment_size=segment_size)
            for x, y in PROGRESSION_RACE_PAIRS]
