"""Counting functions, Euler-Kronecker constants and races of multiplicative sets."""

from .setspec import SetDescriptor, parse_descriptor, resolve_set, chi, delta_of
from .sieve import build_char_table, count, pi_S, primes_up_to
from .ek import EKEstimate, ek_lfunction, ek_partial_sum
from .asymptotics import wirsing_C0, winner
from .races import race, prime_race

__all__ = [
    "SetDescriptor",
    "parse_descriptor",
    "resolve_set",
    "chi",
    "delta_of",
    "build_char_table",
    "count",
    "pi_S",
    "primes_up_to",
    "EKEstimate",
    "ek_lfunction",
    "ek_partial_sum",
    "wirsing_C0",
    "winner",
    "race",
    "prime_race",
]
