import math

import mpmath
import numpy as np
import pytest
from mpmath import mpf

from conftest import brute_primes
from multset import ek
from multset.lfun import PrecisionContext, euler_gamma, kronecker, l_log_deriv_at_1
from multset.setspec import resolve_set
from multset.sieve import log_lcm_f

SB = -0.1638973186345
NH = -0.4095
J = -0.0662756342
CTX = PrecisionContext(30)


def test_prime_square_sum_direct_oracle(primes_1e8):
    ps = primes_1e8.primes
    ps = ps[ps % 4 == 3].astype(np.float64)
    direct = math.fsum((2 * np.log(ps) / (ps * ps - 1)).tolist())
    tail = 1 / 1e8  # sum over p > X of log p/p^2 restricted to half the primes, times 2
    assert abs(float(ek.prime_square_sum(-4)) - (direct + tail)) < 1e-8


def test_doubling_series_depth():
    assert abs(ek.doubling_term(-4, 7, PrecisionContext(50))) < 1e-40
    terms = ek.doubling_terms(-4, 7, PrecisionContext(50))
    assert abs(sum(terms[:6]) - sum(terms)) < 1e-40


def test_doubling_terms_are_closed_form():
    # each term equals sum over inert p of 2 p^s log p/(p^{2s} - 1) at s = 2^k
    ps = [p for p in brute_primes(20000) if p % 4 == 3]
    with mpmath.workdps(40):
        for k in (1, 2, 3):
            s = 2**k
            ref = mpmath.fsum(2 * mpf(p) ** s * mpmath.log(p) / (mpf(p) ** (2 * s) - 1) for p in ps)
            # primes beyond 2e4 add about X^(1-s)/(s-1), always positively
            gap = ek.doubling_term(-4, k) - ref
            assert 0 < gap < 2 * mpf(20000) ** (1 - s) / (s - 1)


def test_positivity_d3():
    terms = ek.doubling_terms(-3, 6)
    assert all(t > 0 for t in terms)
    assert terms[0] > sum(terms[1:])
    assert ek.prime_square_sum(-3) > 0


def test_consecutive_depths():
    _, k, err = ek.prime_square_sum(-7, with_error=True)
    terms = ek.doubling_terms(-7, k + 1)
    assert abs(sum(terms[:k]) - sum(terms)) <= err


def test_gamma_quadsem_m4():
    est = ek.ek_quadratic(-4)
    assert est.method == "lfunction"
    assert abs(est.value - (SB + math.log(2))) < 1e-12


@pytest.mark.parametrize("D", [-3, -4, -7, -8, -23])
def test_two_forms_of_character_prime_sum(D):
    a = ek.chi_prime_sum(D, route="series")
    b = ek.chi_prime_sum(D, route="mobius")
    assert abs(a - b) < 1e-10


def test_character_prime_sum_truncated():
    # slow direct check of the sum for D = -3 up to 2e6 (conditionally convergent)
    from multset.sieve import primes_up_to

    ps = primes_up_to(2 * 10**6).primes
    chi = np.where(ps % 3 == 1, 1.0, np.where(ps % 3 == 2, -1.0, 0.0))
    direct = math.fsum((chi * np.log(ps) / (ps - 1.0)).tolist())
    assert abs(direct - float(ek.chi_prime_sum(-3))) < 5e-3


@pytest.mark.parametrize("D", [-3, -4, -7, -8])
def test_partial_sum_agrees_with_lfunction(D, primes_1e7):
    part = ek.ek_partial_sum(resolve_set(f"quadsem:{D}"), 10**7, primes_1e7)
    assert part.method == "partial-sum"
    assert abs(part.value - ek.ek_quadratic(D).value) < 0.05


def test_partial_sum_naturals_1e8(primes_1e8):
    est = ek.ek_partial_sum(resolve_set("naturals"), 10**8, primes_1e8)
    assert abs(est.value - 0.5772156649) < 0.01


def test_partial_sum_progressions_smoke(primes_1e7):
    a = ek.ek_partial_sum(resolve_set("progsem:4:1"), 10**7, primes_1e7)
    b = ek.ek_partial_sum(resolve_set("progsem:4:3"), 10**7, primes_1e7)
    assert math.isfinite(a.value) and math.isfinite(b.value)
    assert a.method == b.method == "partial-sum" and a.truncation == 10**7


def test_partial_sum_needs_x():
    with pytest.raises(ValueError):
        ek.ek_partial_sum(resolve_set("naturals"), 50)


def test_sum_of_two_squares():
    est = ek.ek_sum_two_squares()
    assert abs(est.value - SB) < 1e-12
    via_agm = ek._agm_route(CTX)
    via_quad = ek.ek_quadratic(-4, CTX).exact - mpmath.log(2)
    assert abs(via_agm - via_quad) < 1e-12


def test_nonhypotenuse():
    est = ek.ek_nonhypotenuse()
    assert abs(est.value - NH) < 1.5e-4
    assert est.value < ek.ek_sum_two_squares().value
    with mpmath.workdps(40):
        alt = (euler_gamma(CTX) - mpmath.log(2) + ek.chi_prime_sum(-4, CTX, "mobius")) / 2
    assert abs(alt - est.exact) < 1e-10


@pytest.mark.parametrize("D", [-3, -4, -7, -8, -23])
def test_sprime_three_expressions(D):
    a, b, c = ek.sprime_expressions(D)
    assert abs(a - b) < 1e-10 and abs(a - c) < 1e-10
    est = ek.ek_sprime_quadratic(D)
    assert est.method == "lfunction" and math.isfinite(est.value)


def test_sprime_partial_sum(primes_1e7):
    part = ek.ek_partial_sum(resolve_set("sprime:-4"), 10**7, primes_1e7)
    assert abs(part.value - ek.ek_sprime_quadratic(-4).value) < 0.05


def test_cilleruelo_constant():
    a = ek.lcm_constant()
    b = ek.lcm_constant_direct()
    assert abs(a - J) < 1e-9 and abs(b - J) < 1e-9
    assert abs(a - b) < 1e-9


def test_cilleruelo_sum_starts_after_two():
    # the version that also drops p = 3 misses (-1/3) log 3/2
    with mpmath.workdps(40):
        full = ek.chi_prime_sum(-4)
        without_3 = full + mpmath.log(3) / 2
        g = euler_gamma(CTX)
        wrong = g - 1 - mpmath.log(2) / 2 - without_3
    assert abs(wrong - J) > 0.5


def test_cilleruelo_lcm_slope():
    n = 10**4
    slope = (log_lcm_f(n) - n * math.log(n)) / n
    assert abs(slope - J) < 0.02


def test_progression_consistency_reports(primes_1e7):
    r3 = ek.progression_consistency(3, 10**7, primes_1e7)
    assert abs(r3.residual) <= 0.1
    assert r3.target == pytest.approx(0.5772156649 + 2 * math.log(3) / 8)
    r5 = ek.progression_consistency(5, 10**7, primes_1e7)
    assert math.isfinite(r5.residual)
    assert r3.gamma_progression.value > r5.gamma_progression.value + 0.1
    assert "0.5247" in r3.notes[0]


def test_structure_detection():
    assert ek.quadratic_structure(resolve_set("naturals")).kind == "zeta"
    st = ek.quadratic_structure(resolve_set("hex"))
    assert (st.kind, st.D, [p for p, *_ in st.exceptions]) == ("quadsem", -3, [3])
    assert ek.quadratic_structure(resolve_set("nonhyp")).kind == "sprime"
    assert ek.quadratic_structure(resolve_set("progsem:5:1")) is None
    assert ek.quadratic_structure(resolve_set("tau-nondiv:5")) is None


def test_generic_route_matches_named_routes():
    for name, named in (("sum2sq", ek.ek_sum_two_squares()), ("nonhyp", ek.ek_nonhypotenuse())):
        st = ek.quadratic_structure(resolve_set(name))
        base = ek.ek_quadratic(st.D) if st.kind == "quadsem" else ek.ek_sprime_quadratic(st.D)
        with mpmath.workdps(42):
            v = base.exact + sum(ek._local_log_derivative(a, p) - ek._local_log_derivative(b, p)
                                 for p, a, b in st.exceptions)
        assert abs(v - named.exact) < 1e-25


def test_hex_lfunction_vs_partial_sum(primes_1e7):
    d = resolve_set("hex")
    assert abs(ek.ek_lfunction(d).value - ek.ek_partial_sum(d, 10**7, primes_1e7).value) < 0.05


def test_depth_independence():
    a = ek.ek_quadratic(-7, PrecisionContext(30))
    b = ek.ek_quadratic(-7, PrecisionContext(45))
    assert abs(a.exact - b.exact) <= a.error + b.error


def test_rejects_bad_discriminant():
    with pytest.raises(ValueError):
        ek.ek_quadratic(-12)
    with pytest.raises(ValueError):
        ek.ek_quadratic(5)


def test_estimate_records_method():
    with pytest.raises(ValueError):
        ek.EKEstimate("x", 0.0, "guess", 0, 0.0)
    d = ek.ek_quadratic(-4).as_dict()
    assert d["method"] == "lfunction" and d["truncation"] > 0


def test_kronecker_used_consistently():
    assert kronecker(-4, 3) == -1 and l_log_deriv_at_1(-4) > 0
