import math
from fractions import Fraction

import pytest

from sturmian.contfrac import (
    ContinuedFraction,
    PrecisionBudget,
    QuotientError,
    alpha_value,
    beta_value,
    convergents,
    convergents_csv,
    form_enclosure,
    frac_n_alpha,
    ostrowski_digits,
    ostrowski_residual_bound,
    ostrowski_series_form,
    rational_grid,
)

GOLDEN = ContinuedFraction.golden()
CF124 = ContinuedFraction((1, 2, 4))
CF_TAIL = ContinuedFraction((1, 2), (4,))


def golden_fraction(digits=40):
    """(sqrt(5) - 1) / 2 to `digits` decimals, via integer sqrt."""
    scale = 10 ** digits
    s = math.isqrt(5 * scale * scale)
    return Fraction(s - scale, 2 * scale)


class TestContinuedFraction:
    def test_parse_roundtrip(self):
        for text in ("0,1,1,1", "0,1,2,(4,3)", "0,(1)", "0,2"):
            assert str(ContinuedFraction.parse(text)) == text

    def test_parse_rejects_garbage(self):
        for text in ("1,2", "0,0,1", "0,1,(", "", "0,-3"):
            with pytest.raises(ValueError):
                ContinuedFraction.parse(text)

    def test_tail_supplies_quotients(self):
        cf = ContinuedFraction((1, 2), (4, 3))
        assert [cf.quotient(k) for k in range(1, 8)] == [1, 2, 4, 3, 4, 3, 4]

    def test_finite_expansion_exhausts(self):
        with pytest.raises(QuotientError):
            CF124.quotient(4)

    def test_value_exact(self):
        assert CF124.value_exact() == Fraction(9, 13)
        assert ContinuedFraction((2,)).value_exact() == Fraction(1, 2)


class TestConvergents:
    def test_golden_sequence(self):
        cs = convergents(GOLDEN, 6)
        assert [c.q for c in cs] == [0, 1, 1, 2, 3, 5, 8, 13]
        fracs = [(c.p, c.q) for c in cs[1:7]]
        assert fracs == [(0, 1), (1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]

    def test_single_quotient(self):
        c = convergents(ContinuedFraction((2,)), 1)[-1]
        assert (c.p, c.q) == (1, 2)

    def test_124_chain(self):
        cs = convergents(CF124, 3)
        assert [c.q for c in cs[2:]] == [1, 3, 13]

    def test_recurrence_and_coprimality(self):
        for cf in (GOLDEN, CF_TAIL, ContinuedFraction((3, 1, 5), (2, 7))):
            cs = convergents(cf, 25)
            for c0, c1, c2 in zip(cs, cs[1:], cs[2:]):
                a = cf.quotient(c2.k)
                assert c2.p == a * c1.p + c0.p
                assert c2.q == a * c1.q + c0.q
                if c2.k >= 1:
                    assert math.gcd(c2.p, c2.q) == 1
            qs = [c.q for c in cs if c.k >= 1]
            assert all(b > a for a, b in zip(qs, qs[1:]))

    def test_approximation_inequality(self):
        # |alpha - p_k/q_k| < 1/(q_k q_{k+1}), checked against a tight enclosure
        for cf in (GOLDEN, CF_TAIL):
            alpha = alpha_value(cf, PrecisionBudget(abs_tol=1e-30))
            cs = convergents(cf, 20)
            for c, cn in zip(cs[2:], cs[3:]):
                err = max(abs(alpha.lo - c.frac), abs(alpha.hi - c.frac))
                assert err < Fraction(1, c.q * cn.q)

    def test_csv(self):
        text = convergents_csv(GOLDEN, 2)
        assert text.splitlines() == ["k,p,q", "-1,1,0", "0,0,1", "1,1,1", "2,1,2"]


class TestAlphaValue:
    def test_golden_enclosure(self):
        enc = alpha_value(GOLDEN, PrecisionBudget(abs_tol=1e-12))
        assert enc.width <= Fraction(1, 10**12)
        assert golden_fraction() in enc

    def test_rational_exact(self):
        enc = alpha_value(ContinuedFraction((2,)))
        assert (enc.lo, enc.hi) == (Fraction(1, 2), Fraction(1, 2))

    def test_finite_cf_exact(self):
        enc = alpha_value(CF124)
        assert enc.lo == enc.hi == Fraction(9, 13)


class TestFracNAlpha:
    @pytest.mark.parametrize("n,value", [
        (1, golden_fraction()),
        (2, 2 * golden_fraction() - 1),
        (-1, 1 - golden_fraction()),
    ])
    def test_golden_examples(self, n, value):
        enc = frac_n_alpha(GOLDEN, n, PrecisionBudget(abs_tol=1e-12))
        assert enc.width <= Fraction(1, 10**12)
        # the reference value itself is only 1e-40 accurate
        assert enc.lo - Fraction(1, 10**30) <= value <= enc.hi + Fraction(1, 10**30)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            frac_n_alpha(GOLDEN, 0)

    def test_rational_multiple_rejected(self):
        with pytest.raises(ValueError):
            frac_n_alpha(ContinuedFraction((2,)), 2)  # 2 * 1/2 is an integer

    def test_rational_ok_off_integer(self):
        enc = frac_n_alpha(ContinuedFraction((2,)), 3)
        assert enc.lo == enc.hi == Fraction(1, 2)


class TestBeta:
    def test_monotone_and_recurrence(self):
        budget = PrecisionBudget(abs_tol=1e-25)
        for cf in (GOLDEN, CF_TAIL):
            vals = [beta_value(cf, k, budget) for k in range(-1, 20)]
            for a, b in zip(vals, vals[1:]):
                assert b.hi < a.lo
            # beta_{k+1} = beta_{k-1} - a_{k+1} beta_k
            for k in range(1, 19):
                a = cf.quotient(k + 1)
                lhs = vals[k + 2]
                lo = vals[k].lo - a * vals[k + 1].hi
                hi = vals[k].hi - a * vals[k + 1].lo
                assert lo - Fraction(1, 10**20) <= lhs.lo and lhs.hi <= hi + Fraction(1, 10**20)


def exhaustive_ostrowski(cf, n, k_max, slack=Fraction(1, 10**25)):
    """Oracle: enumerate all admissible digit strings up to k_max."""
    budget = PrecisionBudget(abs_tol=1e-30)
    target = frac_n_alpha(cf, n, budget)
    bound = form_enclosure(cf, ostrowski_residual_bound(cf, k_max), budget)
    caps = [1] + [cf.quotient(k + 1) for k in range(0, k_max + 1)]
    found = []

    def rec(digits):
        if len(digits) == len(caps):
            series = form_enclosure(cf, ostrowski_series_form(cf, digits), budget)
            lo = target.lo - series.hi
            hi = target.hi - series.lo
            if -slack <= hi and lo <= bound.hi + slack:
                found.append(tuple(digits))
            return
        for pi in range(caps[len(digits)] + 1):
            rec(digits + [pi])

    rec([])
    return found


class TestOstrowski:
    @pytest.mark.parametrize("cf,n", [(GOLDEN, 1), (GOLDEN, -1), (GOLDEN, 3),
                                      (CF_TAIL, 1), (CF_TAIL, -2)])
    def test_greedy_is_admissible(self, cf, n):
        k_max = 4
        admissible = exhaustive_ostrowski(cf, n, k_max)
        assert admissible, "oracle found no digit strings"
        digits = ostrowski_digits(cf, n, k_max)
        assert digits in admissible

    @pytest.mark.parametrize("n", [1, -1, 2, -2, 7, -9])
    def test_series_matches_fractional_part(self, n):
        budget = PrecisionBudget(abs_tol=1e-15)
        for cf in (GOLDEN, CF_TAIL):
            digits = ostrowski_digits(cf, n, 20)
            caps = [1] + [cf.quotient(k + 1) for k in range(0, 21)]
            assert all(0 <= pi <= cap for pi, cap in zip(digits, caps))
            series = form_enclosure(cf, ostrowski_series_form(cf, digits), budget)
            bound = form_enclosure(cf, ostrowski_residual_bound(cf, 20), budget)
            target = frac_n_alpha(cf, n, budget)
            assert series.lo - Fraction(1, 10**9) <= target.hi
            assert target.lo <= series.hi + bound.hi + Fraction(1, 10**9)

    def test_all_zero_digits_with_leading_one(self):
        # the k = -1 term alone contributes exactly 1, so the series is 1 - alpha
        digits = (1,) + (0,) * 10
        u, v = ostrowski_series_form(GOLDEN, digits)
        assert (u, v) == (1, -1)

    def test_digit_bound_enforced(self):
        with pytest.raises(ValueError):
            ostrowski_series_form(GOLDEN, (0, 2))  # a_1 = 1 caps pi_0 at 1

    def test_rejects_zero_n(self):
        with pytest.raises(ValueError):
            ostrowski_digits(GOLDEN, 0, 5)


class TestRationalGrid:
    def test_small_grids(self):
        assert rational_grid(2) == [Fraction(1, 2), Fraction(1, 1)]
        assert rational_grid(3) == [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(1, 1)]

    def test_counts_match_totient_sum(self):
        for q_max in (5, 12, 30):
            grid = rational_grid(q_max)
            brute = sorted(
                Fraction(p, q)
                for q in range(1, q_max + 1)
                for p in range(1, q + 1)
                if math.gcd(p, q) == 1
            )
            assert grid == brute

    def test_grid_q5_has_ten_entries(self):
        assert len(rational_grid(5)) == 10


class TestPrecisionBudget:
    def test_validation(self):
        with pytest.raises(ValueError):
            PrecisionBudget(bits=52)
        with pytest.raises(ValueError):
            PrecisionBudget(abs_tol=0.0)
