import math
import random

import numpy as np
import pytest

from sturmian.operator import (
    chain_discriminant_grid,
    dirichlet_eig_count,
    discriminant,
    discriminant_deriv_mp,
    discriminant_grid,
    discriminant_mp,
    periodic_matrices,
    potential_word,
    transfer_product,
)


class TestPotentialWord:
    def test_free_word(self):
        assert potential_word(0, 1, 5.0).word == (0,)

    def test_half(self):
        assert potential_word(1, 2, 2.0).word == (1, 0)

    def test_three_fifths(self):
        w = potential_word(3, 5, 2.0)
        assert w.word == (1, 0, 1, 1, 0)
        assert sum(w.word) == 3

    def test_ones_count_is_p(self):
        rng = random.Random(0)
        for _ in range(40):
            q = rng.randrange(1, 200)
            p = rng.randrange(0, q + 1)
            if math.gcd(p, q) != 1:
                continue
            assert sum(potential_word(p, q, 1.0).word) == p

    def test_indicator_formula_equivalent(self):
        # v(n) = 1 iff {np/q} lands in [1 - p/q, 1)
        for p, q in ((3, 5), (5, 8), (7, 19)):
            w = potential_word(p, q, 1.0)
            for n in range(1, q + 1):
                frac = (n * p) % q
                assert w.word[n - 1] == (1 if frac >= q - p else 0)

    def test_word_has_period_exactly_q(self):
        w = potential_word(5, 8, 1.0).word
        for shift in range(1, 8):
            assert tuple(w[(i + shift) % 8] for i in range(8)) != w or shift == 0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            potential_word(2, 4, 1.0)
        with pytest.raises(ValueError):
            potential_word(1, 0, 1.0)
        with pytest.raises(ValueError):
            potential_word(5, 3, 1.0)


class TestDiscriminant:
    def test_free_site(self):
        w = potential_word(0, 1, 7.0)
        for e in (-2.0, 0.3, 2.0):
            assert discriminant(w, e) == pytest.approx(e, abs=0)

    def test_constant_potential(self):
        w = potential_word(1, 1, 2.0)
        assert discriminant(w, 2.0) == pytest.approx(0.0)
        assert discriminant(w, 4.0) == pytest.approx(2.0)

    def test_period_two(self):
        # D(E) = E(E-2) - 2 for the word (1, 0) at V = 2
        w = potential_word(1, 2, 2.0)
        for e in (-1.5, 0.0, 1.0, 2.0, 3.3):
            assert discriminant(w, e) == pytest.approx(e * (e - 2) - 2, rel=1e-14)
        for root in (0.0, 2.0, 1 - math.sqrt(5), 1 + math.sqrt(5)):
            assert abs(abs(discriminant(w, root)) - 2.0) < 1e-12

    def test_grid_matches_scalar(self):
        w = potential_word(5, 8, 2.0)
        es = np.linspace(-3, 5, 17)
        grid = discriminant_grid(w, es)
        for e, d in zip(es, grid):
            assert discriminant(w, float(e)) == pytest.approx(float(d), rel=1e-12)

    def test_grid_matches_mp(self):
        w = potential_word(8, 13, 6.0)
        es = np.linspace(-2.5, 8.5, 13)
        grid = discriminant_grid(w, es)
        for e, d in zip(es, grid):
            ref = float(discriminant_mp(w, float(e), prec=120))
            assert float(d) == pytest.approx(ref, rel=1e-9, abs=1e-9)

    def test_deriv_matches_finite_difference(self):
        import mpmath

        w = potential_word(3, 5, 2.0)
        for e in (-1.0, 0.5, 2.7):
            d, dp = discriminant_deriv_mp(w, e, prec=120)
            with mpmath.workprec(120):
                h = mpmath.mpf(2) ** -60
                fd = (discriminant_mp(w, mpmath.mpf(e) + h, prec=120)
                      - discriminant_mp(w, mpmath.mpf(e) - h, prec=120)) / (2 * h)
                assert abs(dp - fd) < 1e-6

    def test_huge_gap_values_saturate_with_sign(self):
        # leading behaviour is E^q, so q odd keeps the sign at -inf
        w = potential_word(233, 377, 6.0)
        d = discriminant_grid(w, np.array([30.0, -30.0]))
        assert d[0] == math.inf and d[1] == -math.inf


class TestChainDiscriminant:
    @pytest.mark.parametrize("quots,pq", [
        ((1,), (1, 1)),
        ((1, 1), (1, 2)),
        ((1, 2), (2, 3)),
        ((1, 2, 4), (9, 13)),
        ((2, 1, 3), (4, 11)),
    ])
    def test_trace_equals_word_product(self, quots, pq):
        # the chain word is a rotation of the canonical one: traces agree
        p, q = pq
        w = potential_word(p, q, 2.0)
        es = np.linspace(-2.5, 4.5, 11)
        ref = discriminant_grid(w, es)
        got = chain_discriminant_grid(quots, 2.0, es)
        np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-9)

    def test_empty_chain_is_free_level(self):
        es = np.array([-1.0, 0.0, 1.7])
        np.testing.assert_allclose(chain_discriminant_grid((), 2.0, es), es)


class TestTransferProduct:
    def test_det_is_one_scaled_by_condition(self):
        rng = random.Random(5)
        for _ in range(15):
            q = rng.choice([10, 100, 500, 2000])
            p = rng.randrange(1, q)
            if math.gcd(p, q) != 1:
                continue
            V = rng.choice([0.5, 2.0, 6.0])
            w = potential_word(p, q, V)
            es = np.linspace(min(0, V) - 2, max(0, V) + 2, 801)
            inside = es[np.abs(discriminant_grid(w, es)) <= 2.0]
            for e in inside[:: max(1, len(inside) // 5)]:
                t = transfer_product(w, float(e))
                scale = max(abs(t.m11), abs(t.m12), abs(t.m21), abs(t.m22))
                scale *= math.ldexp(1.0, min(t.exp2, 500))
                assert abs(t.det() - 1.0) <= 1e-10 * max(1.0, scale)

    def test_trace_consistent(self):
        w = potential_word(2, 5, 1.5)
        t = transfer_product(w, 0.7)
        assert t.trace() == pytest.approx(discriminant(w, 0.7))


class TestPeriodicMatrices:
    def test_q3_example(self):
        w = potential_word(2, 3, 2.0)
        per, anti = periodic_matrices(w)
        np.testing.assert_allclose(per, [[2, 1, 1], [1, 2, 1], [1, 1, 0]])
        np.testing.assert_allclose(anti, [[2, 1, -1], [1, 2, 1], [-1, 1, 0]])

    def test_q1_scalars(self):
        w = potential_word(1, 1, 2.0)
        per, anti = periodic_matrices(w)
        assert per[0, 0] == 4.0 and anti[0, 0] == 0.0

    def test_q2_edge_set(self):
        w = potential_word(1, 2, 2.0)
        per, anti = periodic_matrices(w)
        eigs = sorted(np.concatenate([np.linalg.eigvalsh(per), np.linalg.eigvalsh(anti)]))
        expected = sorted([0.0, 2.0, 1 - math.sqrt(5), 1 + math.sqrt(5)])
        np.testing.assert_allclose(eigs, expected, atol=1e-12)

    def test_eigenvalues_solve_discriminant(self):
        rng = random.Random(1)
        for _ in range(8):
            q = rng.randrange(3, 30)
            p = rng.randrange(1, q)
            if math.gcd(p, q) != 1:
                continue
            w = potential_word(p, q, 2.0)
            per, anti = periodic_matrices(w)
            for mat, target in ((per, 2.0), (anti, -2.0)):
                for e in np.linalg.eigvalsh(mat):
                    assert discriminant(w, float(e)) == pytest.approx(target, abs=1e-6)


class TestDirichletCount:
    def test_single_site(self):
        assert dirichlet_eig_count(potential_word(0, 1, 0.0), 1, 0.0) == 1

    def test_free_three_sites(self):
        # eigenvalues are -sqrt(2), 0, sqrt(2)
        w = potential_word(0, 1, 0.0)
        assert dirichlet_eig_count(w, 3, -0.1) == 1
        assert dirichlet_eig_count(w, 3, 0.1) == 2
        assert dirichlet_eig_count(w, 3, 0.0) in (1, 2)  # multiplicity caveat

    def test_two_site_example(self):
        # [[2, 1], [1, 0]] has eigenvalues 1 +- sqrt(2), both <= 3
        w = potential_word(1, 2, 2.0)
        assert dirichlet_eig_count(w, 2, 3.0) == 2

    def test_matches_eigvalsh(self):
        rng = random.Random(3)
        for _ in range(20):
            q = rng.randrange(1, 12)
            p = rng.randrange(0, q + 1)
            if math.gcd(p, q) != 1:
                continue
            n = rng.randrange(1, 25)
            V = rng.choice([0.5, 2.0, -1.5])
            w = potential_word(p, q, V)
            diag = [V * w.word[i % q] for i in range(n)]
            mat = np.diag(diag) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
            eigs = np.linalg.eigvalsh(mat)
            e = rng.uniform(-4, 4)
            if np.min(np.abs(eigs - e)) < 1e-9:
                continue
            assert dirichlet_eig_count(w, n, e) == int(np.sum(eigs <= e))

    def test_monotone_in_energy(self):
        w = potential_word(3, 5, 2.0)
        vals = [dirichlet_eig_count(w, 40, e) for e in np.linspace(-3, 6, 50)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
