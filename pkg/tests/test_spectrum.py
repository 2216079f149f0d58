import math
import random
from fractions import Fraction

import numpy as np
import pytest

from sturmian.contfrac import ContinuedFraction, PrecisionBudget
from sturmian.operator import discriminant_grid, potential_word
from sturmian.spectrum import (
    SpectrumError,
    bands_csv,
    check_nesting,
    compute_bands,
    directed_hausdorff,
    hausdorff_distance,
    level_bands,
    merge_intervals,
    sigma_set,
    total_measure,
)

GOLDEN = ContinuedFraction.golden()
SQRT5 = math.sqrt(5)


def brute_force_bands(p, q, V, grid=200001):
    """Oracle: dense sign sampling of the discriminant."""
    w = potential_word(p, q, V)
    es = np.linspace(min(0.0, V) - 2.5, max(0.0, V) + 2.5, grid)
    inside = np.abs(discriminant_grid(w, es)) <= 2.0
    bands = []
    start = None
    for e, flag in zip(es, inside):
        if flag and start is None:
            start = e
        elif not flag and start is not None:
            bands.append((start, prev))
            start = None
        prev = e
    if start is not None:
        bands.append((start, es[-1]))
    return bands


class TestComputeBands:
    def test_free(self):
        spec = compute_bands(0, 1, 7.0)
        assert spec.intervals() == ((-2.0, 2.0),)

    def test_constant(self):
        spec = compute_bands(1, 1, 2.0)
        assert spec.intervals() == ((0.0, 4.0),)

    def test_half_exact(self):
        spec = compute_bands(1, 2, 2.0)
        (a1, b1), (a2, b2) = spec.intervals()
        assert a1 == pytest.approx(1 - SQRT5, abs=1e-13)
        assert b1 == pytest.approx(0.0, abs=1e-13)
        assert a2 == pytest.approx(2.0, abs=1e-13)
        assert b2 == pytest.approx(1 + SQRT5, abs=1e-13)

    def test_against_sign_sampling_oracle(self):
        for p, q, V in ((1, 2, 2.0), (2, 3, 2.0), (3, 5, 1.0), (5, 8, 0.5)):
            spec = compute_bands(p, q, V)
            oracle = brute_force_bands(p, q, V)
            assert len(oracle) == q
            for band, (lo, hi) in zip(spec.bands, oracle):
                assert abs(band.lower - lo) < 1e-4
                assert abs(band.upper - hi) < 1e-4

    def test_band_count_always_q(self):
        rng = random.Random(9)
        for _ in range(30):
            q = rng.randrange(1, 150)
            p = rng.randrange(0, q + 1)
            if math.gcd(p, q) != 1:
                continue
            V = rng.choice([0.5, 2.0, 6.0, -2.0])
            assert len(compute_bands(p, q, V).bands) == q

    def test_dense_and_separator_paths_agree(self):
        # straddle the dense cutoff with the same physical problem family
        for q in (599, 610):
            p = next(x for x in range(q // 3, q) if math.gcd(x, q) == 1)
            w = potential_word(p, q, 2.0)
            spec = compute_bands(p, q, 2.0)
            from sturmian.operator import periodic_matrices
            per, anti = periodic_matrices(w)
            dense = np.sort(np.concatenate([np.linalg.eigvalsh(per),
                                            np.linalg.eigvalsh(anti)]))
            assert np.max(np.abs(dense - spec.edges())) < 5e-9

    def test_refuses_large_q(self):
        with pytest.raises(SpectrumError):
            compute_bands(1, 6000, 2.0)
        compute_bands(1, 6000, 2.0, max_q=6000)  # override allowed

    def test_rejects_unreduced(self):
        with pytest.raises(ValueError):
            compute_bands(2, 4, 1.0)

    def test_high_precision_edges(self):
        budget = PrecisionBudget(bits=100)
        spec = compute_bands(1, 2, 2.0, budget)
        assert spec.edges_hp is not None
        import mpmath
        with mpmath.workprec(110):
            assert abs(spec.edges_hp[0] - (1 - mpmath.sqrt(5))) < mpmath.mpf(2) ** -90

    def test_antisymmetry(self):
        rng = random.Random(77)
        seen = 0
        while seen < 20:
            q = rng.randrange(2, 101)
            p = rng.randrange(1, q + 1)
            if math.gcd(p, q) != 1:
                continue
            seen += 1
            V = rng.choice([1.0, 2.0, 6.0])
            plus = compute_bands(p, q, V)
            minus = compute_bands(p, q, -V)
            for bm, bp in zip(minus.bands, reversed(plus.bands)):
                assert abs(bm.lower + bp.upper) <= 1e-10
                assert abs(bm.upper + bp.lower) <= 1e-10


class TestIntervalSets:
    def test_merge(self):
        assert merge_intervals([(0, 1), (1, 2), (3, 4)]) == ((0.0, 2.0), (3.0, 4.0))
        assert merge_intervals([(3, 4), (0, 2), (1, 2.5)]) == ((0.0, 2.5), (3.0, 4.0))

    def test_hausdorff_shift(self):
        assert hausdorff_distance([(-2, 2)], [(0, 4)]) == pytest.approx(2.0)

    def test_hausdorff_identity(self):
        x = [(-1.0, 0.5), (1.0, 3.0)]
        assert hausdorff_distance(x, x) == 0.0

    def test_hausdorff_gap_midpoint_case(self):
        # B has a gap (0, 10) fully covered by A: the midpoint is the witness
        a = [(-1.0, 11.0)]
        b = [(-1.0, 0.0), (10.0, 11.0)]
        assert directed_hausdorff(a, b) == pytest.approx(5.0)
        assert directed_hausdorff(b, a) == 0.0

    def test_hausdorff_against_grid_oracle(self):
        rng = random.Random(4)
        grid = np.linspace(-5.5, 5.5, 4001)
        for _ in range(25):
            def random_set():
                pts = sorted(rng.uniform(-5, 5) for _ in range(6))
                # snap to the grid so the oracle is exact on these sets
                pts = [float(grid[np.argmin(np.abs(grid - p))]) for p in pts]
                return [(pts[0], pts[1]), (pts[2], pts[3]), (pts[4], pts[5])]
            A, B = random_set(), random_set()
            got = hausdorff_distance(A, B)
            inA = np.zeros(len(grid), bool)
            inB = np.zeros(len(grid), bool)
            for lo, hi in A:
                inA |= (grid >= lo) & (grid <= hi)
            for lo, hi in B:
                inB |= (grid >= lo) & (grid <= hi)
            dmat = np.abs(grid[inA, None] - grid[None, inB])
            oracle = max(dmat.min(axis=1).max(), dmat.min(axis=0).max())
            assert got == pytest.approx(oracle, abs=6e-3)

    def test_measure(self):
        assert total_measure([(-2, 2)]) == 4.0
        spec = compute_bands(1, 2, 2.0)
        assert total_measure(spec) == pytest.approx(2 * SQRT5 - 2, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            directed_hausdorff([], [(0, 1)])


class TestSigmaSets:
    def test_level0_union(self):
        s = sigma_set(GOLDEN, 0, 2.0)
        assert s.intervals == ((-2.0, 4.0),)

    def test_level1_union(self):
        s = sigma_set(GOLDEN, 1, 2.0)
        assert len(s.intervals) == 1
        lo, hi = s.intervals[0]
        assert lo == pytest.approx(1 - SQRT5, abs=1e-13)
        assert hi == pytest.approx(4.0, abs=1e-13)

    def test_free_coupling_trivial(self):
        for k in (0, 2, 5):
            s = sigma_set(GOLDEN, k, 0.0)
            assert len(s.intervals) == 1
            assert s.intervals[0][0] == pytest.approx(-2.0, abs=1e-12)
            assert s.intervals[0][1] == pytest.approx(2.0, abs=1e-12)

    def test_nesting_golden(self):
        rep = check_nesting(GOLDEN, 8, 2.0)
        assert rep.all_nested
        assert rep.worst <= 2e-10

    def test_nesting_124_tail(self):
        rep = check_nesting(ContinuedFraction((1, 2), (4,)), 3, 2.0)
        assert rep.all_nested

    def test_hausdorff_to_deep_level_decreases(self):
        deep = sigma_set(GOLDEN, 10, 2.0)
        dists = [hausdorff_distance(sigma_set(GOLDEN, k, 2.0).intervals, deep.intervals)
                 for k in range(0, 10)]
        assert all(b < a for a, b in zip(dists, dists[1:]))

    def test_measure_decay(self):
        meas = [total_measure(sigma_set(GOLDEN, k, 2.0)) for k in range(0, 11)]
        assert all(b <= a + 1e-12 for a, b in zip(meas, meas[1:]))
        assert meas[10] < meas[4]


class TestLevelBands:
    def test_level_indexing(self):
        spec = level_bands(GOLDEN, 0, 2.0)
        assert (spec.p, spec.q) == (0, 1)
        spec = level_bands(GOLDEN, 6, 2.0)
        assert (spec.p, spec.q) == (8, 13)
        assert spec.bands[0].level == 6

    def test_csv_shape(self):
        text = bands_csv(compute_bands(1, 2, 2.0))
        lines = text.splitlines()
        assert lines[0] == "p,q,V,index,lower,upper"
        assert len(lines) == 3
        assert lines[1].startswith("1,2,2.0,0,")
