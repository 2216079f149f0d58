"""Self-contained invariant suites behind ``sturmian verify``.

Each suite replays the structural guarantees of one module at desk-scale
parameters and returns machine-readable results; the CLI turns the first
failure into a nonzero exit.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bandtree, contfrac, gaplabels, operator, spectrum
from .contfrac import ContinuedFraction, PrecisionBudget

__all__ = ["SUITES", "run_suite", "CheckResult"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _cfs():
    return [
        ("golden", ContinuedFraction.golden()),
        ("one-two-four", ContinuedFraction((1, 2), (4,))),
        ("mixed", ContinuedFraction((3, 1, 2), (2, 1))),
    ]


# -- contfrac -----------------------------------------------------------------

def _check_convergent_recurrence(budget):
    for name, cf in _cfs():
        cs = contfrac.convergents(cf, 30)
        for c0, c1, c2 in zip(cs, cs[1:], cs[2:]):
            a = cf.quotient(c2.k)
            if c2.p != a * c1.p + c0.p or c2.q != a * c1.q + c0.q:
                return CheckResult("convergent-recurrence", False, f"{name} at k={c2.k}")
            if c2.k >= 1 and math.gcd(c2.p, c2.q) != 1:
                return CheckResult("convergent-recurrence", False, f"{name} gcd at k={c2.k}")
        qs = [c.q for c in cs[2:]]
        if any(b <= a for a, b in zip(qs, qs[1:])):
            return CheckResult("convergent-recurrence", False, f"{name} q not increasing")
    return CheckResult("convergent-recurrence", True, "3 expansions, k <= 30")


def _check_approx_quality(budget):
    for name, cf in _cfs():
        cs = contfrac.convergents(cf, 25)
        alpha = contfrac.alpha_value(cf, PrecisionBudget(abs_tol=1e-30))
        for c, cn in zip(cs[2:], cs[3:]):
            bound = Fraction(1, c.q * cn.q)
            err_lo = abs(alpha.lo - c.frac)
            err_hi = abs(alpha.hi - c.frac)
            if max(err_lo, err_hi) >= bound + alpha.width:
                return CheckResult("approximation-bound", False, f"{name} k={c.k}")
    return CheckResult("approximation-bound", True, "|alpha - p/q| < 1/(q q') for k <= 24")


def _check_beta_recurrence(budget):
    for name, cf in _cfs():
        prev = None
        for k in range(-1, 24):
            b = contfrac.beta_value(cf, k, PrecisionBudget(abs_tol=1e-25))
            if prev is not None and not b.hi < prev.lo + Fraction(1, 10**20):
                return CheckResult("beta-decreasing", False, f"{name} at k={k}")
            prev = b
    return CheckResult("beta-decreasing", True, "beta strictly decreasing, k <= 23")


def _check_ostrowski(budget):
    for name, cf in _cfs():
        for n in list(range(-12, 0)) + list(range(1, 13)):
            digits = contfrac.ostrowski_digits(cf, n, 18)
            for i, pi in enumerate(digits):
                cap = 1 if i == 0 else cf.quotient(i)
                if not 0 <= pi <= cap:
                    return CheckResult("ostrowski-digits", False, f"{name} n={n} digit {i}")
            series = gaplabels.series_label(cf, digits, 18, budget)
            target = contfrac.frac_n_alpha(cf, n, budget)
            if not (series.lo <= target.hi and target.lo <= series.hi):
                return CheckResult("ostrowski-digits", False, f"{name} n={n} series mismatch")
    return CheckResult("ostrowski-digits", True, "bounds + series agreement, |n| <= 12, depth 18")


# -- spectrum -----------------------------------------------------------------

def _check_band_counts(budget):
    rng = random.Random(7)
    for _ in range(25):
        q = rng.randrange(1, 120)
        p = rng.randrange(0, q + 1)
        if math.gcd(p, q) != 1:
            continue
        V = rng.choice([0.5, 1.0, 2.0, 6.0])
        spec = spectrum.compute_bands(p, q, V, budget)
        if len(spec.bands) != q:
            return CheckResult("band-count", False, f"{p}/{q} V={V}")
    return CheckResult("band-count", True, "q bands for random reduced p/q, q < 120")


def _check_edge_residuals(budget):
    # Absolute residuals require the high-precision polish: an edge of a
    # band of width w has |D'| ~ 1/w, so binary64 edges cannot hold
    # |D| - 2 below tolerance once bands are narrower than ~1e-6.
    hp = PrecisionBudget(bits=max(budget.bits, 100), abs_tol=budget.abs_tol)
    rng = random.Random(11)
    worst = 0.0
    cases = 0
    while cases < 6:
        q = rng.randrange(3, 60)
        p = rng.randrange(1, q)
        if math.gcd(p, q) != 1:
            continue
        cases += 1
        V = rng.choice([1.0, 2.0, 6.0])
        spec = spectrum.compute_bands(p, q, V, hp)
        word = operator.potential_word(p, q, V)
        for e in spec.edges_hp:
            d, _ = operator.discriminant_deriv_mp(word, e, prec=hp.bits + 20)
            worst = max(worst, float(abs(abs(d) - 2)))
    ok = worst <= budget.abs_tol
    return CheckResult("edge-residual", ok, f"max ||D|-2| = {worst:.3e} at {hp.bits} bits")


def _check_cross_view(budget):
    rng = random.Random(3)
    for _ in range(10):
        q = rng.randrange(3, 40)
        p = rng.randrange(1, q)
        if math.gcd(p, q) != 1:
            continue
        V = rng.choice([0.5, 2.0])
        word = operator.potential_word(p, q, V)
        per, anti = operator.periodic_matrices(word)
        eigs = np.sort(np.concatenate([np.linalg.eigvalsh(per), np.linalg.eigvalsh(anti)]))
        spec = spectrum.compute_bands(p, q, V, budget)
        if np.max(np.abs(eigs - spec.edges())) > 1e-8:
            return CheckResult("cross-view", False, f"{p}/{q} V={V}")
    return CheckResult("cross-view", True, "merged matrix eigenvalues match refined edges")


def _check_nesting_suite(budget):
    for name, cf, kmax in [("golden", ContinuedFraction.golden(), 8),
                           ("one-two-four", ContinuedFraction((1, 2), (4,)), 4)]:
        for V in (0.5, 2.0, 6.0):
            rep = spectrum.check_nesting(cf, kmax, V, budget)
            if not rep.all_nested:
                return CheckResult("sigma-nesting", False, f"{name} V={V} worst={rep.worst:.2e}")
    return CheckResult("sigma-nesting", True, "Sigma_{k+1} inside Sigma_k at three couplings")


def _check_antisymmetry(budget):
    rng = random.Random(23)
    for _ in range(10):
        q = rng.randrange(2, 90)
        p = rng.randrange(1, q + 1)
        if math.gcd(p, q) != 1:
            continue
        V = rng.choice([1.0, 2.0, 6.0])
        plus = spectrum.compute_bands(p, q, V, budget)
        minus = spectrum.compute_bands(p, q, -V, budget)
        for bm, bp in zip(minus.bands, reversed(plus.bands)):
            if abs(bm.lower + bp.upper) > 1e-10 or abs(bm.upper + bp.lower) > 1e-10:
                return CheckResult("antisymmetry", False, f"{p}/{q} V={V}")
    return CheckResult("antisymmetry", True, "bands(-V) = -reverse(bands(V)) to 1e-10")


def _check_measure_decay(budget):
    cf = ContinuedFraction.golden()
    meas = [spectrum.total_measure(spectrum.sigma_set(cf, k, 2.0, budget)) for k in range(0, 9)]
    ok = all(b <= a + 1e-9 for a, b in zip(meas, meas[1:]))
    return CheckResult("measure-decay", ok, f"Leb(Sigma_k) = {', '.join(f'{m:.4f}' for m in meas)}")


# -- tree ---------------------------------------------------------------------

def _check_tree_build(budget):
    for V in (0.5, 6.0):
        tree = bandtree.build_tree(ContinuedFraction.golden(), V, 8, budget)
        rep = bandtree.verify_interlacing(tree, budget)
        if not rep.ok:
            return CheckResult("tree-build", False, f"V={V}: {rep.violations[:2]}")
    return CheckResult("tree-build", True, "golden tree depth 8 at V=0.5 and V=6")


def _check_tree_isomorphism(budget):
    t1 = bandtree.build_tree(ContinuedFraction.golden(), 0.5, 8, budget)
    t2 = bandtree.build_tree(ContinuedFraction.golden(), 6.0, 8, budget)
    ok = t1.shape_signature() == t2.shape_signature()
    return CheckResult("tree-V-independence", ok, "typed shapes agree at V=0.5 and V=6")


def _check_enclosure_shrink(budget):
    tree = bandtree.build_tree(ContinuedFraction.golden(), 2.0, 8, budget)
    node = tree.root
    widths = []
    while node.children:
        node = tree.nodes[node.children[-1]]
        widths.append(node.upper - node.lower)
    ok = all(b < a for a, b in zip(widths, widths[1:]))
    return CheckResult("enclosure-shrink", ok, f"widths along rightmost path: {widths}")


# -- labels -------------------------------------------------------------------

def _check_ids_monotone(budget):
    word_es = np.linspace(-3.0, 5.0, 41)
    vals = [gaplabels.ids_value(2, 5, 2.0, float(e), 2000) for e in word_es]
    ok = all(b >= a for a, b in zip(vals, vals[1:]))
    return CheckResult("ids-monotone", ok, "finite-volume IDS nondecreasing in E")


def _check_label_congruence(budget):
    for q in range(2, 56):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            spec = spectrum.bands_cached(p, q, 2.0, budget)
            for gap in gaplabels.gaps_of_level(spec, budget):
                n = (gap.m * pow(p, -1, q)) % q
                if n == 0 or (n * p - gap.m) % q != 0:
                    return CheckResult("label-congruence", False, f"{p}/{q} m={gap.m}")
    return CheckResult("label-congruence", True, "every gap label m/q solves m = n p (mod q), q <= 55")


def _check_certificates(budget):
    cf = ContinuedFraction.golden()
    for n in (-5, -2, -1, 1, 2, 5):
        cert = gaplabels.certify_gap(cf, 2.0, n, 10, budget)
        if cert.status != "certified":
            return CheckResult("certificates", False, f"n={n}: {cert.status}")
        for rec in cert.levels:
            if (n * rec.p - rec.m) % rec.q != 0:
                return CheckResult("certificates", False, f"n={n} congruence at k={rec.k}")
        mirror = gaplabels.negative_coupling_transfer(cert, budget)
        if mirror.status != "certified" or mirror.n != -n:
            return CheckResult("certificates", False, f"n={n} mirror failed")
    return CheckResult("certificates", True, "golden V=2 certified for n in {-5,-2,-1,1,2,5}, mirrored")


SUITES = {
    "contfrac": [_check_convergent_recurrence, _check_approx_quality,
                 _check_beta_recurrence, _check_ostrowski],
    "spectrum": [_check_band_counts, _check_edge_residuals, _check_cross_view,
                 _check_nesting_suite, _check_antisymmetry, _check_measure_decay],
    "tree": [_check_tree_build, _check_tree_isomorphism, _check_enclosure_shrink],
    "labels": [_check_ids_monotone, _check_label_congruence, _check_certificates],
}


def run_suite(name: str, budget: PrecisionBudget) -> list[CheckResult]:
    if name == "all":
        checks = [c for suite in SUITES.values() for c in suite]
    elif name in SUITES:
        checks = SUITES[name]
    else:
        raise KeyError(name)
    return [check(budget) for check in checks]
