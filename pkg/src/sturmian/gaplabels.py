"""Gap labels, the integrated density of states, and open-gap certificates.

At level k the gap holding IDS value m/q_k is pinned down exactly by the
congruence m = n * p_k (mod q_k); following that gap across levels and
watching it widen monotonically (the union sets shrink, so true gaps only
grow) yields finite-depth numerical evidence that the limiting gap with
label {n*alpha} is open.  A certificate is evidence with margins, never a
proof: the status vocabulary keeps that explicit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .bandtree import BandTree, TreeError
from .contfrac import (
    DEFAULT_BUDGET,
    ContinuedFraction,
    Enclosure,
    PrecisionBudget,
    convergents,
    form_enclosure,
    frac_n_alpha,
    ostrowski_residual_bound,
    ostrowski_series_form,
)
from .operator import PotentialWord, dirichlet_eig_count, potential_word
from .spectrum import MAX_Q_DEFAULT, SpectrumApprox, bands_cached, level_bands

__all__ = [
    "Gap",
    "GapLevelRecord",
    "GapCertificate",
    "CertificationError",
    "gaps_of_level",
    "ids_value",
    "series_label",
    "certify_gap",
    "two_path_witness",
    "negative_coupling_transfer",
    "certificate_json",
]

IDS_SITES_PER_PERIOD = 50
IDS_SITES_CAP = 1_000_000


class CertificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Gap:
    """An open gap (a, b) of one approximant, with its exact label m/q."""

    level: int | None
    lower: float
    upper: float
    m: int            # number of bands entirely below the gap
    q: int

    @property
    def exact_label(self) -> Fraction:
        return Fraction(self.m, self.q)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def gaps_of_level(spec: SpectrumApprox, budget: PrecisionBudget = DEFAULT_BUDGET) -> list[Gap]:
    """All interior gaps of an approximant spectrum.

    Adjacent bands whose edges coincide within abs_tol are touching: a gap
    closed at this level, and not reported.
    """
    tol = budget.abs_tol
    out = []
    level = spec.bands[0].level if spec.bands else None
    for left, right in zip(spec.bands, spec.bands[1:]):
        if right.lower - left.upper > tol:
            out.append(Gap(level=level, lower=left.upper, upper=right.lower,
                           m=left.index + 1, q=spec.q))
    return out


def ids_value(p: int, q: int, V: float, E: float, n_sites: int | None = None,
              budget: PrecisionBudget = DEFAULT_BUDGET) -> float:
    """Finite-volume IDS surrogate: eigenvalues <= E of the n-site Dirichlet
    restriction, divided by n.  Converges to the exact label m/q with error
    O(1/n_sites) when E sits in a gap."""
    word = potential_word(p, q, V)
    if n_sites is None:
        n_sites = min(IDS_SITES_PER_PERIOD * q, IDS_SITES_CAP)
    return dirichlet_eig_count(word, n_sites, E) / n_sites


def series_label(cf: ContinuedFraction, digits: Sequence[int], k_max: int,
                 budget: PrecisionBudget = DEFAULT_BUDGET) -> Enclosure:
    """Enclosure of -alpha + sum_{k=-1}^{k_max} (-1)^k pi_k (q_k alpha - p_k),
    widened upward by the truncation residual bound sum_{k>k_max} a_{k+1} beta_k."""
    digits = tuple(digits)[: k_max + 2]
    u, v = ostrowski_series_form(cf, digits)
    partial = form_enclosure(cf, (u, v), budget)
    ru, rv = ostrowski_residual_bound(cf, k_max)
    residual = form_enclosure(cf, (ru, rv), budget)
    return Enclosure(partial.lo, partial.hi + max(residual.hi, Fraction(0)))


@dataclass(frozen=True)
class GapLevelRecord:
    k: int
    p: int
    q: int
    m: int
    gap_lo: float
    gap_hi: float
    margin: float


@dataclass(frozen=True)
class GapCertificate:
    """Finite-depth evidence that the gap labelled {n*alpha} is open."""

    n: int
    target_lo: float
    target_hi: float
    levels: tuple[GapLevelRecord, ...]
    status: str                     # "certified" | "closed-at-depth" | "undecided"
    cf: ContinuedFraction
    V: float
    depth: int

    @property
    def final(self) -> GapLevelRecord | None:
        return self.levels[-1] if self.levels else None


def certificate_json(cert: GapCertificate) -> dict:
    """Canonical JSON document: field order is fixed for diff-based testing."""
    return {
        "n": cert.n,
        "target_label": {"lo": cert.target_lo, "hi": cert.target_hi},
        "levels": [
            {"k": r.k, "p": r.p, "q": r.q, "m": r.m,
             "gap_lo": r.gap_lo, "gap_hi": r.gap_hi, "margin": r.margin}
            for r in cert.levels
        ],
        "status": cert.status,
    }


def certify_gap(cf: ContinuedFraction, V: float, n: int, depth: int,
                budget: PrecisionBudget = DEFAULT_BUDGET, *,
                max_q: int = MAX_Q_DEFAULT) -> GapCertificate:
    """Track the gap with label {n*alpha} through levels 3..depth.

    At level k the candidate gap separates bands m-1 and m where
    m = n*p_k mod q_k; the certificate requires those gaps to be nested
    increasing across recorded levels and the final margin to clear ten
    times the endpoint tolerance.
    """
    if V <= 0:
        raise ValueError("certification runs at V > 0; mirror negative couplings instead")
    if n == 0:
        raise ValueError("n = 0 labels the spectrum bottom, not a gap")
    if depth < 3:
        raise ValueError("depth must be >= 3")
    convs = convergents(cf, depth)
    if convs[-1].q <= abs(n):
        raise CertificationError(
            f"|n| = {abs(n)} needs q_depth > |n| (q_{depth} = {convs[-1].q}); increase depth")
    target = frac_n_alpha(cf, n, budget)
    tol = budget.abs_tol

    records: list[GapLevelRecord] = []
    saw_open = False
    for k in range(3, depth + 1):
        c = convs[k + 1]
        m = (n * c.p) % c.q
        if m == 0:
            continue  # the label collapses to the trivial boundary at this level
        spec = level_bands(cf, k, V, budget, max_q=max_q)
        lo = spec.bands[m - 1].upper
        hi = spec.bands[m].lower
        margin = hi - lo
        records.append(GapLevelRecord(k=k, p=c.p, q=c.q, m=m, gap_lo=lo, gap_hi=hi, margin=margin))
        if margin > tol:
            saw_open = True

    # Single-level gaps oscillate; the monotone objects are the gaps of the
    # union sets Sigma_k, i.e. intersections of consecutive level gaps, which
    # are nested increasing once the congruence has locked onto the limiting
    # gap (at low levels m wraps and the located gap can jump slots).  The
    # certificate demands a stabilised trailing run of at least three levels.
    run_levels = 0
    sigma_gap = None
    for a, b in zip(records, records[1:]):
        ok_pair = b.k == a.k + 1 and a.margin > tol and b.margin > tol
        if ok_pair:
            lo = max(a.gap_lo, b.gap_lo)
            hi = min(a.gap_hi, b.gap_hi)
            ok_pair = hi - lo > tol
        if ok_pair and sigma_gap is not None and run_levels >= 2:
            ok_pair = lo <= sigma_gap[0] + 2 * tol and hi >= sigma_gap[1] - 2 * tol
        if ok_pair:
            run_levels = max(run_levels, 1) + 1
            sigma_gap = (lo, hi)
        else:
            run_levels = 0
            sigma_gap = None

    final = records[-1] if records else None
    if final is None:
        status = "undecided"
    elif not saw_open:
        status = "closed-at-depth"
    elif final.margin > 10 * budget.abs_tol and run_levels >= 3:
        status = "certified"
    else:
        status = "undecided"
    return GapCertificate(
        n=n, target_lo=float(target.lo), target_hi=float(target.hi),
        levels=tuple(records), status=status, cf=cf, V=float(V), depth=depth,
    )


def two_path_witness(tree: BandTree, cert: GapCertificate) -> tuple[list[int], list[int]]:
    """The two root paths flanking a certified gap.

    Terminal bands are the level-k bands left and right of the certificate's
    final gap; their finite-volume IDS values at the gap edge agree with the
    exact label m/q to the counting error O(q/n_sites).
    """
    if cert.status != "certified":
        raise CertificationError(f"certificate for n={cert.n} is {cert.status}, not certified")
    final = cert.final
    if final.k > tree.depth:
        raise CertificationError(f"tree depth {tree.depth} < certificate depth {final.k}")
    level_ids = tree.levels[final.k]
    left = tree.nodes[level_ids[final.m - 1]]
    right = tree.nodes[level_ids[final.m]]
    n_sites = min(IDS_SITES_PER_PERIOD * final.q, IDS_SITES_CAP)
    mid = 0.5 * (final.gap_lo + final.gap_hi)
    ids = ids_value(final.p, final.q, cert.V, mid, n_sites)
    label = final.m / final.q
    if abs(ids - label) > 2.0 * final.q / n_sites + 1e-9:
        raise CertificationError(
            f"IDS check failed: counted {ids}, label {label} at level {final.k}")
    return tree.path_to(left.node_id), tree.path_to(right.node_id)


def negative_coupling_transfer(cert: GapCertificate,
                               budget: PrecisionBudget = DEFAULT_BUDGET, *,
                               max_q: int = MAX_Q_DEFAULT) -> GapCertificate:
    """Mirror a positive-coupling certificate to coupling -V.

    Spectra are antisymmetric under V -> -V, so the gap (a, b) with label
    {n*alpha} maps to (-b, -a) with label 1 - {n*alpha} = {-n*alpha}.  The
    mirror is validated by recomputing the final level at -V and checking
    endpoint negation to abs_tol.
    """
    if cert.V <= 0:
        raise ValueError("transfer starts from a positive-coupling certificate")
    final = cert.final
    if final is not None:
        plus = level_bands(cert.cf, final.k, cert.V, budget, max_q=max_q)
        minus = level_bands(cert.cf, final.k, -cert.V, budget, max_q=max_q)
        tol = budget.abs_tol
        for b_minus, b_plus in zip(minus.bands, reversed(plus.bands)):
            if (abs(b_minus.lower + b_plus.upper) > tol
                    or abs(b_minus.upper + b_plus.lower) > tol):
                raise CertificationError(
                    f"mirror validation failed at level {final.k}: "
                    f"{b_minus.interval()} vs {b_plus.interval()}")
    mirrored = tuple(
        GapLevelRecord(k=r.k, p=r.p, q=r.q, m=r.q - r.m,
                       gap_lo=-r.gap_hi, gap_hi=-r.gap_lo, margin=r.margin)
        for r in cert.levels
    )
    return GapCertificate(
        n=-cert.n, target_lo=1.0 - cert.target_hi, target_hi=1.0 - cert.target_lo,
        levels=mirrored, status=cert.status, cf=cert.cf, V=-cert.V, depth=cert.depth,
    )
