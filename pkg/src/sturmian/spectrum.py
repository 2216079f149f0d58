"""Band structure of periodic approximants and set-level diagnostics.

The spectrum of a period-q approximant is exactly q closed bands whose 2q
edges solve D(E) = +-2.  Edges are located by a symmetric eigensolve of the
(q-1)-site Dirichlet truncation, whose eigenvalues sit one per closed gap
and therefore bracket every band, followed by monotone bisection of the
discriminant inside each bracket.  The union sets Sigma_k of two successive
approximant spectra support the nesting, Hausdorff-distance and measure
checks used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath
import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .contfrac import (
    DEFAULT_BUDGET,
    ContinuedFraction,
    PrecisionBudget,
    convergents,
)
from .operator import (
    PotentialWord,
    discriminant_deriv_mp,
    discriminant_grid,
    periodic_matrices,
    potential_word,
)

__all__ = [
    "Band",
    "SpectrumApprox",
    "SigmaSet",
    "SpectrumError",
    "MAX_Q_DEFAULT",
    "compute_bands",
    "bands_cached",
    "sigma_set",
    "check_nesting",
    "NestingReport",
    "merge_intervals",
    "directed_hausdorff",
    "hausdorff_distance",
    "total_measure",
    "bands_csv",
]

MAX_Q_DEFAULT = 5000
DENSE_Q_CUTOFF = 600
_BISECT_ITERS = 58


class SpectrumError(RuntimeError):
    """Band-structure computation failed or was refused."""


@dataclass(frozen=True)
class Band:
    """One closed spectral band [lower, upper] of a periodic approximant."""

    lower: float
    upper: float
    level: int | None
    index: int
    band_type: str | None = None

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"band with lower {self.lower} > upper {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def interval(self) -> tuple[float, float]:
        return (self.lower, self.upper)

    def strictly_contains(self, other: "Band", tol: float) -> bool:
        return self.lower < other.lower - tol and other.upper + tol < self.upper

    def precedes(self, other: "Band", tol: float = 0.0) -> bool:
        """The strict order [a,b] < [c,d] iff a < c and b < d (with margin)."""
        return self.lower + tol < other.lower and self.upper + tol < other.upper


@dataclass(frozen=True)
class SpectrumApprox:
    """Full sorted band list of one periodic approximant H_{p/q, V}."""

    p: int
    q: int
    V: float
    bands: tuple[Band, ...]
    edges_hp: tuple | None = None  # mpmath edges when bits > 53 were requested

    def intervals(self) -> tuple[tuple[float, float], ...]:
        return tuple(b.interval() for b in self.bands)

    def edges(self) -> np.ndarray:
        return np.array([e for b in self.bands for e in (b.lower, b.upper)])


@dataclass(frozen=True)
class SigmaSet:
    """Sigma_k = sigma(H_{alpha_k}) u sigma(H_{alpha_{k+1}}) as disjoint intervals."""

    level: int
    intervals: tuple[tuple[float, float], ...]


# -- interval-set helpers -----------------------------------------------------

def merge_intervals(intervals: Iterable[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    """Union of closed intervals as a sorted tuple of maximal disjoint ones."""
    ivs = sorted((float(a), float(b)) for a, b in intervals)
    out: list[tuple[float, float]] = []
    for a, b in ivs:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return tuple(out)


def _point_set_distance(x: float, ivs: Sequence[tuple[float, float]]) -> float:
    best = math.inf
    for a, b in ivs:
        if a <= x <= b:
            return 0.0
        best = min(best, abs(x - a), abs(x - b))
    return best


def directed_hausdorff(A: Sequence[tuple[float, float]], B: Sequence[tuple[float, float]]) -> float:
    """sup_{x in A} dist(x, B) for finite unions of closed intervals.

    dist(., B) is piecewise linear with interior maxima only at midpoints of
    B's gaps, so checking A's endpoints plus those midpoints that A covers
    is exact.
    """
    if not A or not B:
        raise ValueError("empty interval set")
    A = merge_intervals(A)
    B = merge_intervals(B)
    candidates = [e for iv in A for e in iv]
    for (a1, b1), (a2, b2) in zip(B, B[1:]):
        mid = 0.5 * (b1 + a2)
        if any(a <= mid <= b for a, b in A):
            candidates.append(mid)
    return max(_point_set_distance(x, B) for x in candidates)


def hausdorff_distance(A: Sequence[tuple[float, float]], B: Sequence[tuple[float, float]]) -> float:
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def total_measure(x) -> float:
    """Lebesgue measure of a union of intervals (or of a spectrum / Sigma set)."""
    if isinstance(x, SpectrumApprox):
        ivs: Sequence[tuple[float, float]] = merge_intervals(x.intervals())
    elif isinstance(x, SigmaSet):
        ivs = x.intervals
    else:
        ivs = merge_intervals(x)
    return float(sum(b - a for a, b in ivs))


# -- band computation ---------------------------------------------------------

def _analytic_small_q(word: PotentialWord, budget: PrecisionBudget) -> list:
    """Exact edges for q <= 2 (the corner construction degenerates there)."""
    d = word.diagonal
    if word.q == 1:
        return [d[0] - 2.0, d[0] + 2.0]
    hp = budget.bits > 53
    with mpmath.workprec(max(budget.bits, 53) + 10):
        d1, d2 = (mpmath.mpf(d[0]), mpmath.mpf(d[1]))
        s, pr = d1 + d2, d1 * d2
        disc = mpmath.sqrt((d1 - d2) ** 2 + 16)
        per = [(s - disc) / 2, (s + disc) / 2]   # D(E) = +2
        anti = [min(d1, d2), max(d1, d2)]        # D(E) = -2
        edges = sorted(per + anti)
    return edges if hp else [float(e) for e in edges]


def _edge_targets(q: int) -> np.ndarray:
    """Sign s_i with D = -2*s_i at the left edge and +2*s_i at the right
    edge of band i (1-based); s_i = (-1)^(q - i)."""
    i = np.arange(1, q + 1)
    return np.where((q - i) % 2 == 0, 1.0, -1.0)


def _bisect_edges(word: PotentialWord, seps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Locate both edges of every band inside its separator bracket.

    Inside [sep_{i-1}, sep_i] the signed discriminant f = s_i * D is <= -2
    left of the band, strictly monotone -2 -> +2 across it, and >= +2 to
    the right, so both edges are monotone-predicate bisections.  The word
    product (not the convergent-chain recursion) is used on purpose: the
    chain multiplies nearly cancelling large factors and its fixed-precision
    noise near deep-level edges at strong coupling produces false signs.
    """
    q = word.q
    sgn = _edge_targets(q)
    llo, lhi = seps[:-1].copy(), seps[1:].copy()
    rlo, rhi = seps[:-1].copy(), seps[1:].copy()
    for _ in range(_BISECT_ITERS):
        lmid = 0.5 * (llo + lhi)
        rmid = 0.5 * (rlo + rhi)
        at_fixpoint = (np.all((lmid == llo) | (lmid == lhi))
                       and np.all((rmid == rlo) | (rmid == rhi)))
        if at_fixpoint:
            break               # every bracket has collapsed to adjacent floats
        f = discriminant_grid(word, np.concatenate([lmid, rmid]))
        fl = sgn * f[:q]
        fr = sgn * f[q:]
        up = fl > -2.0          # past the left edge
        lhi = np.where(up, lmid, lhi)
        llo = np.where(up, llo, lmid)
        down = fr < 2.0         # not yet past the right edge
        rlo = np.where(down, rmid, rlo)
        rhi = np.where(down, rhi, rmid)
    left = 0.5 * (llo + lhi)
    right = np.maximum(0.5 * (rlo + rhi), left)
    return left, right


def _polish_edges_mp(edges: list, word: PotentialWord, budget: PrecisionBudget) -> list:
    """Newton-polish every edge in mpmath from its float64 seed.

    Converges quadratically at transversal edges; at tangential touchings
    (closed gaps, where D' vanishes and the residual is already small) the
    float edge is kept.
    """
    prec = budget.bits + 20
    out = []
    sgn = _edge_targets(word.q)
    with mpmath.workprec(prec):
        step_tol = mpmath.mpf(2) ** (-(budget.bits + 5))
        scale = max(1.0, max(abs(e) for e in edges))
        for j, e in enumerate(edges):
            band_i = j // 2 + 1
            target = (2 if j % 2 else -2) * sgn[band_i - 1]
            x = mpmath.mpf(e)
            converged = False
            for _ in range(80):
                d, dp = discriminant_deriv_mp(word, x, prec=prec)
                if dp == 0:
                    break
                step = (d - target) / dp
                x -= step
                if abs(step) <= step_tol * scale:
                    converged = True
                    break
                if abs(x - e) > 1e-6 * scale:
                    break  # wandered out of the edge's basin; tangency suspect
            out.append(x if converged else mpmath.mpf(e))
    return out


def compute_bands(p: int, q: int, V: float, budget: PrecisionBudget = DEFAULT_BUDGET, *,
                  level: int | None = None,
                  max_q: int = MAX_Q_DEFAULT) -> SpectrumApprox:
    """All q bands of H_{p/q, V}, edges solving |D(E)| = 2.

    Small periods are solved in closed form; moderate ones (q <= 600) take
    the merged eigenvalues of the periodic/antiperiodic pair from a dense
    symmetric eigensolve; larger ones use Dirichlet separators plus
    discriminant bisection, which needs O(q) memory instead of O(q^2).
    Refuses q > max_q rather than degrade.
    """
    if q > max_q:
        raise SpectrumError(f"q={q} exceeds the configured maximum {max_q}")
    word = potential_word(p, q, V)
    hp_edges = None

    if q <= 2:
        edges = _analytic_small_q(word, budget)
        if budget.bits > 53:
            hp_edges = tuple(edges)
            edges = [float(e) for e in edges]
    else:
        try:
            if q <= DENSE_Q_CUTOFF:
                per, anti = periodic_matrices(word)
                edges = np.sort(np.concatenate([np.linalg.eigvalsh(per),
                                                np.linalg.eigvalsh(anti)]))
                edges = [float(e) for e in edges]
            else:
                diag = word.diagonal
                mu = eigvalsh_tridiagonal(diag[: q - 1], np.ones(q - 2))
                seps = np.concatenate([[float(diag.min()) - 3.0], mu,
                                       [float(diag.max()) + 3.0]])
                left, right = _bisect_edges(word, seps)
                edges = [float(x) for pair in zip(left, right) for x in pair]
        except SpectrumError:
            raise
        except Exception as exc:  # LAPACK failure: report, never drop bands
            raise SpectrumError(f"eigensolve failed for q={q}: {exc}") from exc
        if budget.bits > 53:
            hp = _polish_edges_mp(edges, word, budget)
            hp_edges = tuple(hp)
            edges = [float(e) for e in hp]

    edges = sorted(float(e) for e in edges)
    if len(edges) != 2 * q:
        raise SpectrumError(f"expected {2*q} edges for q={q}, found {len(edges)}")
    bands = tuple(
        Band(lower=edges[2 * i], upper=edges[2 * i + 1], level=level, index=i)
        for i in range(q)
    )
    for b1, b2 in zip(bands, bands[1:]):
        if b2.lower < b1.lower:
            raise SpectrumError("band edges out of order after refinement")
    return SpectrumApprox(p=p, q=q, V=float(V), bands=bands, edges_hp=hp_edges)


@lru_cache(maxsize=512)
def _bands_cached(p: int, q: int, V: float, bits: int, abs_tol: float,
                  level: int | None, max_q: int) -> SpectrumApprox:
    return compute_bands(p, q, V, PrecisionBudget(bits, abs_tol), level=level, max_q=max_q)


def bands_cached(p: int, q: int, V: float, budget: PrecisionBudget = DEFAULT_BUDGET, *,
                 level: int | None = None, max_q: int = MAX_Q_DEFAULT) -> SpectrumApprox:
    """Memoised compute_bands; approximant spectra are shared read-only."""
    return _bands_cached(p, q, float(V), budget.bits, budget.abs_tol, level, max_q)


def level_bands(cf: ContinuedFraction, k: int, V: float,
                budget: PrecisionBudget = DEFAULT_BUDGET, *,
                max_q: int = MAX_Q_DEFAULT) -> SpectrumApprox:
    """Bands of the level-k convergent approximant of cf."""
    c = convergents(cf, k)[-1]
    return bands_cached(c.p, c.q, V, budget, level=k, max_q=max_q)


def sigma_set(cf: ContinuedFraction, k: int, V: float,
              budget: PrecisionBudget = DEFAULT_BUDGET, *,
              max_q: int = MAX_Q_DEFAULT) -> SigmaSet:
    """Sigma_k: union of the level-k and level-(k+1) approximant spectra."""
    if k < 0:
        raise ValueError("k must be >= 0")
    sa = level_bands(cf, k, V, budget, max_q=max_q)
    sb = level_bands(cf, k + 1, V, budget, max_q=max_q)
    return SigmaSet(level=k, intervals=merge_intervals(list(sa.intervals()) + list(sb.intervals())))


@dataclass(frozen=True)
class NestingReport:
    """Per-level protrusion of Sigma_{k+1} beyond Sigma_k."""

    entries: tuple[tuple[int, float, bool], ...]  # (k, protrusion, ok)

    @property
    def all_nested(self) -> bool:
        return all(ok for _, _, ok in self.entries)

    @property
    def worst(self) -> float:
        return max((p for _, p, _ in self.entries), default=0.0)


def check_nesting(cf: ContinuedFraction, k_max: int, V: float,
                  budget: PrecisionBudget = DEFAULT_BUDGET, *,
                  max_q: int = MAX_Q_DEFAULT) -> NestingReport:
    """Verify Sigma_{k+1} inside Sigma_k for k = 1..k_max with tolerance slack.

    Protrusions are one-sided Hausdorff excesses; anything above twice the
    budget tolerance is flagged as a failure (reported, not raised).
    """
    entries = []
    slack = 2.0 * budget.abs_tol
    prev = sigma_set(cf, 1, V, budget, max_q=max_q)
    for k in range(1, k_max + 1):
        nxt = sigma_set(cf, k + 1, V, budget, max_q=max_q)
        prot = directed_hausdorff(nxt.intervals, prev.intervals)
        entries.append((k, float(prot), prot <= slack))
        prev = nxt
    return NestingReport(entries=tuple(entries))


def bands_csv(spec: SpectrumApprox) -> str:
    """CSV dump, columns ``p,q,V,index,lower,upper`` (shortest round-trip)."""
    lines = ["p,q,V,index,lower,upper"]
    for b in spec.bands:
        lines.append(f"{spec.p},{spec.q},{spec.V!r},{b.index},{b.lower!r},{b.upper!r}")
    return "\n".join(lines) + "\n"
