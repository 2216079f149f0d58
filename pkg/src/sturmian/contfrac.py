"""Exact continued-fraction arithmetic for frequencies in (0, 1).

A frequency alpha is specified by its partial quotients, optionally with a
periodic tail.  Convergents, Ostrowski digits and all comparisons are done
in exact integer arithmetic; alpha itself, fractional parts {n*alpha} and
the approximation errors beta_k = |q_k*alpha - p_k| are only ever reported
as enclosing intervals with Fraction endpoints, so downstream interval
comparisons stay rigorous.  Floats never enter this module's arithmetic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

__all__ = [
    "ContinuedFraction",
    "Convergent",
    "PrecisionBudget",
    "Enclosure",
    "DEFAULT_BUDGET",
    "QuotientError",
    "convergents",
    "convergents_csv",
    "alpha_value",
    "frac_n_alpha",
    "beta_value",
    "ostrowski_digits",
    "ostrowski_series_form",
    "ostrowski_residual_bound",
    "rational_grid",
]


class QuotientError(ValueError):
    """A partial quotient was requested beyond a finite quotient list."""


@dataclass(frozen=True)
class PrecisionBudget:
    """Working precision for floating refinement plus the absolute
    tolerance used whenever interval endpoints are compared."""

    bits: int = 53
    abs_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.bits < 53:
            raise ValueError("precision must be at least 53 bits")
        if not self.abs_tol > 0.0:
            raise ValueError("abs_tol must be positive")

    @property
    def tol(self) -> Fraction:
        """abs_tol as an exact Fraction (binary floats convert exactly)."""
        return Fraction(self.abs_tol)


DEFAULT_BUDGET = PrecisionBudget()

_CF_TEXT = re.compile(r"^\s*0\s*(?:,\s*\d+\s*)*(?:,\s*\(\s*\d+\s*(?:,\s*\d+\s*)*\)\s*)?$")


@dataclass(frozen=True)
class ContinuedFraction:
    """alpha = [0; a_1, a_2, ...] with a_k >= 1, alpha in (0, 1).

    ``quotients`` holds the leading quotients a_1..a_K; ``tail`` is repeated
    indefinitely after them.  An empty tail means the expansion stops at K,
    i.e. alpha is the rational [0; a_1, ..., a_K].
    """

    quotients: tuple[int, ...] = ()
    tail: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "quotients", tuple(int(a) for a in self.quotients))
        object.__setattr__(self, "tail", tuple(int(a) for a in self.tail))
        if not self.quotients and not self.tail:
            raise ValueError("need at least one partial quotient")
        for a in self.quotients + self.tail:
            if a < 1:
                raise ValueError(f"partial quotients must be >= 1, got {a}")

    @property
    def is_rational(self) -> bool:
        return not self.tail

    def quotient(self, k: int) -> int:
        """a_k for k >= 1 (the tail supplies indices beyond the head)."""
        if k < 1:
            raise ValueError("quotient index starts at 1")
        if k <= len(self.quotients):
            return self.quotients[k - 1]
        if self.tail:
            return self.tail[(k - len(self.quotients) - 1) % len(self.tail)]
        raise QuotientError(f"quotient a_{k} requested but expansion ends at {len(self.quotients)}")

    @property
    def length(self) -> int | None:
        """Number of quotients for a rational expansion, None if infinite."""
        return None if self.tail else len(self.quotients)

    def head(self, k: int) -> tuple[int, ...]:
        """(a_1, ..., a_k)."""
        return tuple(self.quotient(i) for i in range(1, k + 1))

    def value_exact(self) -> Fraction:
        """Exact value of a rational (finite) expansion."""
        if self.tail:
            raise ValueError("expansion is infinite; use alpha_value for an enclosure")
        x = Fraction(0)
        for a in reversed(self.quotients):
            x = Fraction(1, a + x)
        return x

    @classmethod
    def golden(cls) -> "ContinuedFraction":
        """[0; 1, 1, 1, ...], the golden mean (sqrt(5) - 1) / 2."""
        return cls((), (1,))

    @classmethod
    def parse(cls, text: str) -> "ContinuedFraction":
        """Parse ``0,1,1,1`` (finite) or ``0,1,2,(4,3)`` (periodic tail)."""
        if not _CF_TEXT.match(text):
            raise ValueError(f"malformed continued fraction {text!r}")
        body = text.strip()[1:].lstrip(",").strip()
        tail: tuple[int, ...] = ()
        if "(" in body:
            body, tail_text = body.split("(", 1)
            tail = tuple(int(t) for t in tail_text.rstrip(") \t").split(","))
            body = body.rstrip(", ")
        quots = tuple(int(t) for t in body.split(",")) if body else ()
        return cls(quots, tail)

    def __str__(self) -> str:
        s = "0" + "".join(f",{a}" for a in self.quotients)
        if self.tail:
            s += ",(" + ",".join(str(a) for a in self.tail) + ")"
        return s


@dataclass(frozen=True)
class Convergent:
    """p_k / q_k with the standard seeds (p_-1, q_-1) = (1, 0), (p_0, q_0) = (0, 1)."""

    k: int
    p: int
    q: int

    @property
    def frac(self) -> Fraction:
        return Fraction(self.p, self.q)


@lru_cache(maxsize=None)
def _convergent(cf: ContinuedFraction, k: int) -> Convergent:
    if k == -1:
        return Convergent(-1, 1, 0)
    if k == 0:
        return Convergent(0, 0, 1)
    a = cf.quotient(k)
    c1 = _convergent(cf, k - 1)
    c2 = _convergent(cf, k - 2)
    return Convergent(k, a * c1.p + c2.p, a * c1.q + c2.q)


def convergents(cf: ContinuedFraction, k_max: int) -> list[Convergent]:
    """Convergents for k = -1 .. k_max, exact integers throughout."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if cf.length is not None and k_max > cf.length:
        raise QuotientError(f"k_max={k_max} exceeds the {cf.length} available quotients")
    return [_convergent(cf, k) for k in range(-1, k_max + 1)]


def convergents_csv(cf: ContinuedFraction, k_max: int) -> str:
    """CSV dump of convergents, columns ``k,p,q``."""
    lines = ["k,p,q"]
    lines += [f"{c.k},{c.p},{c.q}" for c in convergents(cf, k_max)]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Enclosure:
    """A closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("empty enclosure")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> float:
        return float((self.lo + self.hi) / 2)

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Enclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


# -- exact linear forms u + v*alpha ------------------------------------------
#
# Everything irrational downstream (fractional parts, beta_k, Ostrowski
# partial sums) is an integer linear form in alpha.  Signs of such forms are
# decided exactly by squeezing alpha between consecutive convergents.

def _bracket(cf: ContinuedFraction, k: int) -> tuple[Fraction, Fraction]:
    """Rational bracket around alpha from convergents k, k+1 (k >= 1)."""
    a = _convergent(cf, k).frac
    b = _convergent(cf, k + 1).frac
    return (a, b) if a < b else (b, a)


def _max_level(cf: ContinuedFraction) -> int | None:
    return None if cf.tail else len(cf.quotients)


def _sign_form(cf: ContinuedFraction, u: int, v: int) -> int:
    """Exact sign of u + v*alpha (zero only possible for rational alpha)."""
    if v == 0:
        return (u > 0) - (u < 0)
    if cf.is_rational:
        x = u + v * cf.value_exact()
        return (x > 0) - (x < 0)
    k = 1
    while True:
        lo, hi = _bracket(cf, k)
        a = u + v * lo
        b = u + v * hi
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        k += 1
        if k > 100_000:  # unreachable for irrational alpha
            raise RuntimeError("sign of linear form did not resolve")


def _form_le(cf: ContinuedFraction, f1: tuple[int, int], f2: tuple[int, int]) -> bool:
    """f1 <= f2 exactly, for linear forms in alpha."""
    return _sign_form(cf, f2[0] - f1[0], f2[1] - f1[1]) >= 0


def _beta_form(cf: ContinuedFraction, k: int) -> tuple[int, int]:
    """beta_k = (-1)^k (q_k alpha - p_k) as the linear form (u, v)."""
    c = _convergent(cf, k)
    s = 1 if k % 2 == 0 else -1
    return (-s * c.p, s * c.q)


def _alpha_enclosure(cf: ContinuedFraction, tol: Fraction) -> Enclosure:
    """Enclosure of alpha of width <= tol (exact point for rational alpha)."""
    if cf.is_rational:
        x = cf.value_exact()
        return Enclosure(x, x)
    k = 1
    while True:
        c1 = _convergent(cf, k)
        c2 = _convergent(cf, k + 1)
        if Fraction(1, c1.q * c2.q) <= tol:
            lo, hi = _bracket(cf, k)
            return Enclosure(lo, hi)
        k += 1


def _form_enclosure(cf: ContinuedFraction, u: int, v: int, tol: Fraction) -> Enclosure:
    """Enclosure of u + v*alpha of width <= tol."""
    if v == 0:
        x = Fraction(u)
        return Enclosure(x, x)
    alpha = _alpha_enclosure(cf, tol / abs(v))
    ends = (u + v * alpha.lo, u + v * alpha.hi)
    return Enclosure(min(ends), max(ends))


def alpha_value(cf: ContinuedFraction, budget: PrecisionBudget = DEFAULT_BUDGET) -> Enclosure:
    """Enclosing interval of alpha of width <= budget.abs_tol.

    Uses |alpha - p_k/q_k| < 1/(q_k q_{k+1}); rational expansions come back
    as exact degenerate intervals.
    """
    return _alpha_enclosure(cf, budget.tol)


def beta_value(cf: ContinuedFraction, k: int, budget: PrecisionBudget = DEFAULT_BUDGET) -> Enclosure:
    """Enclosure of beta_k = |q_k alpha - p_k|."""
    if k < -1:
        raise ValueError("beta index starts at -1")
    u, v = _beta_form(cf, k)
    return _form_enclosure(cf, u, v, budget.tol)


def _floor_n_alpha(cf: ContinuedFraction, n: int) -> int:
    """floor(n*alpha), exact.  Rejects rational alpha with n*alpha integral."""
    if cf.is_rational:
        x = n * cf.value_exact()
        if x.denominator == 1:
            raise ValueError(f"n*alpha is the integer {x}; fractional part undefined as a gap label")
        return math.floor(x)
    k = 1
    while True:
        lo, hi = _bracket(cf, k)
        flo = math.floor(n * lo) if n > 0 else math.floor(n * hi)
        fhi = math.floor(n * hi) if n > 0 else math.floor(n * lo)
        if flo == fhi:
            return flo
        k += 1


def frac_n_alpha(cf: ContinuedFraction, n: int, budget: PrecisionBudget = DEFAULT_BUDGET) -> Enclosure:
    """Enclosure of the fractional part {n*alpha}, width <= budget.abs_tol.

    n may be negative.  Refuses n = 0 and rational alpha with q | n (the
    fractional part would sit exactly on an integer).
    """
    if n == 0:
        raise ValueError("n must be nonzero")
    m = _floor_n_alpha(cf, n)
    return _form_enclosure(cf, -m, n, budget.tol)


# -- Ostrowski digits ---------------------------------------------------------

def _digit_cap(cf: ContinuedFraction, k: int) -> int:
    # k = -1 carries the constant term beta_-1 = 1; one unit reaches labels
    # above 1 - alpha, so its cap is 1.  For k >= 0 the cap is a_{k+1}.
    return 1 if k == -1 else cf.quotient(k + 1)


def ostrowski_digits(cf: ContinuedFraction, n: int, k_max: int) -> tuple[int, ...]:
    """Digits (pi_-1, pi_0, ..., pi_{k_max}) with {n*alpha} = -alpha + sum pi_k beta_k.

    Greedy largest-beta-first extraction with backtracking, done in exact
    integer linear forms.  The returned digits satisfy 0 <= pi_k <= a_{k+1}
    (pi_-1 <= 1) and leave a nonnegative remainder bounded by
    beta_{k_max} + beta_{k_max+1}; when an exactly terminating digit string
    exists within k_max it is found and the remainder is zero.
    """
    if n == 0:
        raise ValueError("n must be nonzero")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    m = _floor_n_alpha(cf, n)
    # remainder starts at {n alpha} + alpha = (n+1)*alpha - m
    r0 = (-m, n + 1)
    betas = [_beta_form(cf, k) for k in range(-1, k_max + 2)]
    caps = [_digit_cap(cf, k) for k in range(-1, k_max + 1)]

    def is_zero(f: tuple[int, int]) -> bool:
        return f == (0, 0) or (cf.is_rational and _sign_form(cf, *f) == 0)

    # DFS, greedy branch first; first fully admissible leaf is the greedy
    # digit string, but a branch reaching remainder exactly zero wins early.
    best: tuple[int, ...] | None = None
    budget_nodes = 50_000
    stack: list[tuple[int, tuple[int, int], tuple[int, ...]]] = [(0, r0, ())]
    seen: set[tuple[int, int, int]] = set()
    while stack and budget_nodes > 0:
        idx, r, digits = stack.pop()
        budget_nodes -= 1
        if is_zero(r):
            return digits + (0,) * (k_max + 2 - len(digits))
        if idx > k_max + 1:
            if best is None:
                best = digits
            continue
        key = (idx, r[0], r[1])
        if key in seen:
            continue
        seen.add(key)
        beta = betas[idx]
        cap = caps[idx]
        # admissible digits: 0 <= r - pi*beta <= beta_k + beta_{k+1}
        nxt = betas[idx + 1]
        bound = (beta[0] + nxt[0], beta[1] + nxt[1])
        choices = []
        for pi in range(cap, -1, -1):
            rr = (r[0] - pi * beta[0], r[1] - pi * beta[1])
            if _sign_form(cf, *rr) < 0:
                continue
            if not _form_le(cf, rr, bound):
                continue
            choices.append((pi, rr))
        # push reversed so the greedy (largest pi) branch pops first
        for pi, rr in reversed(choices):
            stack.append((idx + 1, rr, digits + (pi,)))
    if best is None:
        raise ValueError(f"no admissible Ostrowski digit string up to k_max={k_max} for n={n}")
    return best


def ostrowski_series_form(cf: ContinuedFraction, digits: Sequence[int]) -> tuple[int, int]:
    """Exact linear form of -alpha + sum_{k>=-1} (-1)^k pi_k (q_k alpha - p_k).

    ``digits`` starts at pi_-1.  Raises for digits outside {0,...,a_{k+1}}
    (pi_-1 outside {0, 1}).
    """
    u, v = 0, -1
    for i, pi in enumerate(digits):
        k = i - 1
        cap = _digit_cap(cf, k)
        if not 0 <= pi <= cap:
            raise ValueError(f"digit pi_{k}={pi} outside 0..{cap}")
        bu, bv = _beta_form(cf, k)
        u += pi * bu
        v += pi * bv
    return (u, v)


def ostrowski_residual_bound(cf: ContinuedFraction, k_max: int) -> tuple[int, int]:
    """Linear form of sum_{k>k_max} a_{k+1} beta_k = beta_{k_max} + beta_{k_max+1}."""
    b1 = _beta_form(cf, k_max)
    b2 = _beta_form(cf, k_max + 1)
    return (b1[0] + b2[0], b1[1] + b2[1])


def form_enclosure(cf: ContinuedFraction, form: tuple[int, int],
                   budget: PrecisionBudget = DEFAULT_BUDGET) -> Enclosure:
    """Public enclosure of an integer linear form u + v*alpha."""
    return _form_enclosure(cf, form[0], form[1], budget.tol)


# -- rational grids -----------------------------------------------------------

def rational_grid(q_max: int) -> list[Fraction]:
    """All reduced fractions p/q in (0, 1] with q <= q_max, ascending.

    Farey-neighbour iteration; 1/1 is included, 0/1 is not.
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    out: list[Fraction] = []
    a, b, c, d = 0, 1, 1, q_max
    while c <= d:
        out.append(Fraction(c, d))
        if (c, d) == (1, 1):
            break
        k = (q_max + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    return out
