"""Sturmian potential words and the operator views behind the band structure.

Three ways of looking at the same period-q operator:

* finite Dirichlet restrictions, queried through Sturm sign counts;
* the periodic / antiperiodic q x q matrices whose merged eigenvalues are
  the band edges;
* the discriminant D(E) = tr(T_q ... T_1), with |D| <= 2 exactly on the
  approximant spectrum.

Transfer products are evaluated with power-of-two renormalisation so that
energies deep inside gaps (where entries overflow binary64) still produce
usable signs; a convergent chain, when known, gives the same discriminant
in O(k) matrix steps instead of O(q_k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

__all__ = [
    "PotentialWord",
    "TransferMatrixProduct",
    "potential_word",
    "transfer_product",
    "discriminant",
    "discriminant_grid",
    "chain_discriminant_grid",
    "discriminant_mp",
    "discriminant_deriv_mp",
    "periodic_matrices",
    "dirichlet_eig_count",
]


@dataclass(frozen=True)
class PotentialWord:
    """One period of the potential at frequency p/q with coupling V.

    word[n-1] = floor((n+1)p/q) - floor(np/q) for n = 1..q, which is 1
    exactly when {np/q} lands in [1 - p/q, 1).
    """

    p: int
    q: int
    V: float
    word: tuple[int, ...]

    @property
    def diagonal(self) -> np.ndarray:
        return self.V * np.array(self.word, dtype=float)


def potential_word(p: int, q: int, V: float) -> PotentialWord:
    if q < 1:
        raise ValueError("q must be >= 1")
    if not 0 <= p <= q:
        raise ValueError("need 0 <= p <= q")
    if math.gcd(p, q) != 1:
        raise ValueError(f"{p}/{q} is not reduced")
    word = tuple((n + 1) * p // q - n * p // q for n in range(1, q + 1))
    return PotentialWord(p, q, float(V), word)


@dataclass(frozen=True)
class TransferMatrixProduct:
    """2x2 transfer product at one energy, scaled by 2**exp2.

    Each factor [[E - V*v(n), -1], [1, 0]] has determinant one, so the
    determinant of the full product is exactly one as well.
    """

    m11: float
    m12: float
    m21: float
    m22: float
    exp2: int = 0

    def det(self) -> float:
        return math.ldexp(self.m11 * self.m22 - self.m12 * self.m21, 2 * self.exp2)

    def trace(self) -> float:
        t = self.m11 + self.m22
        if self.exp2 > 1020:
            return math.copysign(math.inf, t) if t else 0.0
        return math.ldexp(t, self.exp2)


_RENORM_LIMIT = 2.0 ** 400
_RENORM_SHIFT = 400


def transfer_product(word: PotentialWord, E: float) -> TransferMatrixProduct:
    """T_q ... T_1 at energy E, renormalised by powers of two."""
    m11, m12, m21, m22 = 1.0, 0.0, 0.0, 1.0
    exp2 = 0
    for v in word.word:
        a = E - word.V * v
        m11, m12, m21, m22 = a * m11 - m21, a * m12 - m22, m11, m12
        big = max(abs(m11), abs(m12), abs(m21), abs(m22))
        if big > _RENORM_LIMIT:
            s = 0.5 ** _RENORM_SHIFT
            m11 *= s; m12 *= s; m21 *= s; m22 *= s
            exp2 += _RENORM_SHIFT
    return TransferMatrixProduct(m11, m12, m21, m22, exp2)


def discriminant(word: PotentialWord, E: float) -> float:
    """tr(T_q ... T_1) at energy E; +-inf when the true value overflows."""
    return transfer_product(word, E).trace()


# -- vectorised discriminants -------------------------------------------------
#
# Matrices are (m11, m12, m21, m22) arrays plus an integer exponent array;
# entries are kept below 2**400 so products never overflow and the final
# trace is reconstructed through ldexp (saturating to +-inf, sign intact).

def _renorm(m, e):
    m11, m12, m21, m22 = m
    big = np.maximum(np.maximum(np.abs(m11), np.abs(m12)),
                     np.maximum(np.abs(m21), np.abs(m22)))
    need = big > _RENORM_LIMIT
    if np.any(need):
        # scale the max entry back to [0.5, 1); ldexp shifts are exact
        shift = np.where(need, np.frexp(big)[1], 0).astype(np.int64)
        m = (np.ldexp(m11, -shift), np.ldexp(m12, -shift),
             np.ldexp(m21, -shift), np.ldexp(m22, -shift))
        e = e + shift
    return m, e


def _mul(A, ea, B, eb):
    a11, a12, a21, a22 = A
    b11, b12, b21, b22 = B
    out = (a11 * b11 + a12 * b21, a11 * b12 + a12 * b22,
           a21 * b11 + a22 * b21, a21 * b12 + a22 * b22)
    return _renorm(out, ea + eb)


def _pow(A, ea, n):
    one = np.ones_like(A[0])
    zero = np.zeros_like(A[0])
    R, er = (one, zero, zero, one), np.zeros_like(ea)
    while n:
        if n & 1:
            R, er = _mul(R, er, A, ea)
        n >>= 1
        if n:
            A, ea = _mul(A, ea, A, ea)
    return R, er


def _trace_value(m, e):
    t = m[0] + m[3]
    with np.errstate(over="ignore", invalid="ignore"):
        saturated = np.where(t == 0.0, 0.0, np.sign(t) * np.inf)
        out = np.where(e > 1020, saturated,
                       np.ldexp(t, np.minimum(e, 1021).astype(np.int64)))
    return out


def discriminant_grid(word: PotentialWord, E) -> np.ndarray:
    """Discriminant on an array of energies (word-product sweep, O(q)).

    Renormalisation is amortised: entries grow by at most a fixed factor
    per site, so checking every ``stride`` sites keeps everything well
    inside binary64 range.
    """
    E = np.asarray(E, dtype=float)
    one = np.ones_like(E)
    zero = np.zeros_like(E)
    m11, m12, m21, m22 = one.copy(), zero.copy(), zero.copy(), one.copy()
    e = np.zeros(E.shape, dtype=np.int64)
    EV = E - word.V
    growth = max(float(np.max(np.abs(E), initial=1.0)),
                 float(np.max(np.abs(EV), initial=1.0))) + 2.0
    stride = max(4, int(560.0 / math.log2(growth)))
    for i, v in enumerate(word.word):
        a = EV if v else E
        m11, m12, m21, m22 = a * m11 - m21, a * m12 - m22, m11, m12
        if (i + 1) % stride == 0:
            (m11, m12, m21, m22), e = _renorm((m11, m12, m21, m22), e)
    M, e = _renorm((m11, m12, m21, m22), e)
    return _trace_value(M, e)


def chain_discriminant_grid(quotients: Sequence[int], V: float, E) -> np.ndarray:
    """Discriminant of the level-k approximant along a convergent chain.

    quotients = (a_1, ..., a_k); an empty chain is the free level p/q = 0/1.
    Uses the standard-word recursion s_1 = s_-1 s_0^(a_1 - 1),
    s_{j+1} = s_{j-1} s_j^(a_{j+1}) (in transfer-product order), which costs
    O(sum log a_j) matrix multiplications independent of q_k.  The resulting
    word is a cyclic rotation of the canonical one, so traces agree.
    """
    E = np.asarray(E, dtype=float)
    one = np.ones_like(E)
    zero = np.zeros_like(E)
    ez = np.zeros(E.shape, dtype=np.int64)
    T0 = (E.copy(), -one, one.copy(), zero)
    if not quotients:
        return _trace_value(T0, ez)
    TV = (E - V, -one.copy(), one.copy(), np.zeros_like(E))
    Pw, ep = _pow(T0, ez, quotients[0] - 1)
    M, em = _mul(TV, ez, Pw, ep)
    Mp, emp = T0, ez
    for a in quotients[1:]:
        Pw, ep = _pow(M, em, a)
        Mn, en = _mul(Mp, emp, Pw, ep)
        Mp, emp, M, em = M, em, Mn, en
    return _trace_value(M, em)


def discriminant_mp(word: PotentialWord | None, E, *, quotients: Sequence[int] | None = None,
                    V: float | None = None, prec: int = 113):
    """Discriminant at one energy in mpmath arithmetic (no renormalisation
    needed; mpf exponents are unbounded).  Either a word or a chain."""
    with mpmath.workprec(prec):
        E = mpmath.mpf(E)
        if quotients is not None:
            if V is None:
                raise ValueError("chain evaluation needs V")
            Vm = mpmath.mpf(V)
            T0 = mpmath.matrix([[E, -1], [1, 0]])
            if not quotients:
                return T0[0, 0] + T0[1, 1]
            TV = mpmath.matrix([[E - Vm, -1], [1, 0]])
            M = TV * T0 ** (quotients[0] - 1)
            Mp = T0
            for a in quotients[1:]:
                Mp, M = M, Mp * M ** a
            return M[0, 0] + M[1, 1]
        assert word is not None
        Vm = mpmath.mpf(word.V)
        m11, m12, m21, m22 = mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1)
        for v in word.word:
            a = E - Vm * v
            m11, m12, m21, m22 = a * m11 - m21, a * m12 - m22, m11, m12
        return m11 + m22


def discriminant_deriv_mp(word: PotentialWord, E, prec: int = 113):
    """(D, dD/dE) at one energy in mpmath, derivative by the product rule."""
    with mpmath.workprec(prec):
        E = mpmath.mpf(E)
        Vm = mpmath.mpf(word.V)
        zero, one = mpmath.mpf(0), mpmath.mpf(1)
        m11, m12, m21, m22 = one, zero, zero, one
        d11, d12, d21, d22 = zero, zero, zero, zero
        for v in word.word:
            a = E - Vm * v
            # M <- T M, dM <- T' M + T dM with T' = [[1, 0], [0, 0]]
            d11, d12, d21, d22 = m11 + a * d11 - d21, m12 + a * d12 - d22, d11, d12
            m11, m12, m21, m22 = a * m11 - m21, a * m12 - m22, m11, m12
        return m11 + m22, d11 + d22


# -- matrix views -------------------------------------------------------------

def periodic_matrices(word: PotentialWord) -> tuple[np.ndarray, np.ndarray]:
    """The period-q matrices with periodic (+1) and antiperiodic (-1) corners.

    Their merged eigenvalues are exactly the solutions of D(E) = +-2.  For
    q = 1 the two couplings to the single site merge onto the diagonal; for
    q = 2 they merge onto the off-diagonal (2 and 0 respectively).
    """
    q = word.q
    d = word.diagonal
    if q == 1:
        return np.array([[d[0] + 2.0]]), np.array([[d[0] - 2.0]])
    if q == 2:
        per = np.array([[d[0], 2.0], [2.0, d[1]]])
        anti = np.array([[d[0], 0.0], [0.0, d[1]]])
        return per, anti
    base = np.diag(d) + np.diag(np.ones(q - 1), 1) + np.diag(np.ones(q - 1), -1)
    per = base.copy()
    anti = base.copy()
    per[0, -1] = per[-1, 0] = 1.0
    anti[0, -1] = anti[-1, 0] = -1.0
    return per, anti


def dirichlet_eig_count(word: PotentialWord, n: int, E: float) -> int:
    """Number of eigenvalues <= E of the n-site Dirichlet restriction.

    Sturm sign count over the LDL pivots, O(n) and exact away from
    eigenvalues; at an eigenvalue the count may be off by the multiplicity.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    V = word.V
    w = word.word
    q = word.q
    pivmin = 1e-290
    count = 0
    t = None
    for i in range(n):
        g = V * w[i % q] - E
        t = g if t is None else g - 1.0 / t
        if t <= 0.0:
            count += 1
            if -pivmin < t:
                t = -pivmin
        elif t < pivmin:
            t = pivmin
    return count
