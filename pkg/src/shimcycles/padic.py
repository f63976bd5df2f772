"""Exact p-adic arithmetic primitives.

Valuations, square classes, Hilbert symbols, Hasse invariants of binary
quadratic forms, and GL2(Z_p)-reduction of half-integral symmetric 2x2
matrices to elementary divisor form.  Everything here is exact rational
arithmetic; there is no floating point in this module.

Conventions:
  * a "place" is either a prime integer or the string "inf" (use OO below);
  * rationals are ``fractions.Fraction`` (ints accepted everywhere);
  * unit square classes are canonicalized as {1, smallest positive
    non-residue} for odd p and as {1, 3, 5, 7} for p = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

OO = "inf"  # the archimedean place

Rat = Union[int, Fraction]


class SingularMatrix(ValueError):
    """The symmetric matrix is singular where an invertible one is required."""


class Unsupported2AdicType(ValueError):
    """No diagonal GL2(Z_2)-reduction exists (even 2-adic type)."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _check_finite_prime(p) -> int:
    if p == OO:
        raise ValueError("expected a finite prime, got the archimedean place")
    p = int(p)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return p


def valuation(x: Rat, p) -> Union[int, float]:
    """p-adic valuation of a rational; +inf for x = 0."""
    p = _check_finite_prime(p)
    x = Fraction(x)
    if x == 0:
        return math.inf
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def unit_part(x: Rat, p) -> Fraction:
    """x / p^{v_p(x)}; the p-adic unit factor of a nonzero rational."""
    p = _check_finite_prime(p)
    x = Fraction(x)
    if x == 0:
        raise ValueError("unit part of 0 is undefined")
    v = valuation(x, p)
    return x / Fraction(p) ** v


def _unit_mod(u: Fraction, p: int, modulus: int) -> int:
    """Residue of a p-adic unit modulo `modulus` (a power of p)."""
    num = u.numerator % modulus
    den = u.denominator % modulus
    return (num * pow(den, -1, modulus)) % modulus


def legendre_symbol(a: Rat, p: int) -> int:
    """Legendre symbol (a|p) of a p-adic unit a, for odd prime p."""
    p = _check_finite_prime(p)
    if p == 2:
        raise ValueError("Legendre symbol needs an odd prime")
    r = _unit_mod(unit_part(a, p) if valuation(a, p) != 0 else Fraction(a), p, p)
    if r % p == 0:
        raise ValueError("argument is not a p-adic unit")
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


def smallest_nonresidue(p: int) -> int:
    """Smallest positive quadratic non-residue mod an odd prime p."""
    for r in range(2, p):
        if pow(r, (p - 1) // 2, p) == p - 1:
            return r
    raise ValueError(f"no non-residue found for p={p}")


def unit_square_class(u: Rat, p) -> int:
    """Canonical representative of the square class of a p-adic unit.

    Odd p: 1 or the smallest positive non-residue.  p = 2: u mod 8.
    """
    p = _check_finite_prime(p)
    u = Fraction(u)
    if valuation(u, p) != 0:
        raise ValueError("not a p-adic unit")
    if p == 2:
        return _unit_mod(u, 2, 8)
    return 1 if legendre_symbol(u, p) == 1 else smallest_nonresidue(p)


def hilbert_symbol(a: Rat, b: Rat, p) -> int:
    """Local Hilbert symbol (a,b)_p for a place p (finite prime or OO)."""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol arguments must be nonzero")
    if p == OO:
        return -1 if (a < 0 and b < 0) else 1
    p = _check_finite_prime(p)
    alpha, beta = valuation(a, p), valuation(b, p)
    u, v = unit_part(a, p), unit_part(b, p)
    if p == 2:
        um, vm = _unit_mod(u, 2, 8), _unit_mod(v, 2, 8)
        eps_u, eps_v = ((um - 1) // 2) % 2, ((vm - 1) // 2) % 2
        om_u, om_v = ((um * um - 1) // 8) % 2, ((vm * vm - 1) // 8) % 2
        e = eps_u * eps_v + alpha * om_v + beta * om_u
        return -1 if e % 2 else 1
    e = alpha * beta * (((p - 1) // 2) % 2)
    s = (-1) ** (e % 2)
    if beta % 2:
        s *= legendre_symbol(u, p)
    if alpha % 2:
        s *= legendre_symbol(v, p)
    return s


def hilbert_symbol_bruteforce(a: Rat, b: Rat, p, depth: int | None = None) -> int:
    """Test oracle: solvability of a x^2 + b y^2 = z^2 by a mod-p^k search.

    Clears denominators and even p-powers (both leave the symbol unchanged),
    then looks for a primitive solution of a x^2 + b y^2 = z^2 over Z/p^k
    with k = 2 v_p(4ab) + 3, which is deep enough for solvability to have
    stabilized (Hensel).  A primitive triple has a unit coordinate, and the
    equation is homogeneous, so it suffices to search triples in which some
    coordinate equals 1; that gives three single-loop sweeps instead of a
    cubic search.
    """
    if p == OO:
        return -1 if (Fraction(a) < 0 and Fraction(b) < 0) else 1
    import numpy as np

    p = _check_finite_prime(p)
    a, b = Fraction(a), Fraction(b)
    # scale by squares into integers
    ai = a.numerator * a.denominator
    bi = b.numerator * b.denominator
    # remove even powers of p to keep the modulus small
    ai = int(ai // p ** (2 * (valuation(ai, p) // 2)))
    bi = int(bi // p ** (2 * (valuation(bi, p) // 2)))
    if depth is None:
        depth = 2 * int(valuation(4 * ai * bi, p)) + 3
    mod = p**depth
    am, bm = ai % mod, bi % mod
    t = np.arange(mod, dtype=np.int64)
    sq = (t * t) % mod
    asq = (am * sq) % mod
    bsq = (bm * sq) % mod
    is_sq = np.zeros(mod, dtype=bool)
    is_sq[sq] = True
    is_bsq = np.zeros(mod, dtype=bool)
    is_bsq[bsq] = True
    # x = 1:  a + b y^2 = z^2;  y = 1:  a x^2 + b = z^2;  z = 1: 1 - a x^2 = b y^2
    if is_sq[(am + bsq) % mod].any():
        return 1
    if is_sq[(asq + bm) % mod].any():
        return 1
    if is_bsq[(1 - asq) % mod].any():
        return 1
    return -1


def _as_sym2(T) -> tuple[Fraction, Fraction, Fraction]:
    """Accept [[a,b],[b,d]] or (a, b, d); return (a, b, d) as Fractions."""
    if len(T) == 2:
        (a, b1), (b2, d) = T
        if Fraction(b1) != Fraction(b2):
            raise ValueError("matrix is not symmetric")
        b = b1
    else:
        a, b, d = T
    return Fraction(a), Fraction(b), Fraction(d)


def det_sym2(T) -> Fraction:
    a, b, d = _as_sym2(T)
    return a * d - b * b


def diagonalize_over_Qp(T, p) -> tuple[Fraction, Fraction]:
    """A Q_p-congruent diagonal form (d1, d2) of a symmetric 2x2 matrix.

    The congruence used is actually over Q, hence valid at every place:
    pivot on a nonzero diagonal entry, or base-change by [[1,1],[1,-1]]
    when the diagonal vanishes.
    """
    a, b, d = _as_sym2(T)
    det = a * d - b * b
    if det == 0:
        raise SingularMatrix("determinant is zero")
    if a != 0:
        return a, det / a
    if d != 0:
        return d, det / d
    # antidiagonal: T[(1,1)] = 2b, T[(1,-1)] = -2b
    return 2 * b, det / (2 * b)


def hasse_invariant(T, p) -> int:
    """Hasse invariant (d1, d2)_p of a Q_p-diagonalization of T."""
    d1, d2 = diagonalize_over_Qp(T, p)
    return hilbert_symbol(d1, d2, p)


@dataclass(frozen=True)
class ElementaryDivisorForm:
    """GL2(Z_p)-reduction T ~ diag(eps1 * p^a1, eps2 * p^a2), a1 <= a2.

    Units are canonical square-class representatives: {1, non-residue}
    for odd p, {1,3,5,7} for p = 2.
    """

    p: int
    a1: int
    a2: int
    eps1: int
    eps2: int

    def hasse(self) -> int:
        return hilbert_symbol(
            Fraction(self.eps1) * Fraction(self.p) ** self.a1,
            Fraction(self.eps2) * Fraction(self.p) ** self.a2,
            self.p,
        )


def in_dual_sym2(T, p) -> bool:
    """T in Sym_2(Z_p)^vee: integral diagonal, off-diagonal in (1/2)Z_p."""
    a, b, d = _as_sym2(T)
    ok = True
    if a:
        ok = ok and valuation(a, p) >= 0
    if d:
        ok = ok and valuation(d, p) >= 0
    if b:
        ok = ok and valuation(2 * b, p) >= 0
    return ok


def elementary_divisors(T, p) -> ElementaryDivisorForm:
    """Elementary divisor form of a half-integral T over Z_p.

    Works constructively: pivots on a diagonal entry of minimal valuation
    (probing (1,1) and (1,-1) as well, which settles every odd-p case).
    For p = 2 a form whose minimal valuation sits only on the off-diagonal
    entry has even type and no diagonal reduction; Unsupported2AdicType is
    raised there.
    """
    p = _check_finite_prime(p)
    a, b, d = _as_sym2(T)
    if a * d - b * b == 0:
        raise SingularMatrix("determinant is zero")
    if not in_dual_sym2(T, p):
        raise ValueError("matrix is not half-integral at p")
    det = a * d - b * b

    def val(x):
        return valuation(x, p)

    candidates = [(val(a), a), (val(d), d)]
    if p != 2:
        # odd p: the value at (1,1) attains the minimum when the
        # off-diagonal valuation is strictly smaller than the diagonal ones
        candidates += [(val(a + 2 * b + d), a + 2 * b + d), (val(a - 2 * b + d), a - 2 * b + d)]
    candidates = [(v, x) for v, x in candidates if x != 0]
    if not candidates:
        raise Unsupported2AdicType(
            "zero diagonal over Z_2; no Z_2-diagonalization"
        )
    vmin, pivot = min(candidates, key=lambda t: t[0])
    if b != 0 and val(b) < vmin:
        if p == 2:
            raise Unsupported2AdicType(
                "minimal valuation only on the off-diagonal entry; no Z_2-diagonalization"
            )
        raise AssertionError("odd-p pivot search failed")  # pragma: no cover
    g1 = pivot
    g2 = det / g1
    v1, v2 = val(g1), val(g2)
    if v1 > v2:
        g1, g2 = g2, g1
        v1, v2 = v2, v1
    if p == 2 and (v1 < 0 or v2 < 0):  # pragma: no cover
        raise Unsupported2AdicType("reduction left a non-integral diagonal")
    return ElementaryDivisorForm(
        p=p,
        a1=int(v1),
        a2=int(v2),
        eps1=unit_square_class(unit_part(g1, p), p),
        eps2=unit_square_class(unit_part(g2, p), p),
    )


def rational_str(x: Rat) -> str:
    """Serialize a rational as "num/den" (or "num" for integers)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def prime_factors(n: int) -> list[int]:
    """Sorted prime factors of |n| (n nonzero)."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("0 has no prime factorization")
    out = []
    for p in range(2, n + 1):
        if p * p > n:
            break
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
    if n > 1:
        out.append(n)
    return out
