"""Exact symbolic Hecke algebra computations.

Coefficients live in the four-dimensional Q-algebra Q(i)[sqrt(p)] for a
fixed prime p (half-integral weights force half-integer powers of p, and
the quartic character constant is 1 or i).  Weyl-invariant Laurent
polynomials in one or two variables carry the local Hecke algebras; the
variable-specialization map x2 -> p^{1/2} realizes the descent from the
genus-two metaplectic side to the orthogonal side on invariants.

The published closed forms for the three genus <= 2 generators are taken
as the module's axioms; everything downstream (specialization images,
rewriting in the orthogonal generator, the commutation checks against
the degree-lowering operator) is computed, not transcribed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product


class UnknownTag(ValueError):
    pass


class NotInvariant(ValueError):
    pass


class NotInSpan(ValueError):
    pass


@dataclass(frozen=True)
class Coeff:
    """a + b i + c sqrt(p) + d i sqrt(p) with rational a, b, c, d."""

    p: int
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    c: Fraction = Fraction(0)
    d: Fraction = Fraction(0)

    @staticmethod
    def of(p: int, x) -> "Coeff":
        if isinstance(x, Coeff):
            if x.p != p:
                raise ValueError("mixed primes")
            return x
        return Coeff(p, Fraction(x))

    @staticmethod
    def _scalar(x) -> bool:
        return isinstance(x, (Coeff, int, Fraction))

    @staticmethod
    def i(p: int) -> "Coeff":
        return Coeff(p, b=Fraction(1))

    @staticmethod
    def sqrt_p(p: int) -> "Coeff":
        return Coeff(p, c=Fraction(1))

    def __add__(self, o):
        if not Coeff._scalar(o):
            return NotImplemented
        o = Coeff.of(self.p, o)
        return Coeff(self.p, self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    __radd__ = __add__

    def __neg__(self):
        return Coeff(self.p, -self.a, -self.b, -self.c, -self.d)

    def __sub__(self, o):
        return self + (-Coeff.of(self.p, o))

    def __mul__(self, o):
        if not Coeff._scalar(o):
            return NotImplemented
        o = Coeff.of(self.p, o)
        p = Fraction(self.p)
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = o.a, o.b, o.c, o.d
        return Coeff(
            self.p,
            a1 * a2 - b1 * b2 + p * (c1 * c2 - d1 * d2),
            a1 * b2 + b1 * a2 + p * (c1 * d2 + d1 * c2),
            a1 * c2 + c1 * a2 - b1 * d2 - d1 * b2,
            a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
        )

    __rmul__ = __mul__

    def inverse(self) -> "Coeff":
        # invert via the two quadratic conjugations (i -> -i, sqrt p -> -sqrt p)
        conj_i = Coeff(self.p, self.a, -self.b, self.c, -self.d)
        conj_s = Coeff(self.p, self.a, self.b, -self.c, -self.d)
        conj_b = Coeff(self.p, self.a, -self.b, -self.c, self.d)
        norm = self * conj_i * conj_s * conj_b
        assert norm.b == 0 and norm.c == 0 and norm.d == 0
        if norm.a == 0:
            raise ZeroDivisionError("coefficient is not invertible")
        return (conj_i * conj_s * conj_b) * Coeff(self.p, 1 / norm.a)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0 and self.d == 0

    def __str__(self):
        parts = []
        for val, sym in ((self.a, ""), (self.b, "i"), (self.c, "sqrt(p)"), (self.d, "i*sqrt(p)")):
            if val != 0:
                s = str(val)
                parts.append(f"{s}{'*' if sym else ''}{sym}")
        return " + ".join(parts) if parts else "0"


def sqrtp_power(p: int, k: int) -> Coeff:
    """p^{k/2} as a ring element (k any integer)."""
    half = Coeff.sqrt_p(p) if k % 2 else Coeff.of(p, 1)
    q = Fraction(p) ** (k // 2)
    return half * Coeff.of(p, q)


def _weyl_group(r: int):
    for perm in permutations(range(r)):
        for signs in product((1, -1), repeat=r):
            yield perm, signs


class LaurentInvariant:
    """Weyl-invariant Laurent polynomial over Coeff, in r in {1,2} variables."""

    def __init__(self, p: int, r: int, terms: dict, check: bool = True):
        self.p = p
        self.r = r
        self.terms = {
            tuple(e): Coeff.of(p, c) for e, c in terms.items() if not Coeff.of(p, c).is_zero()
        }
        if check and not self._invariant():
            raise NotInvariant("polynomial is not Weyl-invariant")

    def _invariant(self) -> bool:
        for perm, signs in _weyl_group(self.r):
            for e, c in self.terms.items():
                e2 = tuple(e[perm[i]] * signs[i] for i in range(self.r))
                c2 = self.terms.get(e2)
                if c2 is None or (c2 - c).is_zero() is False:
                    if c2 is None or not (c2 - c).is_zero():
                        return False
        return True

    def __add__(self, o):
        if isinstance(o, LaurentInvariant):
            if (o.p, o.r) != (self.p, self.r):
                raise ValueError("incompatible rings")
            out = dict(self.terms)
            for e, c in o.terms.items():
                out[e] = out.get(e, Coeff.of(self.p, 0)) + c
            return LaurentInvariant(self.p, self.r, out, check=False)
        return self + LaurentInvariant(self.p, self.r, {(0,) * self.r: o}, check=False)

    __radd__ = __add__

    def __neg__(self):
        return LaurentInvariant(
            self.p, self.r, {e: -c for e, c in self.terms.items()}, check=False
        )

    def __sub__(self, o):
        return self + (-(o if isinstance(o, LaurentInvariant) else LaurentInvariant(
            self.p, self.r, {(0,) * self.r: o}, check=False)))

    def __mul__(self, o):
        if isinstance(o, LaurentInvariant):
            if (o.p, o.r) != (self.p, self.r):
                raise ValueError("incompatible rings")
            out: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in o.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    out[e] = out.get(e, Coeff.of(self.p, 0)) + c1 * c2
            return LaurentInvariant(self.p, self.r, out, check=False)
        return LaurentInvariant(
            self.p, self.r,
            {e: c * Coeff.of(self.p, o) for e, c in self.terms.items()},
            check=False,
        )

    __rmul__ = __mul__

    def __eq__(self, o):
        return (
            isinstance(o, LaurentInvariant)
            and self.p == o.p
            and self.r == o.r
            and all((self.terms.get(e, Coeff.of(self.p, 0)) - c).is_zero()
                    for e, c in o.terms.items())
            and all((o.terms.get(e, Coeff.of(self.p, 0)) - c).is_zero()
                    for e, c in self.terms.items())
        )

    def assert_invariant(self) -> "LaurentInvariant":
        if not self._invariant():
            raise NotInvariant("polynomial is not Weyl-invariant")
        return self

    def __str__(self):
        if not self.terms:
            return "0"
        keys = sorted(self.terms, reverse=True)
        names = ["x1", "x2"]
        parts = []
        for e in keys:
            mono = "*".join(
                f"{names[i]}^{k}" if k != 1 else names[i]
                for i, k in enumerate(e)
                if k != 0
            )
            c = str(self.terms[e])
            cs = c if "+" not in c else f"({c})"
            parts.append(f"({cs})*{mono}" if mono else cs)
        return " + ".join(parts)


def epsilon_p(p: int):
    """The quartic constant: 1 for p = 1 mod 4, i for p = 3 mod 4."""
    return Coeff.of(p, 1) if p % 4 == 1 else Coeff.i(p)


def satake_symplectic(tag: str, p: int, eps=None) -> LaurentInvariant:
    """Closed-form Satake image of a metaplectic generator (m = 3).

    Tags: "T1_0" (genus 1), "T2_0", "T2_1" (genus 2).
    """
    if eps is None:
        eps = epsilon_p(p)
    eps = Coeff.of(p, eps) if not isinstance(eps, Coeff) else eps
    one = Coeff.of(p, 1)
    if tag == "T1_0":
        return LaurentInvariant(p, 1, {(1,): one * p, (-1,): one * p})
    if tag == "T2_1":
        c = one * p * p
        return LaurentInvariant(
            p, 2, {(1, 0): c, (-1, 0): c, (0, 1): c, (0, -1): c}
        )
    if tag == "T2_0":
        eps_inv_cubed = eps.inverse() * eps.inverse() * eps.inverse()
        assert eps_inv_cubed == eps or (eps_inv_cubed - eps).is_zero()
        c3 = one * p**3
        const = Coeff.of(p, p * p * (p - 1)) + Coeff.of(p, p * (p - 1)) * eps_inv_cubed
        return LaurentInvariant(
            p,
            2,
            {
                (1, 1): c3,
                (1, -1): c3,
                (-1, 1): c3,
                (-1, -1): c3,
                (0, 0): const,
            },
        )
    raise UnknownTag(f"unknown metaplectic tag {tag!r}")


def satake_orthogonal(p: int) -> LaurentInvariant:
    """sqrt(p) (x1 + x1^{-1}), the orthogonal generator's Satake image."""
    s = Coeff.sqrt_p(p)
    return LaurentInvariant(p, 1, {(1,): s, (-1,): s})


def rz_map(poly: LaurentInvariant, p: int | None = None) -> LaurentInvariant:
    """Specialize x2 -> p^{1/2} (the m = 3, nu = 1 descent on invariants)."""
    if poly.r != 2:
        raise ValueError("descent map expects a two-variable invariant")
    p = poly.p if p is None else p
    out: dict = {}
    for (e1, e2), c in poly.terms.items():
        val = c * sqrtp_power(p, e2)
        out[(e1,)] = out.get((e1,), Coeff.of(p, 0)) + val
    res = LaurentInvariant(p, 1, out, check=False)
    return res.assert_invariant()


def express_in_orth_basis(poly: LaurentInvariant) -> dict[int, Coeff]:
    """Coefficients of poly as a polynomial in the orthogonal generator.

    poly must be a W_1-invariant Laurent polynomial; writing it in powers
    of y = x1 + x1^{-1} and substituting y = generator / sqrt(p) yields
    the dictionary {power of the generator: coefficient}.
    """
    if poly.r != 1:
        raise ValueError("expected a one-variable invariant")
    poly.assert_invariant()
    p = poly.p
    work = dict(poly.terms)
    y = LaurentInvariant(p, 1, {(1,): Coeff.of(p, 1), (-1,): Coeff.of(p, 1)})
    out: dict[int, Coeff] = {}
    while work:
        deg = max(e[0] for e in work)
        if deg < 0 or any(e[0] < -deg for e in work):  # pragma: no cover
            raise NotInSpan("reduction failed")
        c = work[(deg,)]
        if deg == 0:
            out[0] = out.get(0, Coeff.of(p, 0)) + c
            work.pop((0,), None)
            work = {e: v for e, v in work.items() if not v.is_zero()}
            if work:
                raise NotInSpan("constant reduction left residue")
            break
        ypow = LaurentInvariant(p, 1, {(0,): Coeff.of(p, 1)}, check=False)
        for _ in range(deg):
            ypow = ypow * y
        out[deg] = out.get(deg, Coeff.of(p, 0)) + c * sqrtp_power(p, -deg)
        sub = {e: v * c for e, v in ypow.terms.items()}
        for e, v in sub.items():
            work[e] = work.get(e, Coeff.of(p, 0)) - v
        work = {e: v for e, v in work.items() if not v.is_zero()}
    return out


def orth_basis_string(coeffs: dict[int, Coeff]) -> str:
    parts = []
    for k in sorted(coeffs, reverse=True):
        c = str(coeffs[k])
        cs = c if "+" not in c else f"({c})"
        if k == 0:
            parts.append(cs)
        elif k == 1:
            parts.append(f"({cs})*Tp")
        else:
            parts.append(f"({cs})*Tp^{k}")
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# commutation checks


class FormalTp:
    """Polynomials in a formal commuting Hecke symbol over Coeff."""

    def __init__(self, p: int, coeffs: dict[int, Coeff]):
        self.p = p
        self.coeffs = {k: v for k, v in coeffs.items() if not v.is_zero()}

    @staticmethod
    def tp(p: int) -> "FormalTp":
        return FormalTp(p, {1: Coeff.of(p, 1)})

    @staticmethod
    def const(p: int, c) -> "FormalTp":
        return FormalTp(p, {0: Coeff.of(p, c)})

    def __add__(self, o):
        out = dict(self.coeffs)
        for k, v in o.coeffs.items():
            out[k] = out.get(k, Coeff.of(self.p, 0)) + v
        return FormalTp(self.p, out)

    def __mul__(self, o):
        if isinstance(o, FormalTp):
            out: dict = {}
            for k1, v1 in self.coeffs.items():
                for k2, v2 in o.coeffs.items():
                    out[k1 + k2] = out.get(k1 + k2, Coeff.of(self.p, 0)) + v1 * v2
            return FormalTp(self.p, out)
        return FormalTp(self.p, {k: v * Coeff.of(self.p, o) for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, o):
        keys = set(self.coeffs) | set(o.coeffs)
        return all(
            (self.coeffs.get(k, Coeff.of(self.p, 0)) - o.coeffs.get(k, Coeff.of(self.p, 0))).is_zero()
            for k in keys
        )

    def __str__(self):
        return orth_basis_string(self.coeffs)


def hecke_action_coeffs(tag: str, p: int, eps=None) -> FormalTp:
    """The polynomial in T_p through which a metaplectic generator acts.

    Computed from the Satake images: descend to one variable, rewrite in
    the orthogonal generator, then replace the generator by p T_p.
    """
    if eps is None:
        eps = epsilon_p(p)
    img = satake_symplectic(tag, p, eps)
    if tag == "T1_0":
        one_var = img
    else:
        one_var = rz_map(img)
    coeffs = express_in_orth_basis(one_var)
    out = FormalTp(p, {0: Coeff.of(p, 0)})
    for k, c in coeffs.items():
        out = out + FormalTp(p, {k: c * Coeff.of(p, Fraction(p) ** k)})
    return out


def verify_hecke_phi(p: int, eps=None) -> dict:
    """Check the two degree-lowering commutation identities exactly.

    Both sides are written as polynomials in the formal T_p, with the
    genus-one generator acting as p^{3/2} T_p.
    """
    if eps is None:
        eps = epsilon_p(p)
    eps = eps if isinstance(eps, Coeff) else Coeff.of(p, eps)
    t20 = hecke_action_coeffs("T2_0", p, eps)
    t21 = hecke_action_coeffs("T2_1", p, eps)
    t10 = hecke_action_coeffs("T1_0", p, eps)
    # line 1: Phi(T20 F) = p^{3/2}(p+1) T10 Phi(F) + p(p-1)(p+eps) Phi(F)
    lhs1 = t20
    rhs1 = sqrtp_power(p, 3) * (p + 1) * t10 + FormalTp(
        p, {0: Coeff.of(p, p * (p - 1)) * (Coeff.of(p, p) + eps)}
    )
    # line 2: Phi(T21 F) = p T10 Phi(F) + p^{3/2}(p+1) Phi(F)
    lhs2 = t21
    rhs2 = p * t10 + FormalTp(p, {0: sqrtp_power(p, 3) * (p + 1)})
    return {
        "p": p,
        "eps": str(eps),
        "line1": lhs1 == rhs1,
        "line2": lhs2 == rhs2,
        "lhs1": str(lhs1),
        "rhs1": str(rhs1),
        "lhs2": str(lhs2),
        "rhs2": str(rhs2),
    }


def rz_t20_report(p: int, eps=None) -> dict:
    """Descent image of the genus-two degree-0 generator, with both
    published constants compared.

    The direct computation matches the constant (p-1)(p + eps) after the
    1/p normalization; the alternative published constant 2 p eps does
    not (except at p = 3) and is reported as a suspected typo rather than
    silently corrected.
    """
    if eps is None:
        eps = epsilon_p(p)
    eps = eps if isinstance(eps, Coeff) else Coeff.of(p, eps)
    computed = rz_map(satake_symplectic("T2_0", p, eps))
    st = satake_orthogonal(p)
    main = Coeff.of(p, p * p * (p + 1))
    expected_comm = main * st + LaurentInvariant(
        p, 1, {(0,): Coeff.of(p, p * p * (p - 1)) + Coeff.of(p, p * (p - 1)) * eps}
    )
    claimed_comm1 = main * st + LaurentInvariant(
        p, 1, {(0,): Coeff.of(p, p * p * (p - 1)) + Coeff.of(p, 2 * p) * eps}
    )
    return {
        "p": p,
        "eps": str(eps),
        "computed": str(computed),
        "matches_product_form": computed == expected_comm,
        "matches_alternative_constant": computed == claimed_comm1,
    }
