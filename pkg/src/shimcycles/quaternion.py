"""Quaternion algebras over Q, Eichler-order lattices, and theta series.

The counting pipeline only consumes *local* data: the lattice models below
at each prime, the discriminant-group sizes, and the curve volume.  Global
Eichler orders for a handful of discriminants ship as fixture data
(data/eichler_orders.txt) and feed the theta-series and vector-enumeration
code; they are verified (ring closure, reduced discriminant) on load.

A quaternion q = a + b i + c j + d k is a 4-tuple of rationals over the
structure constants (i^2, j^2); k = ij and ji = -ij.  Trace-zero vectors
x (a = 0) carry the quadratic form Q(x) = -nrd(x) of signature (2,1); the
bilinear form is (x, y) = trd(x y), so (x, x) = 2 Q(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Sequence

import numpy as np

from .padic import (
    OO,
    hilbert_symbol,
    prime_factors,
    smallest_nonresidue,
    valuation,
)


class DefiniteAlgebra(ValueError):
    """The structure constants give a definite quaternion algebra."""


class SplitAlgebra(ValueError):
    """The structure constants give the split algebra M_2(Q)."""


class MissingGlobalBasis(ValueError):
    """Operation requires a fixture order basis, none is available."""


class NotPrimitive(ValueError):
    pass


class InvalidDiscriminant(ValueError):
    pass


# ---------------------------------------------------------------------------
# quaternion element arithmetic (4-tuples of Fractions)


def quat_mul(x, y, ai: Fraction, aj: Fraction):
    """Product in the quaternion algebra (i^2 = ai, j^2 = aj, k = ij)."""
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return (
        a1 * a2 + ai * b1 * b2 + aj * c1 * c2 - ai * aj * d1 * d2,
        a1 * b2 + b1 * a2 - aj * c1 * d2 + aj * d1 * c2,
        a1 * c2 + c1 * a2 + ai * b1 * d2 - ai * d1 * b2,
        a1 * d2 + d1 * a2 + b1 * c2 - c1 * b2,
    )


def quat_trd(x) -> Fraction:
    return 2 * x[0]


def quat_nrd(x, ai: Fraction, aj: Fraction) -> Fraction:
    a, b, c, d = x
    return a * a - ai * b * b - aj * c * c + ai * aj * d * d


def quat_conj(x):
    a, b, c, d = x
    return (a, -b, -c, -d)


def _frac4(x):
    return tuple(Fraction(t) for t in x)


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def _det(m) -> Fraction:
    m = [list(row) for row in m]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            for cc in range(c, n):
                m[r][cc] -= f * m[c][cc]
    return det


def _solve(m, v):
    """Solve m x = v exactly over Q (m square nonsingular)."""
    n = len(m)
    aug = [list(m[r]) + [Fraction(v[r])] for r in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [t / pv for t in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [s - f * t for s, t in zip(aug[r], aug[c])]
    return [aug[r][n] for r in range(n)]


def _int_row_kernel(t: Sequence[int]) -> list[list[int]]:
    """Basis of { n in Z^m : sum n_i t_i = 0 } via unimodular column ops."""
    m = len(t)
    t = list(t)
    V = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    while sum(1 for x in t if x != 0) > 1:
        nz = sorted((abs(t[i]), i) for i in range(m) if t[i] != 0)
        _, j = nz[0]
        for _, i in nz[1:]:
            q = t[i] // t[j]
            t[i] -= q * t[j]
            for r in range(m):
                V[r][i] -= q * V[r][j]
    zero_cols = [i for i in range(m) if t[i] == 0]
    return [[V[r][c] for r in range(m)] for c in zero_cols]


def _hnf_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite form of an integer matrix; returns nonzero rows."""
    rows = [list(r) for r in rows]
    ncols = len(rows[0])
    basis = []
    col = 0
    while col < ncols and rows:
        rows.sort(key=lambda r: (r[col] == 0, abs(r[col]) if r[col] else 0))
        if rows[0][col] == 0:
            col += 1
            continue
        changed = False
        for r in rows[1:]:
            if r[col] != 0:
                q = r[col] // rows[0][col]
                for c in range(ncols):
                    r[c] -= q * rows[0][c]
                changed = True
        if not changed:
            piv = rows.pop(0)
            if piv[col] < 0:
                piv = [-x for x in piv]
            basis.append(piv)
            col += 1
    return basis


# ---------------------------------------------------------------------------
# algebras


def ramified_primes(a, b) -> list[int]:
    """Finite primes where the algebra (a, b / Q) is division.

    Raises DefiniteAlgebra if the algebra ramifies at infinity.
    """
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("structure constants must be nonzero")
    if hilbert_symbol(a, b, OO) == -1:
        raise DefiniteAlgebra("(a,b) is ramified at infinity")
    cands = {2}
    cands.update(prime_factors(a.numerator * a.denominator))
    cands.update(prime_factors(b.numerator * b.denominator))
    return sorted(p for p in cands if hilbert_symbol(a, b, p) == -1)


@dataclass(frozen=True)
class QuaternionAlgebra:
    """Indefinite rational quaternion algebra with i^2 = a, j^2 = b."""

    a: Fraction
    b: Fraction
    ramified: tuple[int, ...] = field(init=False)
    discriminant: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        ram = ramified_primes(self.a, self.b)
        if not ram:
            raise SplitAlgebra("algebra is M_2(Q); the Shimura curve is not compact")
        object.__setattr__(self, "ramified", tuple(ram))
        object.__setattr__(self, "discriminant", math.prod(ram))

    def mul(self, x, y):
        return quat_mul(_frac4(x), _frac4(y), self.a, self.b)

    def nrd(self, x) -> Fraction:
        return quat_nrd(_frac4(x), self.a, self.b)

    def trd(self, x) -> Fraction:
        return quat_trd(_frac4(x))

    def gram(self, basis) -> list[list[Fraction]]:
        """Bilinear Gram (x_i, x_j) = trd(x_i x_j) of trace-zero vectors."""
        return [[quat_trd(self.mul(x, y)) for y in basis] for x in basis]

    def trace_form_gram(self, basis) -> list[list[Fraction]]:
        """Gram trd(x conj(y)) of arbitrary elements (order discriminants)."""
        return [
            [quat_trd(self.mul(x, quat_conj(_frac4(y)))) for y in basis]
            for x in basis
        ]

    def reduced_discriminant(self, order_basis) -> Fraction:
        d = abs(_det(self.trace_form_gram(order_basis)))
        num, den = math.isqrt(d.numerator), math.isqrt(d.denominator)
        if Fraction(num, den) ** 2 != d:
            raise ValueError("trace-form determinant is not a perfect square")
        return Fraction(num, den)

    def is_order(self, basis) -> bool:
        """1 in the lattice, integral trd/nrd, and ring closure."""
        basis = [_frac4(x) for x in basis]
        mat = [[basis[c][r] for c in range(4)] for r in range(4)]
        if _det(mat) == 0:
            return False
        one = _solve(mat, [1, 0, 0, 0])
        if any(t.denominator != 1 for t in one):
            return False
        for x in basis:
            if quat_trd(x).denominator != 1 or self.nrd(x).denominator != 1:
                return False
            for y in basis:
                coords = _solve(mat, list(self.mul(x, y)))
                if any(t.denominator != 1 for t in coords):
                    return False
        return True

    def real_matrix(self, x) -> np.ndarray:
        """Image of x under the splitting B -> M_2(R) (requires b > 0)."""
        if self.b <= 0:
            raise ValueError("standard splitting needs j^2 > 0")
        a_, b_, c_, d_ = (float(t) for t in x)
        sb = math.sqrt(float(self.b))
        ai = float(self.a)
        return np.array(
            [
                [a_ + c_ * sb, b_ - d_ * sb],
                [ai * (b_ + d_ * sb), a_ - c_ * sb],
            ]
        )


# ---------------------------------------------------------------------------
# local lattice models (coordinate Gram matrices for the counting oracle)


def local_model_gram(D: int, M: int, p: int, lattice: str = "L") -> list[list[Fraction]]:
    """Exact 3x3 bilinear Gram of the local lattice model at p.

    ``lattice`` selects the Eichler trace-zero lattice ("LM") or its
    index-4 sublattice ("L"); they differ only at p = 2.
    """
    e = valuation(M, p) if M % p == 0 else 0
    F = Fraction
    if p % 2 == 1 and D % p != 0:
        s = F(p) ** e
        return [[F(2), 0, 0], [0, 0, s], [0, s, 0]]
    if p % 2 == 1 and D % p == 0:
        r = smallest_nonresidue(p)
        return [
            [F(2 * r), 0, 0],
            [0, F(2 * p), 0],
            [0, 0, F(-2 * r * p)],
        ]
    if p == 2 and D % 2 != 0:
        s = F(2) ** ((e + 2) if lattice == "L" else e)
        return [[F(2), 0, 0], [0, 0, s], [0, s, 0]]
    # p = 2 | D: quaternions with i^2 = j^2 = -1; Q(x) = -(b^2+c^2+d^2)
    if lattice == "L":
        # basis 2i-2k, 2j-2k, i+j+k
        return [
            [F(-16), F(-8), 0],
            [F(-8), F(-16), 0],
            [0, 0, F(-6)],
        ]
    return [[F(-2), 0, 0], [0, F(-2), 0], [0, 0, F(-2)]]


def dual_quotient_order(gram) -> Fraction:
    """|L^vee / L| = |det Gram| for the bilinear Gram of a lattice."""
    return abs(_det(gram))


# ---------------------------------------------------------------------------
# fixture Eichler orders


@dataclass(frozen=True)
class OrderFixture:
    D: int
    level: int
    a: Fraction
    b: Fraction
    basis: tuple
    unit: tuple | None


def _parse_frac(s: str) -> Fraction:
    return Fraction(s)


def load_order_fixtures() -> dict[tuple[int, int], OrderFixture]:
    out = {}
    text = resources.files("shimcycles").joinpath("data/eichler_orders.txt").read_text()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = dict(part.split("=", 1) for part in line.split(";"))
        D = int(fields["D"])
        M = int(fields["M"])
        a = _parse_frac(fields["a"])
        b = _parse_frac(fields["b"])
        basis = tuple(
            tuple(_parse_frac(t) for t in vec.split(","))
            for vec in fields["basis"].split("|")
        )
        unit = None
        if "unit" in fields:
            unit = tuple(_parse_frac(t) for t in fields["unit"].split(","))
        alg = QuaternionAlgebra(a, b)
        if alg.discriminant != D:
            raise ValueError(f"fixture (D={D},M={M}): algebra discriminant mismatch")
        if not alg.is_order(basis):
            raise ValueError(f"fixture (D={D},M={M}): basis is not an order")
        if alg.reduced_discriminant(basis) != D * M:
            raise ValueError(f"fixture (D={D},M={M}): reduced discriminant mismatch")
        checksum = int(fields["gram_det"])
        if _det(alg.trace_form_gram(basis)) != checksum:
            raise ValueError(f"fixture (D={D},M={M}): Gram checksum mismatch")
        if unit is not None and alg.nrd(unit) != 1:
            raise ValueError(f"fixture (D={D},M={M}): stored unit is not norm one")
        out[(D, M)] = OrderFixture(D, M, a, b, basis, unit)
    return out


# ---------------------------------------------------------------------------
# Shimura context


@dataclass
class ShimuraContext:
    """Quaternion discriminant, Eichler level, and derived lattice data."""

    D: int
    level: int = 1
    fixture: OrderFixture | None = None

    def __post_init__(self):
        primes = prime_factors(self.D)
        if math.prod(primes) != self.D or len(primes) % 2 != 0:
            raise ValueError(
                "discriminant must be squarefree with an even number of prime factors"
            )
        if math.gcd(self.D, self.level) != 1:
            raise ValueError("level must be coprime to the discriminant")
        if self.fixture is None:
            try:
                self.fixture = load_order_fixtures().get((self.D, self.level))
            except FileNotFoundError:  # pragma: no cover
                self.fixture = None

    # -- local data -------------------------------------------------------
    def local_gram(self, p: int, lattice: str = "L"):
        return local_model_gram(self.D, self.level, p, lattice)

    def discriminant_group_order(self, p: int) -> int:
        """|L_{M,p}^vee / L_{M,p}| for the Eichler trace-zero lattice."""
        if p == 2:
            return 2 ** (1 + 2 * (1 - self.D % 2) + 2 * valuation(self.level, 2))
        if self.D * self.level % p == 0:
            return p ** (2 * int(valuation(self.D * self.level, p)))
        return 1

    def volume_pi_coefficient(self) -> Fraction:
        """vol(X) as a rational multiple of pi."""
        v = Fraction(self.D, 3) * self.level
        for p in prime_factors(self.D):
            v *= Fraction(p - 1, p)
        if self.level > 1:
            for p in prime_factors(self.level):
                v *= Fraction(p + 1, p)
        return v

    # -- global data -------------------------------------------------------
    def _require_fixture(self) -> OrderFixture:
        if self.fixture is None:
            raise MissingGlobalBasis(
                f"no fixture order stored for (D, level) = ({self.D}, {self.level})"
            )
        return self.fixture

    @property
    def algebra(self) -> QuaternionAlgebra:
        fx = self._require_fixture()
        return QuaternionAlgebra(fx.a, fx.b)

    def trace_zero_basis(self, lattice: str = "LM") -> list[tuple]:
        """Quaternion basis of the trace-zero lattice L_M, or of L."""
        fx = self._require_fixture()
        alg = self.algebra
        ob = [_frac4(x) for x in fx.basis]
        traces = [quat_trd(x) for x in ob]
        den = 1
        for t in traces:
            den = den * t.denominator // math.gcd(den, t.denominator)
        tint = [int(t * den) for t in traces]
        kernel = _int_row_kernel(tint)
        lm = []
        for coeffs in kernel:
            v = (Fraction(0),) * 4
            for n, x in zip(coeffs, ob):
                v = tuple(a + n * b for a, b in zip(v, x))
            lm.append(v)
        assert len(lm) == 3
        if lattice == "LM":
            return lm
        if lattice != "L":
            raise ValueError("lattice must be 'LM' or 'L'")
        # L = 2 L_M + Z*lam with (1+lam)/2 in the order, lam primitive mod 2
        mat = [[fx.basis[c][r] for c in range(4)] for r in range(4)]
        chosen = None
        for mask in range(1, 8):
            lam = (Fraction(0),) * 4
            for bit in range(3):
                if mask >> bit & 1:
                    lam = tuple(a + b for a, b in zip(lam, lm[bit]))
            half = tuple((Fraction(1 if i == 0 else 0) + lam[i]) / 2 for i in range(4))
            coords = _solve(mat, list(half))
            if all(t.denominator == 1 for t in coords):
                chosen = mask
                break
        if chosen is None:
            raise ValueError("no odd-discriminant coset found; fixture is defective")
        rows = [[2, 0, 0], [0, 2, 0], [0, 0, 2],
                [chosen & 1, (chosen >> 1) & 1, (chosen >> 2) & 1]]
        hnf = _hnf_rows(rows)
        out = []
        for coeffs in hnf:
            v = (Fraction(0),) * 4
            for n, x in zip(coeffs, lm):
                v = tuple(a + n * b for a, b in zip(v, x))
            out.append(v)
        return out

    def gram(self, lattice: str = "LM") -> list[list[Fraction]]:
        alg = self.algebra
        return alg.gram(self.trace_zero_basis(lattice))


# ---------------------------------------------------------------------------
# vectors of the trace-zero lattice


@dataclass(frozen=True)
class TraceZeroVector:
    """Element of V given by coordinates in a stored lattice basis."""

    ctx: ShimuraContext
    coords: tuple[int, int, int]
    lattice: str = "L"

    def quaternion(self):
        basis = self.ctx.trace_zero_basis(self.lattice)
        v = (Fraction(0),) * 4
        for n, x in zip(self.coords, basis):
            v = tuple(a + n * b for a, b in zip(v, x))
        return v

    def norm(self) -> Fraction:
        q = self.quaternion()
        return -self.ctx.algebra.nrd(q)

    def real_matrix(self) -> np.ndarray:
        return self.ctx.algebra.real_matrix(self.quaternion())

    def is_primitive(self) -> bool:
        return math.gcd(*self.coords) == 1


def vector_to_embedding(x: TraceZeroVector) -> dict:
    """Optimal-embedding data of a primitive lattice vector.

    Returns the order generator g = (1+x)/2 (odd discriminant) or x/2
    (discriminant divisible by 4), together with the quadratic-order
    discriminant, after checking ring closure.
    """
    if not x.is_primitive():
        raise NotPrimitive("vector is divisible in L")
    D = x.norm()
    if D.denominator != 1 or int(D) % 4 not in (0, 1):
        raise InvalidDiscriminant(f"Q(x) = {D} is not 0, 1 mod 4")
    D = int(D)
    if D > 0 and math.isqrt(D) ** 2 == D:
        raise InvalidDiscriminant("positive discriminant must not be a square")
    ctx = x.ctx
    alg = ctx.algebra
    q = x.quaternion()
    if D % 4 == 0:
        g = tuple(t / 2 for t in q)
    else:
        g = tuple((Fraction(1 if i == 0 else 0) + q[i]) / 2 for i in range(4))
    # ring closure: g^2 = trd(g) g - nrd(g) must have integral coefficients
    tr, nr = alg.trd(g), alg.nrd(g)
    if tr.denominator != 1 or nr.denominator != 1:
        raise InvalidDiscriminant("order generator is not integral")
    disc = tr * tr - 4 * nr
    assert disc == D, "order discriminant must reproduce the vector norm"
    return {"generator": g, "trace": tr, "norm": nr, "discriminant": int(disc)}


def embedding_to_vector(ctx: ShimuraContext, g) -> tuple:
    """Inverse of vector_to_embedding on quaternion data: x = 2g - trd(g)."""
    g = _frac4(g)
    t = quat_trd(g)
    return tuple(2 * a - (t if i == 0 else 0) for i, a in enumerate(g))


# ---------------------------------------------------------------------------
# enumeration and theta series


def _ellipsoid_points(M: np.ndarray, bound: float) -> np.ndarray:
    """All integer triples with x^T M x <= bound (M positive definite)."""
    Minv = np.linalg.inv(M)
    box = np.floor(np.sqrt(np.maximum(bound, 0.0) * np.diag(Minv)) + 1e-9).astype(int)
    ranges = [np.arange(-b, b + 1) for b in box]
    grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, 3)
    vals = np.einsum("ni,ij,nj->n", grid, M, grid)
    return grid[vals <= bound + 1e-9]


def _negline_generator(z: complex) -> np.ndarray:
    """Generator of the negative line of z (x+iy), normalized to Q = -1."""
    x, y = z.real, z.imag
    return np.array([[-x, x * x + y * y], [-1.0, x]]) / y


def majorant_gram(ctx: ShimuraContext, z: complex, lattice: str = "LM") -> np.ndarray:
    """Positive definite majorant Q(v_{z perp}) - Q(v_z) in lattice coords."""
    basis = ctx.trace_zero_basis(lattice)
    alg = ctx.algebra
    mats = [alg.real_matrix(v) for v in basis]
    g = np.array([[float(x) for x in row] for row in alg.gram(basis)])
    xz = _negline_generator(z)
    w = np.array([np.trace(m @ xz) for m in mats])
    return g / 2.0 + np.outer(w, w) / 2.0


def enumerate_vectors(
    ctx: ShimuraContext,
    target,
    box_bound: float,
    lattice: str = "L",
    pair: bool = False,
):
    """Lattice vectors (or pairs) matching a norm target inside a box.

    ``target`` is a single rational norm, or for pairs a triple
    (D1, b, D2) of the moment matrix.  ``box_bound`` caps the majorant
    norm at z = i.  Deterministic lexicographic output order.
    """
    M = majorant_gram(ctx, 1j, lattice)
    pts = _ellipsoid_points(M, float(box_bound))
    pts = pts[np.lexsort(pts.T[::-1])]
    basis = ctx.trace_zero_basis(lattice)
    gram = ctx.algebra.gram(basis)

    def q_of(c):
        return sum(
            Fraction(int(c[i])) * Fraction(int(c[j])) * gram[i][j]
            for i in range(3)
            for j in range(3)
        ) / 2

    if not pair:
        target = Fraction(target)
        return [
            TraceZeroVector(ctx, tuple(int(t) for t in c), lattice)
            for c in pts
            if q_of(c) == target
        ]
    D1, b, D2 = (Fraction(t) for t in target)
    firsts = [c for c in pts if q_of(c) == D1]
    seconds = [c for c in pts if q_of(c) == D2]
    out = []
    for c1 in firsts:
        for c2 in seconds:
            inner = sum(
                Fraction(int(c1[i])) * Fraction(int(c2[j])) * gram[i][j]
                for i in range(3)
                for j in range(3)
            )
            if inner == 2 * b:
                out.append(
                    (
                        TraceZeroVector(ctx, tuple(int(t) for t in c1), lattice),
                        TraceZeroVector(ctx, tuple(int(t) for t in c2), lattice),
                    )
                )
    return out


def _theta_tail(c: float, lam_min: float, bound: float, r: int) -> float:
    """Rigorous tail: sum over majorant mass > bound of e^{-c m} terms.

    Uses e^{-cm} <= e^{-c bound/2} e^{-cm/2} and the product bound
    sum_x e^{-c m(x)/2} <= (theta_1d)^3 with m(x) >= lam_min |x|^2.
    """
    t1 = 1.0
    n = 1
    while True:
        term = 2.0 * math.exp(-c * lam_min * n * n / 2.0)
        t1 += term
        if term < 1e-18 * t1 or n > 10000:
            break
        n += 1
    total = t1**3
    return math.exp(-c * bound / 2.0) * total**r


def theta_truncated(
    ctx: ShimuraContext,
    genus: int,
    tau,
    z: complex,
    bound: float,
    lattice: str = "LM",
) -> tuple[complex, float]:
    """Truncated Siegel theta value at (tau, z) with a rigorous tail bound.

    Genus 1 takes a complex tau, genus 2 a complex symmetric 2x2 array.
    Terms are kept while the weighted majorant mass stays below ``bound``;
    the returned second component bounds the dropped mass.
    """
    basis = ctx.trace_zero_basis(lattice)
    alg = ctx.algebra
    gram = alg.gram(basis)
    gram_f = np.array([[float(x) for x in row] for row in gram])
    M = majorant_gram(ctx, z, lattice)
    xz = _negline_generator(z)
    mats = [alg.real_matrix(v) for v in basis]
    w = np.array([np.trace(m @ xz) for m in mats])

    if genus == 1:
        tau = complex(tau)
        v = tau.imag
        if v <= 0:
            raise ValueError("tau must lie in the upper half plane")
        pts = _ellipsoid_points(M, bound / v)
        val = 0.0 + 0.0j
        for cvec in pts:
            q = cvec @ gram_f @ cvec / 2.0
            qz = -((cvec @ w) ** 2) / 4.0
            qperp = q - qz
            val += np.exp(2j * np.pi * (qperp * tau + qz * np.conj(tau)))
        tail = _theta_tail(2 * np.pi * v, _min_eig(M), bound / v, 1)
        return math.sqrt(v) * val, math.sqrt(v) * tail
    if genus != 2:
        raise ValueError("genus must be 1 or 2")
    tau = np.asarray(tau, dtype=complex)
    v = tau.imag
    lam_v = _min_eig(v)
    if lam_v <= 0:
        raise ValueError("Im tau must be positive definite")
    pts = _ellipsoid_points(M, bound / lam_v)
    qs = np.einsum("ni,ij,nj->n", pts, gram_f, pts) / 2.0
    ws = pts @ w
    val = 0.0 + 0.0j
    n = len(pts)
    mass = np.einsum("ni,ij,nj->n", pts, M, pts)
    for i1 in range(n):
        keep = mass <= bound / lam_v - mass[i1]
        if not keep.any():
            continue
        sub = np.nonzero(keep)[0]
        q11, w1 = qs[i1], ws[i1]
        q22, w2 = qs[sub], ws[sub]
        q12 = pts[i1] @ gram_f @ pts[sub].T / 2.0
        qz11, qz22, qz12 = -w1 * w1 / 4.0, -w2 * w2 / 4.0, -w1 * w2 / 4.0
        trq = q11 * tau[0, 0] + q22 * tau[1, 1] + 2 * q12 * tau[0, 1]
        trqz = (
            qz11 * (tau[0, 0] - np.conj(tau[0, 0]))
            + qz22 * (tau[1, 1] - np.conj(tau[1, 1]))
            + 2 * qz12 * (tau[0, 1] - np.conj(tau[0, 1]))
        )
        val += np.exp(2j * np.pi * (trq - trqz)).sum()
    det_v = float(np.linalg.det(v))
    tail = _theta_tail(2 * np.pi * lam_v, _min_eig(M), bound / lam_v, 2)
    return math.sqrt(det_v) * val, math.sqrt(det_v) * tail


def _min_eig(M) -> float:
    return float(np.linalg.eigvalsh(np.asarray(M, dtype=float)).min())
