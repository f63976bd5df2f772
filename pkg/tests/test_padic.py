import math
import random
from fractions import Fraction as F

import pytest

from shimcycles import padic as P


def test_valuation_examples():
    assert P.valuation(12, 2) == 2
    assert P.valuation(F(1, 9), 3) == -2
    assert P.valuation(0, 5) == math.inf


def test_unit_square_class():
    assert P.unit_square_class(4, 3) == 1
    assert P.unit_square_class(F(7, 5), 3) == 2  # 7/5 = 1*2^{-1} = 2 mod 3
    assert P.unit_square_class(7, 2) == 7
    assert P.unit_square_class(F(3, 5), 2) == 7  # 3*5^{-1} = 3*5 = 15 = 7 mod 8


def test_hilbert_symbol_examples():
    assert P.hilbert_symbol(1, -7, 2) == 1
    assert P.hilbert_symbol(-1, -1, P.OO) == -1
    assert P.hilbert_symbol(-1, 3, 2) == -1
    assert P.hilbert_symbol(2, 3, 3) == -1


def test_hilbert_symmetry_and_bimultiplicativity():
    rng = random.Random(7)
    vals = [x for x in range(-30, 31) if x]
    places = [2, 3, 5, 7, P.OO]
    for _ in range(200):
        a, a2, b = rng.choice(vals), rng.choice(vals), rng.choice(vals)
        p = rng.choice(places)
        assert P.hilbert_symbol(a, b, p) == P.hilbert_symbol(b, a, p)
        assert P.hilbert_symbol(a * a2, b, p) == P.hilbert_symbol(
            a, b, p
        ) * P.hilbert_symbol(a2, b, p)


def test_product_formula():
    rng = random.Random(11)
    vals = [x for x in range(-50, 51) if x]
    for _ in range(200):
        a, b = rng.choice(vals), rng.choice(vals)
        places = set(P.prime_factors(4 * abs(a) * abs(b))) | {2, P.OO}
        prod = 1
        for pl in places:
            prod *= P.hilbert_symbol(a, b, pl)
        assert prod == 1, (a, b)


def test_hilbert_vs_bruteforce_oracle():
    # the full |a|,|b| <= 30 sweep for small p; spot checks at 11, 13
    for p in (2, 3, 5):
        for a in range(-30, 31):
            for b in range(-30, 31):
                if a == 0 or b == 0:
                    continue
                assert P.hilbert_symbol(a, b, p) == P.hilbert_symbol_bruteforce(
                    a, b, p
                ), (a, b, p)
    for p in (7, 11, 13):
        rng = random.Random(p)
        for _ in range(60):
            a = rng.choice([x for x in range(-30, 31) if x])
            b = rng.choice([x for x in range(-30, 31) if x])
            if P.valuation(a, p) >= 2 or P.valuation(b, p) >= 2:
                continue
            assert P.hilbert_symbol(a, b, p) == P.hilbert_symbol_bruteforce(a, b, p)


def test_diagonalize_examples():
    assert P.diagonalize_over_Qp([[1, 0], [0, 1]], 7) == (1, 1)
    d1, d2 = P.diagonalize_over_Qp([[0, F(1, 2)], [F(1, 2), 0]], 2)
    # product must be -1/4 modulo squares and the Hasse invariant preserved
    ratio = (d1 * d2) / F(-1, 4)
    assert P.valuation(ratio, 2) % 2 == 0 and P.unit_square_class(
        P.unit_part(ratio, 2), 2
    ) == 1
    assert P.diagonalize_over_Qp([[2, 1], [1, 2]], 3) == (2, F(3, 2))
    with pytest.raises(P.SingularMatrix):
        P.diagonalize_over_Qp([[1, 1], [1, 1]], 3)


def test_hasse_examples():
    assert P.hasse_invariant([[1, 0], [0, 1]], 7) == 1
    assert P.hasse_invariant([[1, 0], [0, 3]], 3) == 1
    assert P.hasse_invariant([[2, 0], [0, 3]], 3) == -1


def _random_unimodular(rng):
    u = [[1, 0], [0, 1]]
    for _ in range(rng.randint(1, 6)):
        k = rng.randint(-3, 3)
        if rng.random() < 0.5:
            u = [[u[0][0] + k * u[1][0], u[0][1] + k * u[1][1]], u[1]]
        else:
            u = [u[0], [u[1][0] + k * u[0][0], u[1][1] + k * u[0][1]]]
    if rng.random() < 0.5:
        u = [u[1], u[0]]
    return u


def _congruent(T, u):
    (a, b), (c, d) = u
    (t00, t01), (_, t11) = T
    m00 = a * (t00 * a + t01 * c) + c * (t01 * a + t11 * c)
    m01 = a * (t00 * b + t01 * d) + c * (t01 * b + t11 * d)
    m11 = b * (t00 * b + t01 * d) + d * (t01 * b + t11 * d)
    return [[m00, m01], [m01, m11]]


def test_hasse_invariance_under_unimodular():
    rng = random.Random(3)
    mats = [[[5, 1], [1, 5]], [[2, 1], [1, 2]], [[F(3), F(1, 2)], [F(1, 2), F(7)]]]
    for T in mats:
        for p in (2, 3, 5, 7):
            base = P.hasse_invariant(T, p)
            for _ in range(25):
                u = _random_unimodular(rng)
                assert P.hasse_invariant(_congruent(T, u), p) == base


def test_elementary_divisors_examples():
    ed = P.elementary_divisors([[1, 0], [0, 1]], 5)
    assert (ed.a1, ed.a2, ed.eps1, ed.eps2) == (0, 0, 1, 1)
    ed = P.elementary_divisors([[2, 1], [1, 2]], 3)
    assert (ed.a1, ed.a2, ed.eps1, ed.eps2) == (0, 1, 2, 2)
    with pytest.raises(P.Unsupported2AdicType):
        P.elementary_divisors([[0, 1], [1, 0]], 2)


def test_elementary_divisors_invariants():
    rng = random.Random(5)
    for _ in range(120):
        a = rng.randint(-20, 20)
        d = rng.randint(-20, 20)
        b = F(rng.randint(-20, 20), rng.choice([1, 2]))
        T = [[F(a), b], [b, F(d)]]
        det = F(a) * d - b * b
        if det == 0:
            continue
        for p in (2, 3, 5):
            if not P.in_dual_sym2(T, p):
                continue
            try:
                ed = P.elementary_divisors(T, p)
            except P.Unsupported2AdicType:
                assert p == 2
                continue
            assert ed.a1 + ed.a2 == P.valuation(det, p)
            assert ed.hasse() == P.hasse_invariant(T, p)
