import math
import random
from fractions import Fraction as F

import pytest

from shimcycles import counting as C
from shimcycles.counting import IntersectionMatrix
from shimcycles.quaternion import ShimuraContext

CTX6 = ShimuraContext(6, 1)
CTX10 = ShimuraContext(10, 1)
CTX65 = ShimuraContext(6, 5)


def test_admissible_nice():
    assert C.is_admissible_nice(5, 12, 2) == {"admissible": True, "nice": True}
    assert C.is_admissible_nice(5, 5, 2) == {"admissible": False, "nice": True}
    assert C.is_admissible_nice(4, 4, 0) == {"admissible": True, "nice": False}


def test_tilde_whittaker_goldens():
    # unimodular at a generic prime
    assert C.tilde_whittaker([[1, 0], [0, 1]], 5, CTX6) == 1
    # a1 = a2 = 1 generic, representable: 2 * (single term)
    assert C.tilde_whittaker([[5, 0], [0, 5]], 5, CTX6) == 2
    # ramified odd prime: 2p/(1 - 1/p) = 9 at p = 3 when the class matches
    T = IntersectionMatrix(5, 5, 1)
    assert C.tilde_whittaker(T, 3, CTX6) == 9
    # ramified but wrong class gives zero
    assert C.tilde_whittaker([[1, 0], [0, 1]], 3, CTX6) == 0


def test_beta_goldens():
    # odd p | M, e = 1, a1 = 1: single term p^0 = 1 (representable class)
    assert C.beta_p([[10, 0], [0, 10]], 5, CTX65) == 1
    # odd p | M, e = 1, a1 = 0, a2 = 3: (1+v0)/2 * max(3-1+1, 0)
    got = C.beta_p([[1, 0], [0, 125]], 5, CTX65)
    assert got == 3  # v0 = (1,5)_5 = +1
    got = C.beta_p([[2, 0], [0, 2 * 125]], 5, CTX65)
    assert got == 0  # v0 = -1 kills the second-case factor
    # p = 2, eps1 = 5 mod 8, M odd, matching classes: 1
    assert C.beta_p([[5, 0], [0, 8 * 7]], 2, CTX6) == 1
    # p = 2, eps1 = 1 mod 8, t = 4, e = 0: max(4 - 0 - 1, 0) = 3
    ctx15 = ShimuraContext(15, 1)
    assert C.beta_p([[1, 0], [0, 16 * 7]], 2, ctx15) == 3


def test_beta2_uncovered_cases():
    with pytest.raises(C.UncoveredCase):
        C.beta_p([[2, 0], [0, 4]], 2, CTX6)  # both divisors even
    ctx152 = ShimuraContext(15, 2)
    with pytest.raises(C.UncoveredCase):
        C.beta_p([[5, 0], [0, 4 * 5]], 2, ctx152)  # eps1 = 5 mod 8 with 2 | M


def test_count_RT_vanishing_and_golden():
    # Hasse +1 at the odd ramified prime kills the count
    assert C.count_RT(IntersectionMatrix(5, 12, 2), CTX6).value == 0
    res = C.count_RT(IntersectionMatrix(5, 5, 1), CTX6)
    assert res.value == 4
    by_p = {r.p: r for r in res.primes}
    assert by_p[3].eps_T == -1
    assert by_p[2].beta == 1


def test_count_RT_unimodular_invariance():
    rng = random.Random(1)
    mats = [IntersectionMatrix(5, 5, 1), IntersectionMatrix(8, 5, 4), IntersectionMatrix(12, 13, 2)]
    for ctx in (CTX6, CTX10, CTX65):
        for T in mats:
            base = C.count_RT(T, ctx).value
            for _ in range(50):
                u = [[1, 0], [0, 1]]
                for _ in range(rng.randint(1, 5)):
                    k = rng.randint(-2, 2)
                    if rng.random() < 0.5:
                        u = [[u[0][0] + k * u[1][0], u[0][1] + k * u[1][1]], u[1]]
                    else:
                        u = [u[0], [u[1][0] + k * u[0][0], u[1][1] + k * u[0][1]]]
                T2 = T.congruent(u)
                assert C.count_RT(T2, ctx).value == base


def test_rickards_case_goldens():
    # case 0: p away from everything
    assert C.rickards_local_factor(IntersectionMatrix(5, 5, 1), 7, CTX6) == 1
    # case 0 at a level prime not dividing det/4: zero
    T = IntersectionMatrix(5, 5, 1)  # det 24
    assert C.rickards_local_factor(T, 5, CTX65) == 0
    # case v: (D1|p) = +1 at a ramified prime
    T2 = IntersectionMatrix(13, 12, 6)  # det 120, (13|3) = +1, 3 | 6
    assert C.rickards_local_factor(T2, 3, CTX6) == 0
    # case vi: (D1|p) = +1 unramified, vp(D2) <= 1: max(t + 1 - e, 0)
    T3 = IntersectionMatrix(29, 5, 5)  # det 120, (29|5) = +1, t = 1
    assert C.rickards_local_factor(T3, 5, CTX6) == 2
    assert C.rickards_local_factor(T3, 5, CTX65) == max(1 + 1 - 1, 0)


def test_dual_path_small_grid():
    for ctx in (CTX6, CTX10, CTX65):
        for d1 in range(5, 18):
            if d1 % 4 not in (0, 1):
                continue
            for d2 in range(5, 18):
                if d2 % 4 not in (0, 1):
                    continue
                for b in range(0, math.isqrt(d1 * d2) + 1):
                    if b * b >= d1 * d2:
                        continue
                    flags = C.is_admissible_nice(d1, d2, b)
                    if not (flags["admissible"] and flags["nice"]):
                        continue
                    lhs = C.count_RT(IntersectionMatrix(d1, d2, b), ctx).value
                    rhs = C.rickards_all_pairs(d1, d2, b, ctx)
                    assert lhs == rhs, (ctx.D, ctx.level, d1, d2, b)


def test_rickards_rejects_bad_input():
    with pytest.raises(C.NotAdmissible):
        C.rickards_count(5, 5, 2, CTX6)
    with pytest.raises(C.NotNice):
        C.rickards_count(4, 4, 0, CTX6)


def test_density_oracle_golden():
    assert C.local_density_oracle([[1, 0], [0, 1]], 5, CTX6, 2) == F(24, 25)


def test_density_oracle_stability_error():
    with pytest.raises(C.DepthTooSmall):
        C.local_density_oracle([[1, 0], [0, 2 * 125]], 5, CTX6, 3)


def test_oracle_matches_closed_forms_small():
    # one case per prime class; the acceptance suite runs the full grid
    cases = [
        ([[2, 0], [0, 10]], 5, CTX6, 3, "generic"),
        ([[1, 0], [0, 3]], 3, CTX6, 2, "ramified"),
        ([[1, 0], [0, 5]], 5, CTX65, 3, "level"),
        ([[5, 0], [0, 8 * 3]], 2, CTX6, 6, "two"),
    ]
    for T, p, ctx, depth, _name in cases:
        if p == 2 or ctx.level % p == 0:
            got = C.beta_from_density(T, p, ctx, depth)
            want = C.beta_p(T, p, ctx)
        else:
            got = C.tilde_whittaker_from_density(T, p, ctx, depth)
            want = C.tilde_whittaker(T, p, ctx)
        assert got == want, (_name, got, want)


def test_representability_coherence():
    # tilde W = 0 exactly when the Hasse criterion fails
    from shimcycles.padic import hasse_invariant

    rng = random.Random(2)
    for _ in range(60):
        d1 = rng.randint(1, 30)
        d2 = rng.randint(1, 30)
        b = rng.randint(-10, 10)
        T = [[F(d1), F(b)], [F(b), F(d2)]]
        if F(d1) * d2 - b * b == 0:
            continue
        for p, ctx in ((5, CTX6), (7, CTX6), (3, CTX10)):
            w = C.tilde_whittaker(T, p, ctx)
            want_nonzero = hasse_invariant(T, p) == (1 if ctx.D % p else -1)
            assert (w != 0) == want_nonzero, (T, p)


def test_count_result_serialization():
    res = C.count_RT(IntersectionMatrix(5, 5, 1), CTX6)
    js = res.to_json(IntersectionMatrix(5, 5, 1), CTX6)
    assert js["value"] == "4"
    assert js["T"] == [5, 1, 5]
    assert {r["p"] for r in js["primes"]} >= {2, 3}
