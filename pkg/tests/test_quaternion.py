import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest

from shimcycles import padic
from shimcycles import quaternion as Q
from shimcycles.quaternion import ShimuraContext, _det


def test_ramified_primes():
    assert Q.ramified_primes(-1, 3) == [2, 3]
    assert Q.ramified_primes(2, 5) == [2, 5]
    assert Q.ramified_primes(-1, 11) == [2, 11]
    assert Q.ramified_primes(1, 7) == []
    with pytest.raises(Q.DefiniteAlgebra):
        Q.ramified_primes(-1, -1)
    with pytest.raises(Q.SplitAlgebra):
        Q.QuaternionAlgebra(1, 7)


def test_volume_goldens():
    assert ShimuraContext(6, 1).volume_pi_coefficient() == F(2, 3)
    assert ShimuraContext(6, 5).volume_pi_coefficient() == 4
    assert ShimuraContext(10, 1).volume_pi_coefficient() == F(4, 3)


def test_discriminant_group_order():
    ctx = ShimuraContext(6, 1)
    assert ctx.discriminant_group_order(3) == 9
    assert ctx.discriminant_group_order(2) == 8
    assert ShimuraContext(6, 5).discriminant_group_order(7) == 1


FIXTURES = [(6, 1), (6, 5), (10, 1), (22, 1)]


@pytest.mark.parametrize("D,M", FIXTURES)
def test_fixture_orders_verified(D, M):
    ctx = ShimuraContext(D, M)
    alg = ctx.algebra
    assert alg.discriminant == D
    assert alg.is_order(ctx.fixture.basis)
    assert alg.reduced_discriminant(ctx.fixture.basis) == D * M


@pytest.mark.parametrize("D,M", FIXTURES)
def test_fixture_local_data(D, M):
    """Global Gram matches the local models at every p | 2DM."""
    ctx = ShimuraContext(D, M)
    for lattice in ("LM", "L"):
        gram = ctx.algebra.gram(ctx.trace_zero_basis(lattice))
        det = _det(gram)
        for p in padic.prime_factors(2 * D * M):
            model = ctx.local_gram(p, lattice)
            det_model = _det(model)
            assert padic.valuation(det, p) == padic.valuation(det_model, p)
            assert _hasse3(gram, p) == _hasse3(model, p)
            assert _snf_valuations(gram, p) == _snf_valuations(model, p)
    # |L^vee / L| = 16 |LM^vee / LM|, and the LM size matches the formula
    glm = ctx.algebra.gram(ctx.trace_zero_basis("LM"))
    gl = ctx.algebra.gram(ctx.trace_zero_basis("L"))
    assert abs(_det(gl)) == 16 * abs(_det(glm))
    pred = 1
    for p in padic.prime_factors(2 * D * M):
        pred *= ctx.discriminant_group_order(p)
    assert abs(_det(glm)) == pred


def _hasse3(gram, p):
    """Hasse invariant of a ternary form: diagonalize over Q, then pair."""
    g = [[F(x) for x in row] for row in gram]
    diag = []
    for step in range(3):
        if g[0][0] == 0:
            piv = next(
                (i for i in range(len(g)) if g[i][i] != 0),
                None,
            )
            if piv is None:
                # use T[(e_i + e_j)] to create a nonzero diagonal entry
                i, j = next(
                    (i, j)
                    for i in range(len(g))
                    for j in range(len(g))
                    if i != j and g[i][j] != 0
                )
                for k in range(len(g)):
                    g[k][i] += g[k][j]
                for k in range(len(g)):
                    g[i][k] += g[j][k]
            else:
                g[0], g[piv] = g[piv], g[0]
                for row in g:
                    row[0], row[piv] = row[piv], row[0]
        a = g[0][0]
        diag.append(a)
        n = len(g)
        new = [
            [
                g[i][j] - g[i][0] * g[0][j] / a
                for j in range(1, n)
            ]
            for i in range(1, n)
        ]
        g = new
        if not g:
            break
    eps = 1
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            eps *= padic.hilbert_symbol(diag[i], diag[j], p)
    return eps


def _snf_valuations(gram, p):
    """p-adic Smith valuations via gcds of k x k minors."""
    import itertools as it

    g = [[F(x) for x in row] for row in gram]
    n = len(g)
    vals = []
    prev = 0
    for k in range(1, n + 1):
        best = None
        for rows in it.combinations(range(n), k):
            for cols in it.combinations(range(n), k):
                minor = _det([[g[r][c] for c in cols] for r in rows])
                if minor != 0:
                    v = padic.valuation(minor, p)
                    best = v if best is None else min(best, v)
        vals.append(best - prev)
        prev = best
    return vals


def test_vector_to_embedding_examples():
    ctx = ShimuraContext(6, 1)
    vecs = Q.enumerate_vectors(ctx, 5, 14.0)
    assert vecs, "norm-5 vectors must exist in the D=6 lattice"
    x = next(v for v in vecs if v.is_primitive())
    emb = Q.vector_to_embedding(x)
    assert emb["discriminant"] == 5
    g = emb["generator"]
    # g^2 = g + 1 for discriminant 5
    alg = ctx.algebra
    gsq = alg.mul(g, g)
    expect = tuple(a + (1 if i == 0 else 0) for i, a in enumerate(g))
    assert gsq == expect
    # roundtrip
    back = Q.embedding_to_vector(ctx, g)
    assert back == x.quaternion()


def test_vector_to_embedding_errors():
    ctx = ShimuraContext(6, 1)
    vecs = Q.enumerate_vectors(ctx, 5, 14.0)
    x = next(v for v in vecs if v.is_primitive())
    tripled = Q.TraceZeroVector(ctx, tuple(3 * c for c in x.coords), "L")
    with pytest.raises(Q.NotPrimitive):
        Q.vector_to_embedding(tripled)
    sq = Q.enumerate_vectors(ctx, 4, 14.0)
    for v in sq:
        if v.is_primitive():
            emb = Q.vector_to_embedding(v)
            assert emb["discriminant"] == 4
            break


def test_enumerate_pairs_moment_transform():
    """Q(xu) = u^t Q(x) u for enumerated pairs and unimodular u."""
    ctx = ShimuraContext(6, 1)
    pairs = Q.enumerate_vectors(ctx, (5, 1, 5), 14.0, pair=True)
    assert pairs
    alg = ctx.algebra
    x1, x2 = pairs[0]
    q1, q2 = x1.quaternion(), x2.quaternion()
    b = Q.quat_trd(alg.mul(q1, q2)) / 2
    assert (x1.norm(), b, x2.norm()) == (5, 1, 5)
    # u = [[1,1],[0,1]]: (x1, x1+x2)
    y2 = tuple(a + bb for a, bb in zip(q1, q2))
    assert -alg.nrd(y2) == 5 + 2 * 1 + 5


def test_theta_tau_shift_invariance():
    ctx = ShimuraContext(6, 1)
    z = 0.2 + 1.1j
    tau = np.array([[0.3 + 0.9j, 0.1 + 0.2j], [0.1 + 0.2j, -0.2 + 1.4j]])
    b = np.array([[1, 2], [2, -1]])
    v1, t1 = Q.theta_truncated(ctx, 2, tau, z, 10.0)
    v2, t2 = Q.theta_truncated(ctx, 2, tau + b, z, 10.0)
    assert abs(v1 - v2) < 1e-9


def test_theta_zero_bound():
    ctx = ShimuraContext(6, 1)
    v, t = Q.theta_truncated(ctx, 1, 0.4 + 1.3j, 0.1 + 0.8j, 1e-9)
    assert abs(v - math.sqrt(1.3)) < 1e-12


def test_theta_gamma_invariance():
    ctx = ShimuraContext(6, 1)
    unit = ctx.fixture.unit
    g = ctx.algebra.real_matrix(unit)
    g = g / math.sqrt(abs(np.linalg.det(g)))
    z = 0.15 + 0.9j
    gz = (g[0, 0] * z + g[0, 1]) / (g[1, 0] * z + g[1, 1])
    tau = 0.27 + 1.05j
    v1, t1 = Q.theta_truncated(ctx, 1, tau, z, 14.0)
    v2, t2 = Q.theta_truncated(ctx, 1, tau, gz, 14.0)
    assert abs(v1 - v2) <= t1 + t2 + 1e-10


def test_theta_siegel_phi():
    ctx = ShimuraContext(6, 1)
    z = 0.1 + 1.2j
    tau1 = 0.3 + 1.1j
    v2 = 50.0
    tau = np.array([[tau1, 0.0], [0.0, 1j * v2]])
    g2, tail2 = Q.theta_truncated(ctx, 2, tau, z, 16.0)
    g1, tail1 = Q.theta_truncated(ctx, 1, tau1, z, 16.0)
    assert abs(g2 / math.sqrt(v2) - g1) <= tail1 + tail2 / math.sqrt(v2) + 1e-9
