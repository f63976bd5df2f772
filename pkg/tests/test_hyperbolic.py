import cmath
import math

import numpy as np
import pytest

from shimcycles import hyperbolic as H
from shimcycles import specfun as sf


def test_point_negline_roundtrip():
    rng = np.random.default_rng(0)
    assert abs(H.negline_to_point(H.point_to_negline(1j)) - 1j) < 1e-15
    gen = H.point_to_negline(2j).generator
    assert np.allclose(gen, np.array([[0.0, 2.0], [-0.5, 0.0]]))
    for _ in range(100):
        z = complex(rng.normal(), abs(rng.normal()) + 0.05)
        assert abs(H.negline_to_point(H.point_to_negline(z)) - z) < 1e-12


def test_e_basis_geometry():
    r = H.intersection_angle(H.E1, H.E2)
    assert abs(r["angle"] - math.pi / 2) < 1e-12
    assert abs(r["point"] - 1j) < 1e-12
    assert r["b"] == 0
    assert H.point_geodesic_distance(H.E3, H.E1) < 1e-12
    assert H.point_geodesic_distance(H.E3, H.E2) < 1e-12


def test_conjugated_distances():
    t0 = 0.8
    assert abs(H.geodesic_distance(H.E2, H.conj_vector(H.a_t(t0), H.E2)) - t0) < 1e-9
    assert abs(H.point_point_distance(H.E3, H.conj_vector(H.a_t(t0), H.E3)) - t0) < 1e-10
    # tangent configurations have distance zero
    with pytest.raises(H.Intersecting):
        H.geodesic_distance(H.E1, H.E2)


def test_no_intersection_error():
    with pytest.raises(H.NoIntersection):
        H.intersection_angle(H.E2, H.conj_vector(H.a_t(2.0), H.E2))
    with pytest.raises(H.SignMismatch):
        H.intersection_angle(H.E3, H.E2)


def test_formula_suite_random():
    """All four configuration formulas on random conjugates (the asserts
    live inside the functions; tolerance 1e-10)."""
    rng = np.random.default_rng(42)
    n_angle = n_dist = n_pg = n_pp = 0
    while min(n_angle, n_dist, n_pg, n_pp) < 100:
        g = (
            H.k_theta(rng.uniform(0, math.pi))
            @ H.a_t(rng.uniform(-1.5, 1.5))
            @ H.rho_t(rng.uniform(-1, 1))
        )
        h = H.k_theta(rng.uniform(0, math.pi)) @ H.a_t(rng.uniform(-1.0, 1.0))
        x1 = H.conj_vector(g, H.E1)
        x2 = H.conj_vector(g @ h, H.E2)
        b = H.half_inner(x1, x2)
        D = H.q_norm(x1) * H.q_norm(x2)
        if b * b < D:
            H.intersection_angle(x1, x2)
            n_angle += 1
        else:
            H.geodesic_distance(x1, x2)
            n_dist += 1
        x3 = H.conj_vector(g, H.E3)
        H.point_geodesic_distance(x3, x2)
        n_pg += 1
        x4 = H.conj_vector(g @ h, H.E3)
        H.point_point_distance(x3, x4)
        n_pp += 1


def test_equivariance():
    rng = np.random.default_rng(3)
    for _ in range(30):
        g = H.a_t(rng.uniform(-1, 1)) @ H.rho_t(rng.uniform(-0.8, 0.8))
        x1, x2 = H.E1, H.conj_vector(H.k_theta(0.5), H.E1)
        r0 = H.intersection_angle(x1, x2)
        r1 = H.intersection_angle(H.conj_vector(g, x1), H.conj_vector(g, x2))
        assert abs(r0["angle"] - r1["angle"]) < 1e-10
        assert abs(H.moebius(g, r0["point"]) - r1["point"]) < 1e-9


def test_polar_and_fj_coords():
    rng = np.random.default_rng(1)
    for _ in range(60):
        z = complex(rng.normal(), abs(rng.normal()) + 0.1)
        pc = H.polar_coords(z)
        assert abs(pc.reconstruct() - z) < 1e-12
        assert 0 <= pc.theta < math.pi
        b, t = H.fj_coords(z)
        assert abs(H.fj_point(b, t) - z) < 1e-12
        g = (
            H.a_t(rng.uniform(-1, 1))
            @ H.rho_t(rng.uniform(-1, 1))
            @ H.k_theta(rng.uniform(0, 2 * math.pi))
        )
        fj = H.fj_decompose(g)
        gr = fj.reconstruct_group()
        assert np.allclose(g, gr, atol=1e-11) or np.allclose(g, -gr, atol=1e-11)


def test_laplacian_consistency():
    s = 0.7
    lam = s * (1 - s)
    f = lambda z: z.imag**s
    for z in (0.4 + 1.3j, -0.2 + 0.8j):
        assert abs(H.laplacian_polar_fd(f, z) - lam * f(z)) < 1e-6
        assert abs(H.laplacian_fj_fd(f, z) - lam * f(z)) < 1e-6


def test_measure_consistency():
    import scipy.integrate as si

    t = 0.9
    area = si.quad(lambda u: 2 * math.pi * math.sinh(u), 0, t)[0]
    assert abs(area - 2 * math.pi * (math.cosh(t) - 1)) < 1e-10


def test_taylor_constant():
    cs = H.geodesic_taylor_coeffs(lambda z: 1.0, 1j, np.eye(2), 3, 0.5, s=0.0)
    assert abs(cs[0] - 1) < 1e-12
    for n in (1, -1, 2, -2, 3, -3):
        assert abs(cs[n]) < 1e-12


def test_taylor_radius_independence():
    s = 0.7
    f = lambda z: z.imag**s
    c1 = H.geodesic_taylor_coeffs(f, 1j, np.eye(2), 4, 0.3, s=s)
    c2 = H.geodesic_taylor_coeffs(f, 1j, np.eye(2), 4, 0.8, s=s)
    assert max(abs(c1[n] - c2[n]) for n in c1) < 1e-8


def test_taylor_reconstruction():
    s, t = 0.7, 0.5
    f = lambda z: z.imag**s
    cs = H.geodesic_taylor_coeffs(f, 1j, np.eye(2), 8, t, s=s)
    pvals = {n: sf.legendre_P(abs(n), -s, math.cosh(t)).value for n in cs}
    for th in np.linspace(0, math.pi, 13):
        z = H.moebius(H.k_theta(th) @ H.a_t(t), 1j)
        val = sum(cs[n] * pvals[n] * cmath.exp(2j * n * th) for n in cs)
        assert abs(val - f(z)) < 1e-6


def test_fj_cycle_constant():
    out = H.fj_cycle_coeffs(lambda z: 1.0, 2.0, 0, 0.4, s=0.0)
    assert abs(out["c"] - 1) < 1e-12
    assert abs(out["gamma"] - 1) < 1e-12
    assert abs(out["gamma_prime"]) < 1e-10
    assert abs(out["decomposition"] - out["c"]) < 1e-7
    out2 = H.fj_cycle_coeffs(lambda z: 1.0, 2.0, 2, 0.4)
    assert abs(out2["c"]) < 1e-12


def _fj_model(n, b0, s, kind):
    def f(z):
        b, t = H.fj_coords(z)
        pp, pm = sf.p_plusminus(n, s, b0, math.tanh(2 * t))
        base = pp.value if kind == "+" else pm.value
        return cmath.exp(2j * math.pi * n * b / b0) * base / math.sqrt(math.cosh(2 * t))

    return f


def test_fj_model_eigenfunction_and_decomposition():
    n, b0, s = 1, 2.0, 0.7
    f = _fj_model(n, b0, s, "+")
    lam = s * (1 - s)
    zt = 0.25 + 1.1j
    assert abs(H.laplacian_fj_fd(f, zt, h=1e-4) - lam * f(zt)) < 1e-6
    out = H.fj_cycle_coeffs(f, b0, n, 0.37, s=s)
    assert abs(out["c"] - out["decomposition"]) < 1e-7
    assert abs(out["gamma"] - 1) < 1e-9
    assert abs(out["gamma_prime"]) < 1e-8
    fo = _fj_model(n, b0, s, "-")
    out = H.fj_cycle_coeffs(fo, b0, n, 0.37, s=s)
    assert abs(out["c"] - out["decomposition"]) < 1e-7
    assert abs(out["gamma"]) < 1e-9
    assert abs(out["gamma_prime"] - 1) < 1e-8


def test_fj_parity_symmetry():
    s = 0.7
    f = lambda z: z.imag**s
    for n in (0, 1, 2):
        ca = H.fj_cycle_coeffs(f, 2.0, n, -0.3, require_periodic=False, n_nodes=256)["c"]
        cb = H.fj_cycle_coeffs(f, 2.0, n, 0.3, require_periodic=False, n_nodes=256)["c"]
        assert abs(ca - cb) < 1e-14


def test_not_periodic_raises():
    with pytest.raises(H.NotPeriodic):
        H.fj_cycle_coeffs(lambda z: z.imag**0.7, 2.0, 0, 0.3)
