"""Hyperbolic geometry of the upper half plane in the trace-zero model.

Points and geodesics are encoded by real trace-zero 2x2 matrices x with
Q(x) = -det(x): negative vectors give points (via the negative-line map),
positive vectors give geodesics {z : z perp x}.  The half inner product
b = tr(x1 x2)/2 of a pair governs intersection angles and distances; all
four configuration formulas are checked here against direct metric
computations, which are deliberately independent of those formulas
(numeric intersection points, tangent vectors, golden-section
minimization along arclength).

Also provides geodesic polar and geodesic cartesian (A x R x K)
coordinates, and the numeric coefficient extraction for eigenfunction
expansions around a point or along a closed geodesic.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import specfun


class NoIntersection(ValueError):
    pass


class Intersecting(ValueError):
    pass


class SignMismatch(ValueError):
    pass


class QuadratureFailure(RuntimeError):
    pass


class NotPeriodic(ValueError):
    pass


E1 = np.array([[1.0, 0.0], [0.0, -1.0]])
E2 = np.array([[0.0, 1.0], [1.0, 0.0]])
E3 = np.array([[0.0, -1.0], [1.0, 0.0]])


def q_norm(x) -> float:
    """Q(x) = -det(x)."""
    x = np.asarray(x, dtype=float)
    return -(x[0, 0] * x[1, 1] - x[0, 1] * x[1, 0])


def inner(x, y) -> float:
    """(x, y) = tr(x y)."""
    return float(np.trace(np.asarray(x) @ np.asarray(y)))


def half_inner(x, y) -> float:
    return inner(x, y) / 2.0


def k_theta(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def a_t(t: float) -> np.ndarray:
    e = math.exp(t / 2.0)
    return np.array([[e, 0.0], [0.0, 1.0 / e]])


def rho_t(t: float) -> np.ndarray:
    return np.array([[math.cosh(t), math.sinh(t)], [math.sinh(t), math.cosh(t)]])


def moebius(g, z: complex) -> complex:
    a, b = g[0]
    c, d = g[1]
    return (a * z + b) / (c * z + d)


def conj_vector(g, x) -> np.ndarray:
    """Conjugation action g . x = g x g^{-1} (g with det != 0)."""
    g = np.asarray(g, dtype=float)
    return g @ np.asarray(x, dtype=float) @ np.linalg.inv(g)


def translation_to(z: complex) -> np.ndarray:
    """Upper-triangular g in SL_2(R) with g i = z."""
    if z.imag <= 0:
        raise ValueError("point must lie in the upper half plane")
    r = math.sqrt(z.imag)
    return np.array([[r, z.real / r], [0.0, 1.0 / r]])


def hyp_distance(z1: complex, z2: complex) -> float:
    return math.acosh(1.0 + abs(z1 - z2) ** 2 / (2.0 * z1.imag * z2.imag))


# ---------------------------------------------------------------------------
# points <-> negative lines, geodesics


@dataclass(frozen=True)
class NegLine:
    """Negative line spanned by `generator` (Q = -1, lower-left < 0)."""

    generator: np.ndarray

    @staticmethod
    def from_vector(x) -> "NegLine":
        x = np.asarray(x, dtype=float)
        q = q_norm(x)
        if q >= 0:
            raise SignMismatch("vector must have negative norm")
        g = x / math.sqrt(-q)
        if g[1, 0] > 0:
            g = -g
        return NegLine(g)

    def point(self) -> complex:
        g = self.generator
        y = -1.0 / g[1, 0]
        return complex(g[1, 1] * y, y)


def point_to_negline(z: complex) -> NegLine:
    """The negative line of z = x + iy: span of (1/y) [[-x, |z|^2], [-1, x]]."""
    x, y = z.real, z.imag
    if y <= 0:
        raise ValueError("point must lie in the upper half plane")
    return NegLine(np.array([[-x, x * x + y * y], [-1.0, x]]) / y)


def negline_to_point(line: NegLine) -> complex:
    return line.point()


def geodesic_endpoints(x) -> tuple:
    """Boundary data of the geodesic of a positive vector.

    Returns ("circle", center, radius) or ("line", x0) for the geodesic
    d|z|^2 - 2 b0 Re(z) - c = 0 attached to x = [[b0, c], [d, -b0]].
    """
    x = np.asarray(x, dtype=float)
    if q_norm(x) <= 0:
        raise SignMismatch("vector must have positive norm")
    b0, c = x[0, 0], x[0, 1]
    d = x[1, 0]
    if abs(d) < 1e-14:
        return ("line", -c / (2.0 * b0))
    center = b0 / d
    radius = math.sqrt(q_norm(x)) / abs(d)
    return ("circle", center, radius)


def geodesic_point(x, s: float) -> complex:
    """Unit-speed parametrization of the geodesic of a positive vector."""
    kind = geodesic_endpoints(x)
    if kind[0] == "line":
        return complex(kind[1], math.exp(s))
    _, m, r = kind
    return complex(m + r * math.tanh(s), r / math.cosh(s))


def geodesic_tangent(x, s: float) -> complex:
    """Velocity of the unit-speed parametrization at parameter s."""
    kind = geodesic_endpoints(x)
    if kind[0] == "line":
        return complex(0.0, math.exp(s))
    _, _, r = kind
    sech = 1.0 / math.cosh(s)
    return complex(r * sech * sech, -r * sech * math.tanh(s))


def _param_of_point(x, z: complex) -> float:
    """Arclength parameter of a point lying on the geodesic of x."""
    kind = geodesic_endpoints(x)
    if kind[0] == "line":
        return math.log(z.imag)
    _, m, r = kind
    return math.atanh(min(1.0, max(-1.0, (z.real - m) / r)))


def _closest_param(x, z: complex) -> float:
    """Arclength parameter on the geodesic of x closest to z (golden section)."""
    lo, hi = -30.0, 30.0
    # bracket by coarse scan first
    ss = np.linspace(lo, hi, 241)
    ds = [hyp_distance(geodesic_point(x, s), z) for s in ss]
    i = int(np.argmin(ds))
    lo, hi = ss[max(0, i - 1)], ss[min(len(ss) - 1, i + 1)]
    phi = (math.sqrt(5.0) - 1) / 2
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc = hyp_distance(geodesic_point(x, c), z)
    fd = hyp_distance(geodesic_point(x, d), z)
    for _ in range(200):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = hyp_distance(geodesic_point(x, c), z)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = hyp_distance(geodesic_point(x, d), z)
        if b - a < 1e-14:
            break
    return (a + b) / 2


def intersection_angle(x1, x2, tol: float = 1e-10) -> dict:
    """Intersection point and (unsigned) angle of two geodesics.

    Computes the point from the boundary circles and the angle from the
    tangent vectors, then checks cos(angle) = |b| / sqrt(D1 D2).
    """
    D1, D2 = q_norm(x1), q_norm(x2)
    if D1 <= 0 or D2 <= 0:
        raise SignMismatch("both vectors must have positive norm")
    b = half_inner(x1, x2)
    if b * b >= D1 * D2:
        raise NoIntersection("geodesics are disjoint or asymptotic")
    z = _intersect_geodesics(x1, x2)
    t1 = geodesic_tangent(x1, _param_of_point(x1, z))
    t2 = geodesic_tangent(x2, _param_of_point(x2, z))
    ang = abs(cmath.phase(t2 / t1))
    ang = min(ang, math.pi - ang)
    expected = abs(b) / math.sqrt(D1 * D2)
    if abs(math.cos(ang) - expected) > tol:
        raise AssertionError(
            f"angle formula violated: cos {math.cos(ang)} vs {expected}"
        )
    return {"angle": ang, "point": z, "b": b, "sign": 1 if b >= 0 else -1}


def _intersect_geodesics(x1, x2) -> complex:
    k1, k2 = geodesic_endpoints(x1), geodesic_endpoints(x2)
    if k1[0] == "line" and k2[0] == "line":
        raise NoIntersection("parallel vertical lines")
    if k1[0] == "line":
        k1, k2 = k2, k1
    if k2[0] == "line":
        _, m, r = k1
        x0 = k2[1]
        y2 = r * r - (x0 - m) ** 2
        if y2 <= 0:
            raise NoIntersection("no crossing")
        return complex(x0, math.sqrt(y2))
    _, m1, r1 = k1
    _, m2, r2 = k2
    if abs(m1 - m2) < 1e-15:
        raise NoIntersection("concentric")
    xx = (r1 * r1 - r2 * r2 - m1 * m1 + m2 * m2) / (2 * (m2 - m1))
    y2 = r1 * r1 - (xx - m1) ** 2
    if y2 <= 0:
        raise NoIntersection("no crossing")
    return complex(xx, math.sqrt(y2))


def geodesic_distance(x1, x2, tol: float = 1e-10) -> float:
    """Distance between disjoint geodesics, minimized numerically.

    Checks cosh(d) = |b| / sqrt(D1 D2) before returning.
    """
    D1, D2 = q_norm(x1), q_norm(x2)
    if D1 <= 0 or D2 <= 0:
        raise SignMismatch("both vectors must have positive norm")
    b = half_inner(x1, x2)
    if b * b < D1 * D2:
        raise Intersecting("geodesics cross; the distance is zero")
    d = _min_distance_between(x1, x2)
    expected = abs(b) / math.sqrt(D1 * D2)
    if abs(math.cosh(d) - expected) > max(tol, 1e-9 * expected):
        raise AssertionError(
            f"distance formula violated: cosh {math.cosh(d)} vs {expected}"
        )
    return d


def _min_distance_between(x1, x2) -> float:
    phi = (math.sqrt(5.0) - 1) / 2

    def dist_to_x2(s):
        z = geodesic_point(x1, s)
        return hyp_distance(z, geodesic_point(x2, _closest_param(x2, z)))

    ss = np.linspace(-25.0, 25.0, 201)
    vals = [dist_to_x2(s) for s in ss]
    i = int(np.argmin(vals))
    a, bb = ss[max(0, i - 1)], ss[min(len(ss) - 1, i + 1)]
    c = bb - phi * (bb - a)
    d = a + phi * (bb - a)
    fc, fd = dist_to_x2(c), dist_to_x2(d)
    for _ in range(120):
        if fc < fd:
            bb, d, fd = d, c, fc
            c = bb - phi * (bb - a)
            fc = dist_to_x2(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (bb - a)
            fd = dist_to_x2(d)
        if bb - a < 1e-13:
            break
    return dist_to_x2((a + bb) / 2)


def point_geodesic_distance(x1, x2, tol: float = 1e-10) -> float:
    """Distance from the point of a negative vector to a positive one's geodesic."""
    D1, D2 = q_norm(x1), q_norm(x2)
    if D1 >= 0 or D2 <= 0:
        raise SignMismatch("expected a negative and a positive vector")
    z = NegLine.from_vector(x1).point()
    d = hyp_distance(z, geodesic_point(x2, _closest_param(x2, z)))
    b = half_inner(x1, x2)
    expected = abs(b) / math.sqrt(-D1 * D2)
    if abs(math.sinh(d) - expected) > max(tol, 1e-9 * (1 + expected)):
        raise AssertionError(
            f"point-geodesic formula violated: sinh {math.sinh(d)} vs {expected}"
        )
    return d


def point_point_distance(x1, x2, tol: float = 1e-10) -> float:
    """Distance between the points of two negative vectors."""
    D1, D2 = q_norm(x1), q_norm(x2)
    if D1 >= 0 or D2 >= 0:
        raise SignMismatch("expected two negative vectors")
    z1 = NegLine.from_vector(x1).point()
    z2 = NegLine.from_vector(x2).point()
    d = hyp_distance(z1, z2)
    b = half_inner(x1, x2)
    expected = abs(b) / math.sqrt(D1 * D2)
    if abs(math.cosh(d) - expected) > max(tol, 1e-9 * expected):
        raise AssertionError(
            f"point-point formula violated: cosh {math.cosh(d)} vs {expected}"
        )
    return d


# ---------------------------------------------------------------------------
# coordinates


@dataclass(frozen=True)
class PolarCoords:
    t: float
    theta: float
    g: np.ndarray

    def reconstruct(self) -> complex:
        return moebius(self.g @ k_theta(self.theta) @ a_t(self.t), 1j)


def polar_coords(z: complex, g=None) -> PolarCoords:
    """Geodesic polar coordinates of z around g*i (g defaults to identity)."""
    if g is None:
        g = np.eye(2)
    w = moebius(np.linalg.inv(np.asarray(g, dtype=float)), z)
    t = hyp_distance(w, 1j)
    if t < 1e-15:
        return PolarCoords(0.0, 0.0, np.asarray(g, dtype=float))
    v = math.exp(t)
    x, y = w.real, w.imag
    cos2t = (2 * v / y - (1 + v * v)) / (1 - v * v)
    sin2t = 2 * x * (v / y) / (1 - v * v)
    theta = math.atan2(sin2t, cos2t) / 2.0 % math.pi
    return PolarCoords(t, theta, np.asarray(g, dtype=float))


@dataclass(frozen=True)
class FJCoords:
    b: float
    t: float
    theta: float

    def reconstruct_group(self) -> np.ndarray:
        e = math.exp(self.b / 2)
        ab = np.array([[e, 0.0], [0.0, 1.0 / e]])
        return ab @ rho_t(self.t) @ k_theta(self.theta)


def fj_point(b: float, t: float) -> complex:
    """a_b rho_t . i = e^b (tanh 2t + i / cosh 2t)."""
    return math.exp(b) * complex(math.tanh(2 * t), 1.0 / math.cosh(2 * t))


def fj_coords(z: complex) -> tuple[float, float]:
    """(b, t) with z = a_b rho_t . i."""
    if z.imag <= 0:
        raise ValueError("point must lie in the upper half plane")
    b = math.log(abs(z))
    t = math.atanh(z.real / abs(z)) / 2.0
    return b, t


def fj_decompose(g) -> FJCoords:
    """Full A R K decomposition of g in SL_2(R)."""
    g = np.asarray(g, dtype=float)
    z = moebius(g, 1j)
    b, t = fj_coords(z)
    e = math.exp(b / 2)
    k = np.linalg.inv(rho_t(t)) @ np.diag([1 / e, e]) @ g
    theta = math.atan2(k[0, 1], k[0, 0])
    return FJCoords(b, t, theta)


# ---------------------------------------------------------------------------
# finite-difference Laplacians (verification surfaces)


def laplacian_polar_fd(f, z: complex, h: float = 1e-4) -> complex:
    """Invariant Laplacian via the geodesic polar form around i."""
    pc = polar_coords(z)
    t0, th0 = pc.t, pc.theta

    def F(t, th):
        return f(moebius(k_theta(th) @ a_t(t), 1j))

    ftt = (F(t0 + h, th0) - 2 * F(t0, th0) + F(t0 - h, th0)) / h**2
    ft = (F(t0 + h, th0) - F(t0 - h, th0)) / (2 * h)
    fthth = (F(t0, th0 + h) - 2 * F(t0, th0) + F(t0, th0 - h)) / h**2
    return (
        -ftt
        - math.cosh(t0) / math.sinh(t0) * ft
        - fthth / (2 * math.sinh(t0)) ** 2
    )


def laplacian_fj_fd(f, z: complex, h: float = 1e-4) -> complex:
    """Invariant Laplacian via the geodesic cartesian (A R) form."""
    b0, t0 = fj_coords(z)

    def F(b, t):
        return f(fj_point(b, t))

    ftt = (F(b0, t0 + h) - 2 * F(b0, t0) + F(b0, t0 - h)) / h**2
    ft = (F(b0, t0 + h) - F(b0, t0 - h)) / (2 * h)
    fbb = (F(b0 + h, t0) - 2 * F(b0, t0) + F(b0 - h, t0)) / h**2
    return -0.25 * (ftt + 2 * math.tanh(2 * t0) * ft + 4 * fbb / math.cosh(2 * t0) ** 2)


# ---------------------------------------------------------------------------
# expansion coefficients


def _doubling_fourier(sample, n_max: int, tol: float, max_doublings: int = 14):
    """Fourier coefficients (1/N) sum f(j/N) e(-n j / N) with N-doubling."""
    n_nodes = max(32, 4 * n_max + 4)
    prev = None
    for _ in range(max_doublings):
        vals = sample(n_nodes)
        phases = np.exp(
            -2j * np.pi * np.outer(np.arange(-n_max, n_max + 1), np.arange(n_nodes))
            / n_nodes
        )
        coeffs = phases @ vals / n_nodes
        if prev is not None and np.max(np.abs(coeffs - prev)) < tol / 4:
            return coeffs, float(np.max(np.abs(coeffs - prev)))
        prev = coeffs
        n_nodes *= 2
    raise QuadratureFailure("Fourier doubling did not stabilize")


def geodesic_taylor_coeffs(
    f, z1: complex, g=None, n_max: int = 8, t: float = 0.5, s=None, tol: float = 1e-12
) -> dict[int, complex]:
    """Angular coefficients of f on the circle of radius t around z1.

    Uses the exactly periodic trapezoid rule with node doubling.  If the
    eigenvalue parameter s is given, each coefficient is normalized by
    P^{-|n|}_{-s}(cosh t), making the result radius-independent for
    eigenfunctions.
    """
    if g is None:
        g = translation_to(z1)
    g = np.asarray(g, dtype=float)

    def sample(n_nodes):
        thetas = np.pi * np.arange(n_nodes) / n_nodes
        return np.array(
            [f(moebius(g @ k_theta(th) @ a_t(t), 1j)) for th in thetas],
            dtype=complex,
        )

    coeffs, _ = _doubling_fourier(lambda n: sample(n), n_max, tol)
    # sample uses theta in [0, pi): e^{-2 i n theta} matches e(-n j/N) nodes
    out = {}
    for idx, n in enumerate(range(-n_max, n_max + 1)):
        c = coeffs[idx]
        if s is not None:
            c = c / specfun.legendre_P(abs(n), -s, math.cosh(t)).value
        out[n] = c
    return out


def check_periodic(f, b0: float, tol: float = 1e-8) -> bool:
    for w in (1j, 0.3 + 0.9j, -0.2 + 2.1j):
        if abs(f(math.exp(b0) * w) - f(w)) > tol * (1 + abs(f(w))):
            return False
    return True


def fj_cycle_coeffs(
    f,
    b0: float,
    n: int,
    t: float,
    s=None,
    tol: float = 1e-9,
    require_periodic=True,
    n_nodes: int | None = None,
) -> dict:
    """Cycle coefficient c_{n,f}(t) and the constants of its decomposition.

    c_{n,f}(t) averages f(a_b rho_t . i) e(-n b / b0) over one period.
    gamma is the same average at t = 0; gamma' is the e^b-weighted average
    of the x-derivative of f along the axis, which is exactly the odd
    normalization constant (the e(-nb/b0)-weighted cycle integral of the
    horizontal derivative).

    With an explicit ``n_nodes`` the trapezoid sum at that node count is
    returned without adaptive doubling (useful for symmetry checks on
    functions that are not actually periodic).
    """
    if require_periodic and not check_periodic(f, b0):
        raise NotPeriodic(f"f is not b0 = {b0} periodic along the geodesic")

    def average(values_fn):
        if n_nodes is not None:
            bs = b0 * np.arange(n_nodes) / n_nodes
            return np.mean(values_fn(bs) * np.exp(-2j * np.pi * n * bs / b0))
        nn = 64
        prev = None
        for _ in range(14):
            bs = b0 * np.arange(nn) / nn
            vals = values_fn(bs)
            c = np.mean(vals * np.exp(-2j * np.pi * n * bs / b0))
            if prev is not None and abs(c - prev) < tol / 4:
                return c
            prev = c
            nn *= 2
        raise QuadratureFailure("cycle quadrature did not stabilize")

    c_t = average(lambda bs: np.array([f(fj_point(b, t)) for b in bs]))
    gamma = average(lambda bs: np.array([f(fj_point(b, 0.0)) for b in bs]))
    h = 1e-6

    def xderiv(bs):
        return np.array(
            [
                math.exp(b)
                * (f(math.exp(b) * 1j + h) - f(math.exp(b) * 1j - h))
                / (2 * h)
                for b in bs
            ]
        )

    gamma_prime = average(xderiv)
    out = {"c": c_t, "gamma": gamma, "gamma_prime": gamma_prime}
    if s is not None:
        pp, pm = specfun.p_plusminus(n, s, b0, math.tanh(2 * t))
        recon = (gamma * pp.value + gamma_prime * pm.value) / math.sqrt(
            math.cosh(2 * t)
        )
        out["decomposition"] = recon
    return out
