"""Numerical archimedean Whittaker functions and orbital integrals.

The four kinds evaluated here are indexed by the signature of the moment
matrix: definite pairs (kind "pp", an angular character index n), pairs
with a hyperbolic character along a closed geodesic (kind "pm", a
character index n and period b0), and the two rank-one kinds ("m0", "p0")
given in closed form by the classical Whittaker function.

All exponential weights are computed from first principles as traces of
projected moment matrices against v; no use is made of any expanded
closed form for those traces (they serve only as cross-checks in the
tests, where one of them is known to be garbled).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .hyperbolic import E1, E2, E3, QuadratureFailure


class NonDecaying(ValueError):
    pass


@dataclass(frozen=True)
class PosDefMatrix2:
    v1: float
    v2: float
    v12: float = 0.0

    def __post_init__(self):
        if self.v1 <= 0 or self.det <= 0:
            raise ValueError("matrix must be positive definite")

    @property
    def det(self) -> float:
        return self.v1 * self.v2 - self.v12 * self.v12

    @property
    def trace(self) -> float:
        return self.v1 + self.v2

    def array(self) -> np.ndarray:
        return np.array([[self.v1, self.v12], [self.v12, self.v2]])

    @staticmethod
    def from_array(a) -> "PosDefMatrix2":
        a = np.asarray(a, dtype=float)
        return PosDefMatrix2(float(a[0, 0]), float(a[1, 1]), float(a[0, 1]))

    def eig_min(self) -> float:
        return float(np.linalg.eigvalsh(self.array()).min())

    def conjugated(self, B) -> "PosDefMatrix2":
        B = np.asarray(B, dtype=float)
        return PosDefMatrix2.from_array(B @ self.array() @ B.T)


@dataclass(frozen=True)
class WhittakerEval:
    value: complex
    abs_error: float
    kind: str
    params: dict


def _as_v(v) -> PosDefMatrix2:
    if isinstance(v, PosDefMatrix2):
        return v
    return PosDefMatrix2.from_array(np.asarray(v, dtype=float))


# ---------------------------------------------------------------------------
# projections of vector tuples against a point of the plane


def _negline_unit(z) -> np.ndarray:
    """Generator of the negative line of z with Q = -1 (vectorized in z)."""
    x, y = np.real(z), np.imag(z)
    out = np.empty(np.shape(z) + (2, 2))
    out[..., 0, 0] = -x / y
    out[..., 0, 1] = (x * x + y * y) / y
    out[..., 1, 0] = -1.0 / y
    out[..., 1, 1] = x / y
    return out


def _pair_inner(a, b) -> np.ndarray:
    """tr(a b) for stacked 2x2 matrices."""
    return np.einsum("...ij,...ji->...", a, b)


def projected_moment(xs, z) -> np.ndarray:
    """Moment matrix Q((x_i)_{z perp}) of a tuple of trace-zero vectors.

    Q_perp[i,j] = (x_i, x_j)/2 + (x_i, w)(x_j, w)/4 with w the unit-norm
    generator of the negative line of z.  Broadcasts over a grid of z.
    """
    w = _negline_unit(z)
    r = len(xs)
    shape = np.shape(z)
    out = np.empty(shape + (r, r))
    inners = [[_pair_inner(np.asarray(xi, float), np.asarray(xj, float)) for xj in xs] for xi in xs]
    wdots = [_pair_inner(np.broadcast_to(np.asarray(xi, float), shape + (2, 2)), w) for xi in xs]
    for i in range(r):
        for j in range(r):
            out[..., i, j] = inners[i][j] / 2.0 + wdots[i] * wdots[j] / 4.0
    return out


def upsilon(t, alpha, v) -> np.ndarray:
    """tr(Q((a_t^{-1} k_alpha^{-1} e)_{z0 perp}) v) computed directly.

    e = (e1, e2); the group acts by conjugation.  Vectorized over grids of
    t and alpha (broadcast together).
    """
    v = _as_v(v).array()
    t = np.asarray(t, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    t, alpha = np.broadcast_arrays(t, alpha)
    ca, sa = np.cos(alpha), np.sin(alpha)
    eh = np.exp(t / 2.0)
    # g = k_alpha a_t; y_i = g^{-1} e_i g
    g = np.empty(t.shape + (2, 2))
    g[..., 0, 0] = ca * eh
    g[..., 0, 1] = sa / eh
    g[..., 1, 0] = -sa * eh
    g[..., 1, 1] = ca / eh
    ginv = np.empty_like(g)
    ginv[..., 0, 0] = g[..., 1, 1]
    ginv[..., 0, 1] = -g[..., 0, 1]
    ginv[..., 1, 0] = -g[..., 1, 0]
    ginv[..., 1, 1] = g[..., 0, 0]
    y1 = ginv @ (E1 @ g)
    y2 = ginv @ (E2 @ g)
    # projection onto z0-perp removes the e3 component; (e3, e3) = -2
    d1 = _pair_inner(y1, E3[None, ...] if t.ndim else E3)
    d2 = _pair_inner(y2, E3[None, ...] if t.ndim else E3)
    q11 = _pair_inner(y1, y1) / 2.0 + d1 * d1 / 4.0
    q22 = _pair_inner(y2, y2) / 2.0 + d2 * d2 / 4.0
    q12 = _pair_inner(y1, y2) / 2.0 + d1 * d2 / 4.0
    return q11 * v[0, 0] + q22 * v[1, 1] + 2.0 * q12 * v[0, 1]


# ---------------------------------------------------------------------------
# definite kind


def _gl_nodes(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (a + b) / 2 + (b - a) / 2 * x, (b - a) / 2 * w


def W_pp(n: int, v, s, tol: float = 1e-8) -> WhittakerEval:
    """Whittaker value of definite kind and character index n.

    2 (det v)^{1/2} e^{2 pi tr v} Int_{t>0} Int_0^pi sinh(t)
    P^{-|2n|}_{-s}(cosh t) e^{-4 i n a} e^{-4 pi Upsilon(t, a, v)} da dt.
    """
    v = _as_v(v)
    lam = v.eig_min()
    K = 40.0 + abs(math.log(tol))
    u_max = math.sqrt(max(2.0, K / (4 * math.pi * lam) - 1.0))
    t_max = math.acosh(max(1.5, u_max))
    pref = 2.0 * math.sqrt(v.det) * math.exp(2 * math.pi * v.trace)

    def evaluate(n_t, n_a):
        ts, wt = _gl_nodes(1e-12, t_max, n_t)
        alphas = math.pi * np.arange(n_a) / n_a
        wa = math.pi / n_a
        pvals = np.array(
            [x.value for x in specfun.legendre_P_grid(abs(2 * n), -s, np.cosh(ts))],
            dtype=complex,
        )
        tt, aa = np.meshgrid(ts, alphas, indexing="ij")
        ups = upsilon(tt, aa, v)
        phase = np.exp(-4j * n * alphas)[None, :]
        integ = (
            np.sinh(ts)[:, None]
            * pvals[:, None]
            * phase
            * np.exp(-4 * math.pi * ups)
        )
        return pref * float(wa) * np.einsum("t,ta->", wt, integ.real) + 1j * pref * float(
            wa
        ) * np.einsum("t,ta->", wt, integ.imag)

    n_t, n_a = 48, 32
    prev = evaluate(n_t, n_a)
    for _ in range(6):
        n_t, n_a = int(n_t * 1.6), n_a * 2
        cur = evaluate(n_t, n_a)
        change = abs(cur - prev)
        if change < tol / 2:
            c = 4 * math.pi * lam
            u = math.cosh(t_max)
            pmax = 10.0 * (1 + abs(prev))
            tail = pref * math.pi * pmax * math.exp(-c * (1 + u * u)) / (2 * c * u)
            return WhittakerEval(cur, change + tail, "pp", {"n": n, "s": s})
        prev = cur
    raise QuadratureFailure(f"definite-kind quadrature stalled at {n_t}x{n_a} nodes")


def W_pp_B(B, n: int, v, s, tol: float = 1e-8) -> WhittakerEval:
    """Index-T version: det(B)^{-1} of the 1-index value at B v B^t."""
    B = np.asarray(B, dtype=float)
    base = W_pp(n, _as_v(v).conjugated(B), s, tol)
    det = float(np.linalg.det(B))
    return WhittakerEval(base.value / det, base.abs_error / abs(det), "pp", {"n": n, "s": s})


# ---------------------------------------------------------------------------
# hyperbolic (indefinite) kind


def _trace_pm(v, ts, cs) -> np.ndarray:
    """tr(Q(e_{(a_c rho_t . i) perp}) v) for e = (e2, e3), by projection."""
    v = _as_v(v).array()
    tt, cc = np.meshgrid(ts, cs, indexing="ij")
    z = np.exp(cc) * (np.tanh(2 * tt) + 1j / np.cosh(2 * tt))
    q = projected_moment((E2, E3), z)
    return q[..., 0, 0] * v[0, 0] + q[..., 1, 1] * v[1, 1] + 2 * q[..., 0, 1] * v[0, 1]


def W_pm(n: int, b0: float, v, s, B=None, tol: float = 1e-6) -> WhittakerEval:
    """Whittaker value of mixed kind: hyperbolic character of period b0.

    Integrates exp(-4 pi tr(Q(e_{z perp}) v)) e(-nc/b0) P+_{n,s}(tanh 2t)
    2 cosh(2t)^{1/2} over (t, c), z = a_c rho_t . i, e = (e2, e3).  The
    integrand is even in t.
    """
    v0 = _as_v(v)
    if B is not None:
        B = np.asarray(B, dtype=float)
        inner = W_pm(n, b0, v0.conjugated(B), s, None, tol)
        det = float(np.linalg.det(B))
        return WhittakerEval(
            inner.value / det, inner.abs_error / abs(det), "pm",
            {"n": n, "s": s, "b0": b0},
        )
    lam = v0.eig_min()
    K = 50.0 + abs(math.log(tol))
    arg = max(2.0, K / (4 * math.pi * lam))
    t_max = 0.5 * math.acosh(math.sqrt(arg))
    c_max = 0.5 * math.acosh(arg)

    def evaluate(n_t, n_c):
        ts, wt = _gl_nodes(0.0, t_max, n_t)
        cs, wc = _gl_nodes(-c_max, c_max, n_c)
        tr = _trace_pm(v0, ts, cs)
        pvals = specfun.p_plus_grid(n, s, b0, np.tanh(2 * ts))
        phase = np.exp(-2j * math.pi * n * cs / b0)
        integ = (
            np.exp(-4 * math.pi * tr)
            * pvals[:, None]
            * phase[None, :]
            * (2.0 * np.sqrt(np.cosh(2 * ts)))[:, None]
        )
        # factor 2 restores the t < 0 half by evenness
        return 2.0 * np.einsum("t,c,tc->", wt, wc, integ)

    n_t, n_c = 48, 64
    prev = evaluate(n_t, n_c)
    for _ in range(6):
        n_t, n_c = int(n_t * 1.6), int(n_c * 1.6)
        cur = evaluate(n_t, n_c)
        change = abs(cur - prev)
        if change < tol / 2:
            tail = math.exp(-K + 40.0) * (1.0 + abs(cur))
            return WhittakerEval(
                cur, change + tail, "pm", {"n": n, "s": s, "b0": b0}
            )
        prev = cur
    raise QuadratureFailure("mixed-kind quadrature stalled")


# ---------------------------------------------------------------------------
# rank-one kinds (closed forms)


def W_m0(v, s) -> WhittakerEval:
    """det(v)^{1/2} (4 v1)^{-3/4} pi^{1/4} W_{-1/4, 1/4 - s/2}(4 pi v1)."""
    v = _as_v(v)
    w = specfun.whittaker_W(-0.25, 0.25 - complex(s) / 2, 4 * math.pi * v.v1)
    c = math.sqrt(v.det) * (4 * v.v1) ** (-0.75) * math.pi**0.25
    return WhittakerEval(c * w.value, abs(c) * w.abs_error, "m0", {"s": s})


def W_p0(v, s) -> WhittakerEval:
    """det(v)^{1/2} v1^{-3/4} (4 pi)^{-1/4} W_{1/4, 1/4 - s/2}(4 pi v1)."""
    v = _as_v(v)
    w = specfun.whittaker_W(0.25, 0.25 - complex(s) / 2, 4 * math.pi * v.v1)
    c = math.sqrt(v.det) * v.v1 ** (-0.75) * (4 * math.pi) ** (-0.25)
    return WhittakerEval(c * w.value, abs(c) * w.abs_error, "p0", {"s": s})


def rank_one_factor(T) -> tuple[np.ndarray, int]:
    """B with T = B^t diag(sign, 0) B for a rank-one symmetric T."""
    T = np.asarray(T, dtype=float)
    vals, vecs = np.linalg.eigh(T)
    idx = int(np.argmax(np.abs(vals)))
    lam = vals[idx]
    if abs(lam) < 1e-14 or abs(vals[1 - idx]) > 1e-10 * abs(lam):
        raise ValueError("matrix is not of rank one")
    sign = 1 if lam > 0 else -1
    q = vecs[:, idx]
    qperp = np.array([-q[1], q[0]])
    B = np.vstack([math.sqrt(abs(lam)) * q, qperp])
    return B, sign


def W_rank_one_T(T, v, s) -> WhittakerEval:
    """Index-T value for singular T of rank one, via any factorization."""
    B, sign = rank_one_factor(T)
    v = _as_v(v)
    det = float(np.linalg.det(B))
    base = (W_p0 if sign > 0 else W_m0)(v.conjugated(B), s)
    return WhittakerEval(base.value / det, base.abs_error / abs(det), base.kind, {"s": s})


# ---------------------------------------------------------------------------
# orbital integrals


def orbital_integral(x, v, f=None, tol: float = 1e-8, t_start: float = 2.0):
    """Int f(z) exp(-4 pi tr(Q(x_{z perp}) v)) dmu(z) over the plane.

    x is a tuple of one or two trace-zero 2x2 matrices (a pair may have a
    zero second member).  f is a numpy-vectorized callback on complex z
    (None means the constant 1).  Geodesic polar coordinates around i,
    Gauss-Legendre in t, trapezoid in the angle, with node doubling.
    Raises NonDecaying when the exponent fails to grow along the rays.
    """
    v = _as_v(v)
    xs = [np.asarray(m, dtype=float) for m in (x if isinstance(x, (tuple, list)) else (x,))]
    K = 40.0 + abs(math.log(tol))

    def exponent(ts, alphas):
        tt, aa = np.meshgrid(ts, alphas, indexing="ij")
        z = _polar_points(tt, aa)
        q = projected_moment(xs, z)
        va = v.array()[: len(xs), : len(xs)]
        return 4 * math.pi * np.einsum("...ij,ji->...", q, va)

    t_max = t_start
    probe = np.linspace(0, math.pi, 37)
    for _ in range(40):
        emin = float(exponent(np.array([t_max]), probe).min())
        if emin >= K:
            break
        t_max *= 1.3
        if t_max > 60:
            raise NonDecaying("Gaussian exponent does not dominate the area growth")

    def evaluate(n_t, n_a):
        ts, wt = _gl_nodes(1e-12, t_max, n_t)
        alphas = math.pi * np.arange(n_a) / n_a
        wa = math.pi / n_a
        ex = exponent(ts, alphas)
        vals = np.exp(-ex)
        if f is not None:
            tt, aa = np.meshgrid(ts, alphas, indexing="ij")
            vals = vals * np.asarray(f(_polar_points(tt, aa)), dtype=complex)
        return 2.0 * wa * np.einsum("t,ta->", wt * np.sinh(ts), vals)

    n_t, n_a = 64, 32
    prev = evaluate(n_t, n_a)
    for _ in range(6):
        n_t, n_a = int(n_t * 1.6), n_a * 2
        cur = evaluate(n_t, n_a)
        change = abs(cur - prev)
        if change < tol / 2:
            return cur, change + math.exp(-K + 38.0) * (1 + abs(cur))
        prev = cur
    raise QuadratureFailure("orbital integral quadrature stalled")


def _polar_points(tt, aa) -> np.ndarray:
    """z = k_alpha a_t . i on a grid."""
    ca, sa = np.cos(aa), np.sin(aa)
    et = np.exp(tt)
    num = ca * et * 1j + sa
    den = -sa * et * 1j + ca
    return num / den
