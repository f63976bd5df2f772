"""Special functions: Gauss hypergeometric, Legendre and Ferrers functions,
the normalized even/odd Ferrers combinations used for cycle expansions, and
the classical Whittaker function.

Every public routine returns an SFValue carrying the value and an estimate
of the absolute truncation error of the method used.  Conventions:

  * legendre_P(mu, nu, u) is P^{-mu}_nu(u) on u > 1, regular at u = 1,
    with principal branch of ((u-1)/(u+1))^{mu/2};
  * ferrers_P(mu, nu, x) is the Ferrers function P^mu_nu(x) on (-1, 1);
  * whittaker_W(lam, mu, y) decays like e^{-y/2} y^lam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma as _gamma


class PoleAtC(ValueError):
    pass


class NoConvergentRegime(ValueError):
    pass


class GammaPole(ValueError):
    pass


class DegenerateNormalization(ValueError):
    pass


class ParameterPole(ValueError):
    pass


@dataclass(frozen=True)
class SFValue:
    value: complex
    abs_error: float

    def __complex__(self):
        return complex(self.value)


_MAX_TERMS = 200_000


def _is_nonpos_int(x, tol=1e-12) -> bool:
    x = complex(x)
    return abs(x.imag) < tol and x.real < 0.5 and abs(x.real - round(x.real)) < tol


def _rgamma(z) -> complex:
    """1/Gamma with exact zeros at the poles."""
    if _is_nonpos_int(z):
        return 0.0 + 0.0j
    return 1.0 / complex(_gamma(complex(z)))


def _series_2f1(a, b, c, z, regularized: bool):
    """Sum (a)_i (b)_i / ((c)_i i!) z^i, or the 1/Gamma(c+i) variant."""
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if regularized:
        # track (a)_i (b)_i z^i / i! and multiply by 1/Gamma(c+i) per term
        poch = 1.0 + 0.0j
        total = poch * _rgamma(c)
        i = 0
        last = abs(total)
        while i < _MAX_TERMS:
            poch = poch * (a + i) * (b + i) / (i + 1) * z
            i += 1
            term = poch * _rgamma(c + i)
            total += term
            last = abs(term)
            if (a + i == 0) or (b + i == 0):
                return total, 0.0
            if last < 1e-17 * max(1.0, abs(total)) and i > 4 and not _is_nonpos_int(c + i):
                r = min(abs(z) * (1 + 10.0 / i), 0.99)
                return total, last * r / (1 - r)
        raise NoConvergentRegime(f"regularized 2F1 series stalled for z={z}")
    term = 1.0 + 0.0j
    total = term
    i = 0
    while i < _MAX_TERMS:
        if a + i == 0 or b + i == 0:
            return total, 0.0
        term = term * (a + i) * (b + i) / (c + i) / (i + 1) * z
        total += term
        i += 1
        if abs(term) < 1e-17 * max(1.0, abs(total)) and i > 4:
            r = min(abs(z) * (1 + 10.0 / i), 0.99)
            return total, abs(term) * r / (1 - r)
    raise NoConvergentRegime(f"2F1 series did not converge for z={z}")


def hyp2f1(a, b, c, z) -> SFValue:
    """Gauss hypergeometric function, series plus Pfaff transformation."""
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    terminates = _is_nonpos_int(a) or _is_nonpos_int(b)
    if _is_nonpos_int(c) and not terminates:
        raise PoleAtC(f"c = {c} is a non-positive integer")
    if abs(z) < 0.8 or terminates:
        v, e = _series_2f1(a, b, c, z, regularized=False)
        return SFValue(v, e)
    for aa, bb in ((a, b), (b, a)):
        zp = z / (z - 1)
        if abs(zp) < 0.9:
            v, e = _series_2f1(aa, c - bb, c, zp, regularized=False)
            pref = (1 - z) ** (-aa)
            return SFValue(pref * v, abs(pref) * e)
    raise NoConvergentRegime(f"no transformation tames z = {z}")


def hyp2f1_regularized(a, b, c, z) -> SFValue:
    """2F1 divided by Gamma(c); entire in c (handles non-positive integers)."""
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if abs(z) < 0.9 or _is_nonpos_int(a) or _is_nonpos_int(b):
        v, e = _series_2f1(a, b, c, z, regularized=True)
        return SFValue(v, e)
    zp = z / (z - 1)
    if abs(zp) < 0.9:
        v, e = _series_2f1(a, c - b, c, zp, regularized=True)
        pref = (1 - z) ** (-a)
        return SFValue(pref * v, abs(pref) * e)
    if abs(1 - z) < 0.5:
        return _hyp2f1_reg_near_one(a, b, c, z)
    raise NoConvergentRegime(f"no transformation tames z = {z}")


def _hyp2f1_reg_near_one(a, b, c, z) -> SFValue:
    """Connection formula at z -> 1 for the regularized function.

    Degenerates when c - a - b is an integer (log case), which the Ferrers
    parameters used here avoid.
    """
    s = c - a - b
    if _is_nonpos_int(s) or _is_nonpos_int(-s):
        raise NoConvergentRegime("integer c-a-b needs the logarithmic connection")
    w = 1 - z
    f1, e1 = _series_2f1(a, b, a + b - c + 1, w, regularized=False)
    f2, e2 = _series_2f1(c - a, c - b, s + 1, w, regularized=False)
    g1 = complex(_gamma(s)) * _rgamma(c - a) * _rgamma(c - b)
    g2 = complex(_gamma(-s)) * _rgamma(a) * _rgamma(b)
    val = g1 * f1 + g2 * w**s * f2
    err = abs(g1) * e1 + abs(g2 * w**s) * e2
    return SFValue(val, err)


# ---------------------------------------------------------------------------
# Legendre P on (1, oo)


def _legendre_series(mu, nu, u):
    """P^{-mu}_nu(u) and its u-derivative by the hypergeometric series."""
    mu, nu, u = complex(mu), complex(nu), float(u)
    z = (1 - u) / 2
    pref = ((u - 1) / (u + 1)) ** (mu / 2)
    f = hyp2f1_regularized(1 + nu, -nu, 1 + mu, z)
    val = pref * f.value
    # derivative: d pref/du = pref * mu / (u^2 - 1); dz/du = -1/2
    fp = hyp2f1_regularized(2 + nu, 1 - nu, 2 + mu, z)
    df = (1 + nu) * (-nu) * fp.value * (-0.5)
    dval = pref * (mu / (u * u - 1) * f.value + df)
    err = abs(pref) * f.abs_error
    return val, dval, err


def legendre_P(mu, nu, u, _series_cut: float = 2.0) -> SFValue:
    """P^{-mu}_nu(u) for real u > 1: series below the cut, ODE continuation above."""
    if u <= 1:
        raise ValueError("argument must exceed 1")
    if u < _series_cut:
        v, _, e = _legendre_series(mu, nu, u)
        return SFValue(v, e)
    return legendre_P_grid(mu, nu, np.array([u]))[0]


def legendre_P_grid(mu, nu, us) -> list[SFValue]:
    """P^{-mu}_nu on an array of arguments > 1 (one ODE solve for the tail)."""
    us = np.asarray(us, dtype=float)
    if np.any(us <= 1):
        raise ValueError("arguments must exceed 1")
    out: dict[int, SFValue] = {}
    big = [i for i in np.argsort(us) if us[i] >= 2.0]
    for i in range(len(us)):
        if us[i] < 2.0:
            v, _, e = _legendre_series(mu, nu, us[i])
            out[i] = SFValue(v, e)
    if big:
        u0 = 1.5
        v0, dv0, e0 = _legendre_series(mu, nu, u0)
        nu_ = complex(nu)
        mu_ = complex(mu)

        def rhs(u, y):
            phi = y[0] + 1j * y[1]
            dphi = y[2] + 1j * y[3]
            den = u * u - 1
            d2 = -2 * u / den * dphi + (nu_ * (nu_ + 1) / den + mu_ * mu_ / den**2) * phi
            return [dphi.real, dphi.imag, d2.real, d2.imag]

        targets = [float(us[i]) for i in big]
        sol = integrate.solve_ivp(
            rhs,
            (u0, max(targets)),
            [v0.real, v0.imag, dv0.real, dv0.imag],
            method="DOP853",
            rtol=1e-12,
            atol=1e-14,
            t_eval=sorted(set(targets)),
            dense_output=False,
        )
        if not sol.success:
            raise RuntimeError("Legendre ODE continuation failed: " + sol.message)
        table = {t: sol.y[0][k] + 1j * sol.y[1][k] for k, t in enumerate(sol.t)}
        for i in big:
            val = table[float(us[i])]
            out[i] = SFValue(val, e0 + 1e-11 * (1 + abs(val)))
    return [out[i] for i in range(len(us))]


# ---------------------------------------------------------------------------
# Ferrers functions on (-1, 1)


def ferrers_P(mu, nu, x) -> SFValue:
    """Ferrers function of the first kind P^mu_nu(x), -1 < x < 1."""
    v, _, e = _ferrers_series(mu, nu, x)
    return SFValue(v, e)


def _ferrers_series(mu, nu, x):
    mu, nu, x = complex(mu), complex(nu), float(x)
    if not -1 < x < 1:
        raise ValueError("Ferrers argument must lie in (-1, 1)")
    z = (1 - x) / 2
    pref = ((1 + x) / (1 - x)) ** (mu / 2)
    f = hyp2f1_regularized(nu + 1, -nu, 1 - mu, z)
    fp = hyp2f1_regularized(nu + 2, 1 - nu, 2 - mu, z)
    df = (nu + 1) * (-nu) * fp.value * (-0.5)
    val = pref * f.value
    dval = pref * (mu / (1 - x * x) * f.value + df)
    return val, dval, abs(pref) * f.abs_error


def _ferrers_pair_value(mu, nu, x):
    """S(x) = P^mu_nu(x) + P^{-mu}_nu(x) and its derivative."""
    v1, d1, e1 = _ferrers_series(mu, nu, x)
    v2, d2, e2 = _ferrers_series(-mu, nu, x)
    return v1 + v2, d1 + d2, e1 + e2


def p_plusminus(n: int, s, b0: float, x: float) -> tuple[SFValue, SFValue]:
    """The even/odd normalized Ferrers combinations (value at x in (-1,1)).

    Built from orders +-(s - 1/2) and degree -1/2 + 2 pi i n / b0; the even
    one has value 1 at 0, the odd one derivative 1 at 0.
    """
    mu = complex(s) - 0.5
    nu = -0.5 + 2j * math.pi * n / b0
    s0, d0, e0 = _ferrers_pair_value(mu, nu, 0.0)
    c_plus = 2 * s0
    c_minus = 2 * d0
    sx, dx, ex = _ferrers_pair_value(mu, nu, x)
    sm, dm, em = _ferrers_pair_value(mu, nu, -x)
    if abs(c_plus) < 1e-13:
        raise DegenerateNormalization("C+ vanishes")
    if abs(c_minus) < 1e-13:
        raise DegenerateNormalization("C- vanishes")
    plus = SFValue((sx + sm) / c_plus, (ex + em + 2 * e0) / abs(c_plus))
    minus = SFValue((sx - sm) / c_minus, (ex + em + 2 * e0) / abs(c_minus))
    return plus, minus


def p_plus_grid(n: int, s, b0: float, xs) -> np.ndarray:
    """Vectorized even combination on an array of arguments (values only)."""
    xs = np.asarray(xs, dtype=float)
    mu = complex(s) - 0.5
    nu = -0.5 + 2j * math.pi * n / b0
    s0, _, _ = _ferrers_pair_value(mu, nu, 0.0)
    c_plus = 2 * s0
    if abs(c_plus) < 1e-13:
        raise DegenerateNormalization("C+ vanishes")

    def pair(xv):
        return _series_ferrers_grid(mu, nu, xv) + _series_ferrers_grid(-mu, nu, xv)

    return (pair(xs) + pair(-xs)) / c_plus


def _series_2f1_grid(a, b, c, zs, regularized: bool) -> np.ndarray:
    """Vectorized 2F1 (or 2F1/Gamma(c)) series over an array of arguments."""
    zs = np.asarray(zs, dtype=complex)
    if regularized:
        poch = np.ones(zs.shape, dtype=complex)
        total = poch * _rgamma(c)
        i = 0
        while i < _MAX_TERMS:
            poch = poch * ((a + i) * (b + i) / (i + 1)) * zs
            i += 1
            total = total + poch * _rgamma(c + i)
            if a + i == 0 or b + i == 0:
                return total
            if (
                float(np.max(np.abs(poch))) * abs(_rgamma(c + i))
                < 1e-16 * max(1.0, float(np.max(np.abs(total))))
                and i > 4
                and not _is_nonpos_int(c + i)
            ):
                return total
        raise NoConvergentRegime("vectorized 2F1 stalled")
    term = np.ones(zs.shape, dtype=complex)
    total = term.copy()
    i = 0
    while i < _MAX_TERMS:
        if a + i == 0 or b + i == 0:
            return total
        term = term * ((a + i) * (b + i) / (c + i) / (i + 1)) * zs
        total = total + term
        i += 1
        if float(np.max(np.abs(term))) < 1e-16 * max(
            1.0, float(np.max(np.abs(total)))
        ) and i > 4:
            return total
    raise NoConvergentRegime("vectorized 2F1 stalled")


def _series_ferrers_grid(mu, nu, xs) -> np.ndarray:
    """Ferrers P^mu_nu on an array; connection formula near x = -1."""
    xs = np.asarray(xs, dtype=float)
    out = np.empty(xs.shape, dtype=complex)
    z = (1 - xs) / 2
    pref = (((1 + xs) / (1 - xs)).astype(complex)) ** (mu / 2)
    a, b, c = nu + 1, -nu, 1 - mu
    near = z > 0.9
    if np.any(~near):
        out[~near] = pref[~near] * _series_2f1_grid(a, b, c, z[~near], True)
    if np.any(near):
        s = c - a - b
        if _is_nonpos_int(s) or _is_nonpos_int(-s):
            raise NoConvergentRegime("integer order needs the logarithmic connection")
        w = 1 - z[near]
        f1 = _series_2f1_grid(a, b, a + b - c + 1, w, False)
        f2 = _series_2f1_grid(c - a, c - b, s + 1, w, False)
        g1 = complex(_gamma(s)) * _rgamma(c - a) * _rgamma(c - b)
        g2 = complex(_gamma(-s)) * _rgamma(a) * _rgamma(b)
        out[near] = pref[near] * (g1 * f1 + g2 * w.astype(complex) ** s * f2)
    return out


# ---------------------------------------------------------------------------
# classical Whittaker function


def whittaker_W(lam, mu, y) -> SFValue:
    """W_{lam,mu}(y) for y > 0, normalized by e^{-y/2} y^lam at infinity.

    Uses the second-kind confluent integral representation; the order sign
    is chosen by evenness in mu so that the integral converges.  Falls back
    to the optimally truncated asymptotic series for large y.
    """
    lam, mu, y = complex(lam), complex(mu), float(y)
    if y <= 0:
        raise ValueError("argument must be positive")
    if y > 30:
        return _whittaker_asymptotic(lam, mu, y)
    for m in (mu, -mu):
        a = m - lam + 0.5
        if a.real > 1e-9:
            return _whittaker_integral(lam, m, y)
        if abs(a) < 1e-12:
            # U(0, ., y) = 1
            return SFValue(math.exp(-y / 2) * y ** (m + 0.5), 1e-15 * y ** (m.real + 0.5))
    raise ParameterPole(f"no convergent representation for lam={lam}, mu={mu}")


def _whittaker_integral(lam, mu, y) -> SFValue:
    # W = e^{-y/2} y^lam / Gamma(a) * Int_0^oo e^{-t} t^{a-1} (1+t/y)^{b} dt,
    # a = mu - lam + 1/2, b = mu + lam - 1/2
    a = mu - lam + 0.5
    b = mu + lam - 0.5
    kappa = max(1, math.ceil(1.6 / a.real))
    cut = 50.0 ** (1.0 / kappa)

    def integrand(u, part):
        t = u**kappa
        val = np.exp(-t) * t ** (a - 1) * (1 + t / y) ** b * kappa * u ** (kappa - 1)
        return val.real if part == 0 else val.imag

    re, re_err = integrate.quad(integrand, 0, cut, args=(0,), limit=200, epsabs=1e-14)
    im, im_err = integrate.quad(integrand, 0, cut, args=(1,), limit=200, epsabs=1e-14)
    tail = math.exp(-50.0) * (1 + 50.0 / y) ** abs(b.real) * 2
    pref = math.exp(-y / 2) * y**lam / _gamma(a)
    val = pref * (re + 1j * im)
    err = abs(pref) * (re_err + im_err + tail)
    return SFValue(val, err)


def _whittaker_asymptotic(lam, mu, y) -> SFValue:
    # e^{-y/2} y^lam sum_k (1/2+mu-lam)_k (1/2-mu-lam)_k / (k! (-y)^k)
    term = 1.0 + 0.0j
    total = term
    best = abs(term)
    k = 0
    while k < 300:
        factor = (0.5 + mu - lam + k) * (0.5 - mu - lam + k) / ((k + 1) * (-y))
        nxt = term * factor
        if abs(nxt) > abs(term):
            break
        term = nxt
        total += term
        best = abs(term)
        k += 1
        if best < 1e-17 * abs(total):
            break
    pref = math.exp(-y / 2) * y**lam
    return SFValue(pref * total, abs(pref) * best)


def gamma(z) -> complex:
    """Complex Gamma (scipy backend, ~1e-14 relative accuracy)."""
    if _is_nonpos_int(z):
        raise GammaPole(f"Gamma pole at {z}")
    g = complex(_gamma(complex(z)))
    if not (np.isfinite(g.real) and np.isfinite(g.imag)):
        raise GammaPole(f"Gamma pole at {z}")
    return g
