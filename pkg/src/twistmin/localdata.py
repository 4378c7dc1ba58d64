"""Local factors of the trace formulas, one prime at a time.

Every function takes a local character at p (a PrimeLocalChar, a
LocalCharBatch, or a LocalContext wrapping either) and reads p, e, s and
character values from it.  Tables without character dependence return exact
Fractions; anything that evaluates the character returns complex (or a
complex array for a batch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._arith import factor, ord_p, sqrt_mod, totient
from .chars import DirichletChar, is_minimal_local
from .quadfield import Discriminant, kronecker, split_fundamental

__all__ = [
    "LocalContext",
    "HtnContext",
    "bigM",
    "mu_const",
    "phi_mn",
    "psi_parabolic",
    "H_tn",
    "S_p",
    "S_p_unramified",
    "psi1",
    "psi2",
    "psi3",
    "psi4",
    "psi5",
    "psi6",
    "psi7",
    "B_p",
    "psi_k",
    "psi2_char",
    "tilde_psi2",
    "omega_1",
    "omega_2",
    "eps_N",
    "I_chi",
    "I_q4",
    "phi_pm",
    "phi_pm_char",
    "global_product",
]


@dataclass(frozen=True)
class LocalContext:
    p: int
    e: int
    s: int
    chi_p: object

    @classmethod
    def of(cls, chi) -> "LocalContext":
        if isinstance(chi, LocalContext):
            return chi
        return cls(chi.p, chi.e, chi.s, chi)

    def __post_init__(self):
        if not 0 <= self.s <= self.e:
            raise ValueError("need 0 <= s <= e")


def _chi(x):
    return x.chi_p if isinstance(x, LocalContext) else x


def _gcd2(p: int, e: int) -> int:
    return math.gcd(math.gcd(2, p - 1), e)


def _pow(p: int, k: int) -> Fraction:
    return Fraction(p) ** k


# identity, constant and parabolic terms ---------------------------------------

def bigM(chi) -> Fraction:
    c = _chi(chi)
    p, e, s = c.p, c.e, c.s
    if e == 0:
        return Fraction(1)
    if s == e:
        return _pow(p, e - 1) * (p + 1)
    if e <= 2:
        par = c.parity()
        if np.ndim(par):
            raise ValueError("bigM at s < e <= 2 needs a single character")
        return Fraction(p - par, _gcd2(p, e)) * totient(p ** (e - 1))
    return Fraction(p * p - 1, _gcd2(p, e)) * totient(p ** (e - 2))


def mu_const(chi) -> int:
    c = _chi(chi)
    return -1 if c.s < c.e == 1 else 0


def phi_mn(chi, m: int, n: int):
    c = _chi(chi)
    p, e, s = c.p, c.e, c.s
    if s == e:
        return np.conj(c(m)) + c(n) * c(m)
    if s < e == 1:
        pk = factor(m)
        if len(pk) == 1 and pk[0][0] == p:
            return -1.0 + 0j
    return 0j


def psi_parabolic(chi, n: int):
    c = _chi(chi)
    p, e, s = c.p, c.e, c.s
    if s == e or n == e == 1:
        return 1 + c(n)
    if n == 1:
        if s < e == 2:
            return Fraction(p - c.parity(), _gcd2(p, e))
        if e > max(s, 2):
            k = e - 3
            return Fraction(p ** (k // 2) + p ** (-(-k // 2)), _gcd2(p, e)) * (p - 1)
        return Fraction(0)
    if p == 2 and s < e == 1:
        return Fraction(3, 2)
    if p == 2 and s < e and e in (2, 3):
        return Fraction(1, 2)
    if p > 2 and s < e == 1:
        return Fraction(1)
    return Fraction(0)


# elliptic and hyperbolic local factors ------------------------------------------

@dataclass(frozen=True)
class HtnContext:
    p: int
    t: int
    n: int
    disc: Discriminant
    r: int
    f: int
    g_ord: int
    alpha: Fraction
    psi_d_p: int

    @classmethod
    def build(cls, p: int, t: int, n: int) -> "HtnContext":
        D = t * t - 4 * n
        if D >= 0 and math.isqrt(D) ** 2 == D:
            raise ValueError(f"t^2 - 4n = {D} is a square")
        disc = split_fundamental(D)
        g = ord_p(D, p)
        r = g + 1 if p > 2 else g
        f = ord_p(disc.ell, p)
        k = kronecker(disc.d, p)
        alpha = Fraction(k - 1) / S_p_unramified(p, t, n)
        return cls(p, t, n, disc, r, f, g, alpha, k)

    def omega(self, s: int) -> int:
        return int(self.t % 2 == 1 or (self.p == 2 and self.r == 2 * s))


def S_p_unramified(p: int, t: int, n: int) -> Fraction:
    """1 + (p - (d/p)) (p^f - 1)/(p - 1): the local factor when p does not divide N."""
    disc = split_fundamental(t * t - 4 * n)
    f = ord_p(disc.ell, p)
    return 1 + Fraction((p - kronecker(disc.d, p)) * (p**f - 1), p - 1)


def _half(p: int, e: int, x: int) -> int:
    m = p**e
    if p == 2:
        if x % 2:
            raise ValueError("odd argument halved at p = 2")
        return (x // 2) % m
    return x * pow(2, -1, m) % m


def _sqrt_pair(c, t: int, disc: Discriminant):
    """chi((t + sqrt(d) l)/2) + chi((t - sqrt(d) l)/2), sqrt(d) taken mod 4p^e."""
    p, e = c.p, c.e
    rt = sqrt_mod(disc.d, 4 * p**e)
    if rt is None:
        raise ValueError("d is not a square mod 4p^e")
    m = p**e
    return c.prim(((t + rt * disc.ell) // 2) % m) + c.prim(((t - rt * disc.ell) // 2) % m)


def _require_minimal(c) -> None:
    orders = c.orders() if hasattr(c, "orders") else np.array([c.order])
    if not all(is_minimal_local(c.p, c.e, c.s, int(o)) for o in np.atleast_1d(orders)):
        raise ValueError(f"character at p={c.p} is not minimal")


def H_tn(chi, t: int, n: int):
    """Local elliptic/hyperbolic weight of the twist-minimal formula."""
    c = _chi(chi)
    p, e, s = c.p, c.e, c.s
    _require_minimal(c)
    h = HtnContext.build(p, t, n)
    r, alpha, w = h.r, h.alpha, h.omega(s)
    if e == 0:
        return 1 + 0j
    if s == e:
        if r >= 2 * e:
            coef = 2 + alpha * Fraction(p**e + p ** (e - 1) - 2, p - 1)
            return float(coef) * c.prim(_half(p, e, t + p**s * w))
        if h.psi_d_p == 1:
            return _sqrt_pair(c, t, h.disc)
        return 0 * c(1)
    if p > 2:
        if not (e == 1 or kronecker(n, p) == 1) or r < e - 1:
            return 0 * c(1)
        inner = p * (p - (e == 2) * c.parity() - (r == e - 1) * (p + (e % 2 == 0))) - (e > 2)
        coef = alpha / _gcd2(p, e) * _pow(p, e - 3)
        return float(coef) * inner * c.prim(_half(p, e, t + p**s * w))
    if e >= 3 and r > e:
        k = 3
    elif e >= 3 and r == e:
        k = 1 + 2 * (-1) ** e
    elif e >= 3 and r == e - 1 and e % 2:
        k = 1 - 2 * (-1) ** h.disc.d
    elif e == 2:
        k = 2 if r >= e else -1
    elif e == 1:
        k = 4
    else:
        k = 0
    if k == 0 or alpha == 0:
        return 0 * c(1)
    shift = 2 ** (r // 2) * w if w else 0
    return float(alpha * _pow(2, e - 3) * k) * c.prim(_half(p, e, t + shift))


def S_p(chi, t: int, n: int):
    """Closed form of the local orbital sum at p | N (e >= 1)."""
    c = _chi(chi)
    p, e, s = c.p, c.e, c.s
    if e < 1:
        raise ValueError("S_p needs e >= 1; use S_p_unramified")
    h = HtnContext.build(p, t, n)
    d, f, g = h.disc.d, h.f, h.g_ord
    hh = max(2 * s - 1, e)
    zero = 0 * c(1)
    cross = zero
    if g <= hh - 1 and h.psi_d_p == 1:
        cross = float(_pow(p, f + min(e - s, f))) * _sqrt_pair(c, t, h.disc)
    if p > 2:
        main = zero
        if g >= hh > 0:
            a = _pow(p, f - (hh - 1) // 2) + _pow(p, f - hh // 2)
            coef = _pow(p, e - 1) * a + (1 - h.psi_d_p) * _pow(p, e - 1) / (p - 1) * (a - p - 1)
            main = float(coef) * c.prim(_half(p, e, t + p**s * (t % 2)))
        return main + cross
    if t % 2:
        return zero
    dodd = d % 2
    if (g >= hh + 1 and g % 2) or (g >= max(hh, 2 * s + 2) and g % 2 == 0):
        coef = Fraction(0)
        if dodd:
            coef += _pow(2, e - 1) * (_pow(2, g // 2 - (hh - 1) // 2) + _pow(2, g // 2 - hh // 2))
        coef += (1 - h.psi_d_p) * _pow(2, e - 1) * (
            _pow(2, g // 2 - (hh - 1) // 2) + _pow(2, g // 2 - hh // 2) - 3)
    elif g == 2 * s >= e + 1:
        coef = -dodd * _pow(2, e + 1) - (1 - h.psi_d_p) * _pow(2, e - 1)
    elif g == 2 * s == e and dodd:
        coef = -3 * _pow(2, e - 1)
    else:
        coef = Fraction(0)
    main = float(coef) * c.prim(_half(2, e, t)) if coef else zero
    return main + cross


# Eisenstein and cusp local tables -----------------------------------------------

def psi1(p: int, e: int, s: int) -> Fraction:
    if e == 0:
        return Fraction(1)
    if e < 2 * s:
        return 2 * _pow(p, e - s)
    return _pow(p, e // 2) + _pow(p, (e - 1) // 2)


def psi2(p: int, e: int, s: int) -> Fraction:
    if e == 0:
        return Fraction(1)
    if p > 2:
        if s == 0:
            return Fraction(2 * e)
        if e >= 2 * s:
            return Fraction(2 * (e - 2 * s + 1))
        return Fraction(0)
    if s == 0:
        if e <= 2:
            return Fraction(e + 1)
        if e <= 4:
            return Fraction(2 * (e - 1))
        return Fraction(4 * (e - 3))
    if e >= 2 * s + 1 and s >= 3:
        return Fraction(4 * (e - 2 * s - 1))
    return Fraction(0)


def psi3(p: int, e: int, s: int) -> Fraction:
    if e == 0:
        return Fraction(0)
    if e < 2 * s:
        return _pow(p, e - s) * (4 * s - 1)
    out = psi1(p, e, s) * (e - Fraction(1, p - 1)) + Fraction(2, p - 1)
    if s > 0:
        out += _pow(p, s - 1) + 2 * (_pow(p, s - 1) - 1) / (p - 1)
    return out


def psi4(p: int, e: int, s: int) -> Fraction:
    return _pow(p, e - s) * max(2 * s - e - 1, 0)


def psi5(p: int, e: int, s: int) -> Fraction:
    return ((psi1(p, e, s) - 2) / (p - 1)
            + max(-(-e // 2), s) * _pow(p, min(e // 2, e - s))
            + max(-(-(e + 1) // 2), s) * _pow(p, min((e - 1) // 2, e - s)))


def B_p(p: int, x: int) -> Fraction:
    if x < 0:
        return Fraction(0)
    return x * _pow(p, x) - 2 * Fraction(p**x - 1, p - 1)


def psi6(p: int, e: int, s: int) -> Fraction:
    if e < 2 * s:
        return B_p(p, e - s) + s * _pow(p, e - s)
    return B_p(p, e // 2) + B_p(p, (e - 1) // 2) - B_p(p, s - 1) + s * _pow(p, s - 1)


def psi7(p: int, e: int, s: int) -> Fraction:
    if p > 2:
        return Fraction(-e + 1 if s == 0 else -e + 2 * s)
    if s == 0 and e >= 3:
        return Fraction(-e + 3)
    if e > s >= 2:
        return Fraction(-e + 2 * s + 1)
    if e == s >= 2:
        return Fraction(e)
    return Fraction(0)


_PSI = {1: psi1, 2: psi2, 3: psi3, 4: psi4, 5: psi5, 6: psi6, 7: psi7}


def psi_k(k: int, chi) -> Fraction:
    c = _chi(chi)
    return _PSI[k](c.p, c.e, c.s)


def psi2_char(chi):
    """Psi_2 weighted by the local parity: (chi(-1) + 1)/2 * Psi_2(p^e, p^s)."""
    c = _chi(chi)
    return (c(-1) + 1) / 2 * float(psi2(c.p, c.e, c.s))


def tilde_psi2(chi):
    c = _chi(chi)
    p, e, s = c.p, c.e, c.s
    one = c(1)
    if e == 0:
        return one
    if p == 2 and s == 0:
        return min(e + 1, 4) * one
    if p % 4 == 3 and s == 0:
        return 2 * one
    if p % 4 == 1:
        # a genuine root of -1 in Z_p, so the value does not depend on the lift
        i = sqrt_mod(-1, p**e)
        even = np.asarray(c.parity()) == 1
        return np.where(even, c(i) * float(psi2(p, e, s)), 0 * one)[()]
    return 0 * one


def omega_1(N: int, q: int) -> Fraction:
    e2, s2 = ord_p(N, 2), ord_p(q, 2)
    if e2 <= 1 or s2 == e2:
        return Fraction(1)
    if e2 == 2:
        return Fraction(3, 2)
    return Fraction(2)


def omega_2(N: int, q: int) -> Fraction:
    e2, s2 = ord_p(N, 2), ord_p(q, 2)
    if e2 <= 2:
        return Fraction(1, 2) - Fraction(3, 4) * e2
    if s2 == 0:
        return Fraction(-2)
    if e2 > s2 >= 3:
        return Fraction(-2 * s2)
    if e2 == s2 >= 3:
        return Fraction(-e2)
    # s2 in {1, 2} below e2 is not covered by the table; no even character lands here
    raise ValueError(f"Omega_2 undefined for e2={e2}, s2={s2}")


def eps_N(N: int) -> Fraction:
    k = ord_p(N, 2)
    return Fraction(1) if k == 0 else Fraction(1, 2) if k == 1 else Fraction(0)


def I_chi(chi: DirichletChar) -> int:
    return int(all(c.parity() == 1 for c in chi.locals if c.p > 2))


def I_q4(q: int) -> int:
    return int(all(p % 4 == 1 for p, _ in factor(q)))


def phi_pm(p: int, e: int, s: int, m: int, sign: int) -> Fraction:
    """Psi_1(p^e, p^w) with w = max(s, e - ord_p(sign m^2 - 1))."""
    v = ord_p(sign * m * m - 1, p)
    w = max(s, e - min(v, e))
    return psi1(p, e, w)


def phi_pm_char(chi, m: int, sign: int):
    """The character-weighted local factor used by the sieve.

    1 when s = 0 and p | m; otherwise (conj chi(m) + chi(sign m))/2 * Phi_sign.
    """
    c = _chi(chi)
    if c.s == 0 and m % c.p == 0:
        return 1 + 0 * c(1)
    return (np.conj(c(m)) + c(sign * m)) / 2 * float(phi_pm(c.p, c.e, c.s, m, sign))


def global_product(fn, chi: DirichletChar, *args):
    out = 1
    for c in chi.locals:
        out = out * fn(c, *args)
    return out
