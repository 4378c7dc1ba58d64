"""Brute-force solution sets of x^2 - t x + n = 0 mod p^a and the direct S_p sum.

Nothing here uses the closed forms; it is the ground truth they are tested
against.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._arith import ord_p, sqrt_mod
from .quadfield import kronecker, split_fundamental

__all__ = [
    "OmegaSet",
    "omega_enumerate",
    "omega_reduced",
    "omega_param",
    "omega_closedform_check",
    "S_p_direct",
    "S_p_direct_weights",
]


@dataclass(frozen=True)
class OmegaSet:
    p: int
    alpha: int
    n: int
    t: int
    representatives: tuple[int, ...]

    def __len__(self):
        return len(self.representatives)

    def __iter__(self):
        return iter(self.representatives)


def _solve(p: int, alpha: int, n: int, t: int) -> np.ndarray:
    # Every solution mod p^(k+1) reduces to one mod p^k, so lifting the
    # solutions level by level scans every candidate that could qualify.
    dtype = np.int64 if p ** alpha < 3 * 10**9 else object
    sols = np.arange(p, dtype=dtype)
    m = p
    sols = sols[(sols * sols - t * sols + n) % m == 0]
    for _ in range(1, alpha):
        cand = (sols[:, None] + m * np.arange(p, dtype=dtype)[None, :]).ravel()
        m *= p
        sols = cand[(cand * cand - t * cand + n) % m == 0]
    return np.sort(sols)


@lru_cache(maxsize=100_000)
def omega_enumerate(p: int, alpha: int, n: int, t: int) -> OmegaSet:
    if alpha < 1:
        raise ValueError("alpha must be positive")
    return OmegaSet(p, alpha, n, t, tuple(int(x) for x in _solve(p, alpha, n, t)))


def omega_reduced(p: int, alpha: int, n: int, t: int, k: int) -> tuple[int, ...]:
    """Distinct residues mod p^k of the solutions mod p^alpha (k <= alpha)."""
    if k > alpha:
        raise ValueError("reduction exponent exceeds alpha")
    m = p**k
    return tuple(sorted({x % m for x in omega_enumerate(p, alpha, n, t)}))


def omega_param(p: int, alpha: int, n: int, t: int) -> set[int]:
    """The parametrised solution set mod p^alpha from the three-branch description."""
    D = t * t - 4 * n
    disc = split_fundamental(D)
    d, ell = disc.d, disc.ell
    g = ord_p(D, p)
    od = ord_p(d, p)
    f = ord_p(ell, p)
    m = p**alpha
    inv2 = pow(2, -1, m) if p > 2 else None
    if p == 2 and t % 2:
        return set()

    def half(x):
        if p > 2:
            return x * inv2 % m
        assert x % 2 == 0
        return (x // 2) % m

    if g >= alpha + max(od - 1, 0):
        c = -(-alpha // 2)
        if p == 2:
            w = int((alpha == g - 1 and d % 8 != 0) or (alpha == g and d % 2 == 1))
        else:
            w = t % 2
        base = half(t + p**c * w)
        return {(base + p**c * u) % m for u in range(p ** max(alpha - c, 0))}
    if g < alpha and kronecker(d, p) == 1:
        step = p ** (alpha - f)
        r = sqrt_mod(d, 4 * p ** (alpha + 2))
        out = set()
        for sgn in (1, -1):
            base = half(t + sgn * r * ell) if p > 2 else ((t + sgn * r * ell) // 2) % m
            out |= {(base + step * u) % m for u in range(p**f)}
        return out
    return set()


def omega_closedform_check(p: int, alpha: int, n: int, t: int) -> bool:
    return set(omega_enumerate(p, alpha, n, t).representatives) == omega_param(p, alpha, n, t)


@lru_cache(maxsize=100_000)
def S_p_direct_weights(p: int, e: int, t: int, n: int) -> tuple[tuple[int, int], ...]:
    """Multiplicities w_x (x mod p^e) with S_p(chi) = sum_x w_x chi(x).

    The triple sum is expanded literally; every xi it visits is reduced to its
    class mod p^e, where chi lives.
    """
    D = t * t - 4 * n
    disc = split_fundamental(D)
    d, ell = disc.d, disc.ell
    f = ord_p(ell, p)
    w: Counter[int] = Counter()
    me = p**e

    def add(alpha, k, mult):
        for xi in omega_reduced(p, alpha, n, t, k):
            w[xi % me] += mult

    add(e + 2 * f, e + f, 1)
    if d % p == 0:
        add(e + 2 * f + 1, e + f, 1)
    c = p - kronecker(d, p)
    for beta in (0, 1):
        for k in range(1, f + 1):
            add(e + 2 * f - 2 * k + beta, e + f - k, c * p ** (k - 1))
    return tuple(sorted((x, m) for x, m in w.items() if m))


def S_p_direct(chi, t: int, n: int):
    """The direct sum evaluated at a local character (or a batch of them)."""
    if chi.e < 1:
        raise ValueError("S_p_direct needs e >= 1")
    D = t * t - 4 * n
    if D >= 0 and math.isqrt(D) ** 2 == D:
        raise ValueError("t^2 - 4n is a square")
    total = 0
    for x, mult in S_p_direct_weights(chi.p, chi.e, t, n):
        total = total + mult * chi(x)
    return total
