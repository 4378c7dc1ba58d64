"""Newform and twist-minimal sieves of multiplicative local factors.

A local factor function f takes a PrimeLocalChar c (mod p^c.e, any c.e >= 0)
and returns a number.  lift_new and lift_min turn it into the corresponding
newform and twist-minimal local factors.  The global sieve pairs are built as
products of per-prime choices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable

import numpy as np

from ._arith import factor, totient
from .chars import (
    DirichletChar,
    LocalCharBatch,
    PrimeLocalChar,
    enumerate_chars,
    enumerate_local,
    is_minimal,
    is_minimal_local,
    legendre,
    local_batches,
)
from .quadfield import kronecker
from . import localdata as ld

__all__ = [
    "beta",
    "lift_new",
    "lift_min",
    "SievePair",
    "local_sieve_options",
    "enumerate_sieve_pairs",
    "sieved_form_suite",
    "SuiteReport",
    "m_chi",
]

LocalFactorFn = Callable[[PrimeLocalChar], object]

_BETA = {0: 1, 1: -2, 2: 1}


def beta(m: int) -> int:
    out = 1
    for _, j in factor(m):
        out *= _BETA.get(j, 0)
    return out


def lift_new(f: LocalFactorFn, chi):
    """f^new(p^e, chi) = sum_{j <= e - s} beta(p^j) f(p^{e-j}, chi)."""
    if isinstance(chi, LocalCharBatch):
        if chi.s != chi.e:
            raise ValueError("batched lifts need s = e")
        return f(chi)
    total = 0
    for j in range(min(chi.e - chi.s, 2) + 1):
        total = total + _BETA[j] * f(_induce(chi, chi.e - j))
    return total


@lru_cache(maxsize=None)
def _primitive_local(p: int, k: int) -> tuple[PrimeLocalChar, ...]:
    return tuple(c for c in enumerate_local(p, k) if c.s == k)


def lift_min(f: LocalFactorFn, chi, n: int):
    """Twist-minimal local factor of f at a minimal chi."""
    p, e, s = chi.p, chi.e, chi.s
    if isinstance(chi, LocalCharBatch):
        orders = chi.orders()
        if not all(is_minimal_local(p, e, s, int(o)) for o in orders):
            raise ValueError("lift_min needs minimal characters")
        if s == e:
            return f(chi)
        return np.array([lift_min(f, c, n) for c in chi.members()])
    if not is_minimal_local(p, e, s, chi.order):
        raise ValueError(f"{chi!r} is not minimal")
    out = lift_new(f, chi)
    if p == 2 or e % 2 or s > 1:
        return out
    if e == 2 and s == 0:
        triv = PrimeLocalChar(p, 0)
        out = out - kronecker(n, p) * (lift_new(f, triv) + 0.5 * lift_new(f, PrimeLocalChar(p, 1)))
    for w, tw in _pairs1_twists(chi, n):
        out = out - w * lift_new(f, tw)
    return out


@lru_cache(maxsize=4096)
def _pairs1_twists(chi: PrimeLocalChar, n: int) -> tuple[tuple[complex, PrimeLocalChar], ...]:
    """(psi(n)/2, chi psi^2 mod p^{e/2}) over cond(psi) = p^{e/2}, psi != conj(chi)."""
    half = chi.e // 2
    cbar = chi.conj()
    out = []
    for psi in _primitive_local(chi.p, half):
        if psi.induce(chi.e) == cbar:
            continue
        out.append((0.5 * psi(n), _induce((chi * psi * psi), half)))
    return tuple(out)


@lru_cache(maxsize=65536)
def _induce(c: PrimeLocalChar, e: int) -> PrimeLocalChar:
    return c.induce(e)


# sieve pairs ------------------------------------------------------------------

@dataclass(frozen=True)
class SievePair:
    M: int
    psi: DirichletChar
    k: int
    k_prime: int

    def weight(self, n: int) -> float:
        """(-1)^{k'} 2^{-k} psi(n)."""
        return (-1) ** self.k_prime * 2.0 ** (-self.k) * float(np.real(self.psi(n)))


@dataclass(frozen=True)
class _LocalOption:
    M_exp: int
    psi: PrimeLocalChar  # primitive, modulus p^cond
    k: int
    k_prime: int


def local_sieve_options(chi_p: PrimeLocalChar) -> list[_LocalOption]:
    """Representatives of S'_{chi_p}: <N_p, 1> plus the PAIRS1 / PAIRS2 sets."""
    p, e, s = chi_p.p, chi_p.e, chi_p.s
    out = [_LocalOption(e, PrimeLocalChar(p, 0), 0, 0)]
    if p == 2 or e % 2 or e < 2 or s > 1:
        return out
    half = e // 2
    cbar = chi_p.conj()
    quad = legendre(p) if half == 1 else None

    def k_of(psi):
        return int(s == 1 or quad is None or psi != quad)

    if e >= 4 or s == 1:
        for psi in _primitive_local(p, half):
            if psi.induce(e) != cbar:
                out.append(_LocalOption(half, psi, k_of(psi), 1))
    else:
        for psi in _primitive_local(p, 1):
            out.append(_LocalOption(1, psi, k_of(psi), 1))
        out.append(_LocalOption(0, legendre(p), 0, 1))
    return out


def _glue(N: int, parts: list[PrimeLocalChar]) -> DirichletChar:
    """The primitive global character whose p-parts are the given primitive locals."""
    q = math.prod(c.modulus for c in parts)
    return DirichletChar(q, [c for c in parts if c.e > 0]) if q > 1 else DirichletChar.trivial(1)


def enumerate_sieve_pairs(chi: DirichletChar) -> list[SievePair]:
    if not is_minimal(chi):
        raise ValueError("enumerate_sieve_pairs needs a minimal character")
    opts = [local_sieve_options(c) for c in chi.locals]
    out = []
    for combo in itertools.product(*opts):
        M = math.prod(c.p ** o.M_exp for c, o in zip(chi.locals, combo))
        psi = _glue(chi.N, [o.psi for o in combo])
        out.append(SievePair(M, psi, sum(o.k for o in combo), sum(o.k_prime for o in combo)))
    return out


def twisted_restriction(chi: DirichletChar, pair: SievePair) -> DirichletChar:
    """chi psi^2 restricted to modulus M."""
    tw = chi * pair.psi * pair.psi
    return tw.primitive().induce(pair.M)


# sieved closed-form suite ---------------------------------------------------------

def psi1_min_expected(c) -> Fraction:
    return Fraction(2 * (c.e == c.s))


def psi3_min_expected(c) -> Fraction:
    p, e, s = c.p, c.e, c.s
    if p > 2:
        if e == s > 0:
            return Fraction(4 * e - 1)
        if e == 1 and s == 0:
            return Fraction(2)
        if e == 2 and s in (0, 1):
            return Fraction(p - 1 + 2 * s, 2)
        if e >= 3 and s in (0, 1):
            return Fraction(p ** ((e - 3) // 2) * (p - 1) * ((p if e % 2 == 0 else 3) + 1), 2)
        return Fraction(0)
    if e == s >= 2:
        return Fraction(4 * e - 1)
    if e in (1, 3) and s == 0:
        return Fraction(2)
    if e == 2 and s == 0:
        return Fraction(1)
    if e == 2 * s >= 4:
        return Fraction(3 * 2 ** (e // 2 - 2))
    if e >= 5 and e % 2 and s in (0, 2, (e - 1) // 2):
        return Fraction(2 ** ((e - 1) // 2))
    return Fraction(0)


def tilde_omega_local(j: int, c):
    p, e = c.p, c.e
    even = np.asarray(c.parity()) == 1
    if p == 2 and e == 0:
        return ld.omega_1(1, 1) if j == 1 else ld.omega_2(1, 1)
    if e == 0:
        return Fraction(1)
    if not even.any():
        return 0.0 * even
    val = 2 * ((ld.omega_1 if j == 1 else ld.omega_2)(2**e, 2**c.s) if p == 2 else 1)
    return np.where(even, float(val), 0.0)[()]


def tilde_omega_min_expected(j: int, c):
    p, e, s = c.p, c.e, c.s
    par = np.asarray(c.parity())
    if p > 2 or j == 1:
        lo = 1 if p > 2 else 2
        return ((e == s >= lo) * (1 + par))[()]
    if e == s >= 3:
        return np.where(par == 1, -2.0 * e, 0.0)[()]
    if e == 1 and s == 0:
        return -1.5
    if e in (2, 3) and s == 0:
        return -0.5
    return 0.0


@dataclass
class SuiteReport:
    checked: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, name: str, c, n, m, got, want, tol: float = 1e-10):
        shape = (len(c),) if isinstance(c, LocalCharBatch) else ()
        got = np.broadcast_to(np.asarray(got, dtype=complex), shape)
        want = np.broadcast_to(np.asarray(want, dtype=complex), shape)
        self.checked += got.size
        bad = np.atleast_1d(np.abs(got - want) > tol)
        if not bad.any():
            return
        members = c.members() if isinstance(c, LocalCharBatch) else [c]
        for i in np.flatnonzero(bad):
            self.failures.append({
                "form": name, "p": c.p, "e": c.e, "s": c.s,
                "exps": [int(x) for x in members[i].exps], "n": n, "m": m,
                "got": complex(np.atleast_1d(got)[i]), "want": complex(np.atleast_1d(want)[i])})


def _minimal_groups(p: int, e: int) -> list:
    """Minimal characters mod p^e: one batch for s = e, single characters otherwise."""
    out = []
    for s, b in local_batches(p, e).items():
        if s == e:
            out.append(b)
            continue
        keep = [is_minimal_local(p, e, s, int(o)) for o in b.orders()]
        out.extend(b.select(np.array(keep)).members())
    return out


def _prime_powers(mmax: int) -> list[int]:
    """m = 1 and the prime powers up to mmax: the m that carry Lambda(m) weight."""
    return [1] + [m for m in range(2, mmax + 1) if len(factor(m)) == 1]


def sieved_form_suite(primes=(2, 3, 5, 7, 11, 13), emax: int = 4, emax2: int = 6,
                       mmax: int = 50) -> SuiteReport:
    """Check every sieved closed form against lift_min of its unsieved table.

    Psi_1, Psi_2, Psi_3 and Phi_+ enter with n = 1 only; Psi~_2, Omega~_j and
    Phi_- with n = -1 only, so each is sieved with its own n.
    """
    rep = SuiteReport()
    f_psi1 = lambda c: ld.psi1(c.p, c.e, c.s)
    f_psi3 = lambda c: ld.psi3(c.p, c.e, c.s)
    for p in primes:
        for e in range(1, (emax2 if p == 2 else emax) + 1):
            for c in _minimal_groups(p, e):
                rep.record("Psi1", c, 1, None, lift_min(f_psi1, c, 1), psi1_min_expected(c))
                rep.record("Psi2", c, 1, None, lift_min(ld.psi2_char, c, 1), 0)
                rep.record("Psi3", c, 1, None, lift_min(f_psi3, c, 1), psi3_min_expected(c))
                rep.record("tPsi2", c, -1, None, lift_min(ld.tilde_psi2, c, -1), 0)
                for j in (1, 2):
                    rep.record(f"tOmega{j}", c, -1, None,
                               lift_min(lambda cc, j=j: tilde_omega_local(j, cc), c, -1),
                               tilde_omega_min_expected(j, c))
                for n in (1, -1):
                    for m in _prime_powers(mmax):
                        fm = lambda cc, m=m, n=n: ld.phi_pm_char(cc, m, n)
                        rep.record("Phi", c, n, m, lift_min(fm, c, n), ld.phi_mn(c, m, n))
    return rep


# multiplicity of non-CM forms -----------------------------------------------------

def m_chi(chi: DirichletChar, N: int | None = None) -> int:
    """#{psi mod N : psi even, psi^2 = 1, cond(psi) cond(chi psi) | N}."""
    N = chi.N if N is None else N
    count = 0
    for psi in enumerate_chars(N):
        if psi.order > 2 or not psi.is_even():
            continue
        if N % (psi.conductor * (chi.induce(N) * psi).conductor) == 0:
            count += 1
    return count
