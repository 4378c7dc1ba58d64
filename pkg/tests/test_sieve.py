import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistmin._arith import divisors
from twistmin.chars import (DirichletChar, PrimeLocalChar, enumerate_chars, enumerate_local,
                            enumerate_primitive, is_minimal, legendre)
from twistmin import localdata as ld
from twistmin.sieve import (beta, enumerate_sieve_pairs, lift_min, lift_new, local_sieve_options,
                            m_chi, sieved_form_suite)


@settings(max_examples=200)
@given(st.integers(1, 10**5), st.integers(1, 10**5))
def test_beta_multiplicative(a, b):
    if math.gcd(a, b) == 1:
        assert beta(a * b) == beta(a) * beta(b)


def test_beta_values():
    assert [beta(m) for m in (1, 2, 4, 8, 12, 30, 36)] == [1, -2, 1, 0, -2, -8, 1]


def test_beta_inverts_divisor_count():
    # sum_{d | m} beta(d) tau(m/d) = [m = 1]
    tau = lambda m: len(divisors(m))
    for m in range(1, 300):
        assert sum(beta(d) * tau(m // d) for d in divisors(m)) == (m == 1)


def test_lift_new_inverse():
    # f(p^e) = sum_{j <= e-s} (j + 1) f^new(p^{e-j})
    f = lambda c: ld.psi1(c.p, c.e, c.s) + 3 * c.e
    for p in (2, 3, 5, 7):
        for e in range(0, 5):
            for c in enumerate_local(p, e):
                back = sum((j + 1) * lift_new(f, c.induce(e - j)) for j in range(e - c.s + 1))
                assert back == f(c)


def test_lift_new_examples():
    f = lambda c: ld.psi1(c.p, c.e, c.s)
    assert lift_new(f, PrimeLocalChar(3, 2)) == 1
    c = PrimeLocalChar(5, 2, (1,)).primitive()
    assert lift_new(f, c) == f(c)


def test_lift_min_examples():
    f = lambda c: ld.psi1(c.p, c.e, c.s)
    assert lift_min(f, PrimeLocalChar(3, 2), 1) == 0
    for e in (1, 3):
        for c in enumerate_local(3, e):
            try:
                assert lift_min(f, c, 1) == lift_new(f, c)
            except ValueError:
                pass
    for c in enumerate_local(2, 5):
        try:
            assert lift_min(f, c, -1) == lift_new(f, c)
        except ValueError:
            pass


def test_lift_min_rejects_non_minimal():
    with pytest.raises(ValueError):
        lift_min(lambda c: 1, PrimeLocalChar(2, 4), 1)


def test_local_options_shapes():
    assert len(local_sieve_options(PrimeLocalChar(3, 3))) == 1
    opts = local_sieve_options(PrimeLocalChar(5, 2))
    Ms = sorted(o.M_exp for o in opts)
    # (p^2, 1), the p - 2 primitive psi mod p, and (1, Legendre)
    assert Ms == [0] + [1] * 3 + [2]
    leg = [o for o in opts if o.M_exp == 0][0]
    assert leg.psi == legendre(5) and leg.k == 0 and leg.k_prime == 1


def test_trivial_level_one():
    pairs = enumerate_sieve_pairs(DirichletChar.trivial(1))
    assert len(pairs) == 1 and pairs[0].M == 1 and pairs[0].psi.is_trivial()


class _Parity(dict):
    def __missing__(self, k):
        v = round(DirichletChar.from_literal(k)(-1).real)
        self[k] = v
        return v


PARITY = _Parity()


def _key(c):
    return c.primitive().to_literal()


def _brute_classes(chi):
    """S_chi by brute force, grouped into classes (M, psi u) under allowed twists u."""
    N = chi.N
    prims = [p for q in divisors(N) for p in enumerate_primitive(q)]
    S = {}
    for M in divisors(N):
        for psi in prims:
            if math.lcm(M, psi.conductor * (chi * psi).conductor) != N:
                continue
            tw = chi * psi * psi
            if M % tw.conductor or not is_minimal(tw.primitive().induce(M)):
                continue
            S.setdefault(M, []).append(psi)
    classes = []
    for M, psis in S.items():
        keys = {_key(p): p for p in psis}
        seen = set()
        for k, psi in keys.items():
            if k in seen:
                continue
            tw = chi * psi * psi
            ups = [u for u in prims if M % (u.conductor * (tw * u).conductor) == 0]
            cls = {_key(psi * u) for u in ups} & set(keys)
            seen |= cls
            classes.append((M, cls, psi))
    return classes


@pytest.mark.parametrize("lo,hi", [(1, 50), (51, 75), (76, 100)])
def test_sieve_pairs_partition(lo, hi):
    """Each class of S_chi carries total weight psi(n) across its enumerated members.

    n = -1 is checked only on classes whose members share psi(-1).  Twisting
    by an odd u can merge psi and psi u; both trace sides then vanish at
    n = -1 (see test_trace).
    """
    for N in range(lo, hi + 1):
        for chi in enumerate_chars(N):
            if not is_minimal(chi):
                continue
            cls = _brute_classes(chi)
            pairs = enumerate_sieve_pairs(chi)
            for n in (1, -1):
                for M, c, rep in cls:
                    if n == -1 and len({PARITY[k] for k in c}) > 1:
                        continue
                    w = sum(2.0 ** -p.k * p.psi(n).real for p in pairs
                            if p.M == M and _key(p.psi) in c)
                    assert abs(w - rep(n).real) < 1e-12, (chi.to_literal(), M, n)
            for p in pairs:
                assert any(p.M == M and _key(p.psi) in c for M, c, _ in cls), (chi.to_literal(), p)


def test_m_chi():
    assert m_chi(DirichletChar.trivial(1)) == 1
    # Legendre mod p has cond(psi)^2 = p^2, which does not divide p
    for p in (3, 5, 7, 13):
        assert m_chi(DirichletChar.trivial(p)) == 1
    # mod 8 the even quadratic characters are 1 and chi_8; 8 * 8 does not divide 8
    assert m_chi(DirichletChar.trivial(8)) == 1
    assert m_chi(DirichletChar.trivial(25)) == 2
    assert m_chi(DirichletChar.trivial(64)) == 2


def test_small_suite_exact():
    rep = sieved_form_suite(primes=(3, 5), emax=3, emax2=3, mmax=12)
    assert rep.ok, rep.failures[:3]
    assert rep.checked > 1000
