"""Small integer helpers shared by the arithmetic modules."""

from __future__ import annotations

import math
from functools import lru_cache

from sympy import factorint as _factorint
from sympy.ntheory import primitive_root as _primitive_root
from sympy.ntheory.residue_ntheory import sqrt_mod as _sqrt_mod


@lru_cache(maxsize=4096)
def factor(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation of |n| as ascending (p, e) pairs."""
    n = abs(int(n))
    if n <= 1:
        return ()
    return tuple(sorted(_factorint(n).items()))


def primes_of(n: int) -> list[int]:
    return [p for p, _ in factor(n)]


def ord_p(n: int, p: int) -> int:
    """p-adic valuation; ord_p(0) is reported as a large sentinel."""
    n = abs(int(n))
    if n == 0:
        return 10**9
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def totient(n: int) -> int:
    r = n
    for p, _ in factor(n):
        r = r // p * (p - 1)
    return r


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, e in factor(n):
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def mobius(n: int) -> int:
    f = factor(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def von_mangoldt(n: int) -> float:
    f = factor(n)
    if len(f) == 1:
        return math.log(f[0][0])
    return 0.0


def prime_power(n: int) -> tuple[int, int] | None:
    """(p, k) if n = p^k with k >= 1, else None."""
    f = factor(n)
    return f[0] if len(f) == 1 else None


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(n + 1) if sieve[i]]


@lru_cache(maxsize=None)
def primitive_root(p: int, e: int) -> int:
    """Least primitive root modulo p^e for odd p."""
    return int(_primitive_root(p**e))


@lru_cache(maxsize=4096)
def sqrt_mod(a: int, m: int) -> int | None:
    """Some x with x^2 = a mod m, or None."""
    r = _sqrt_mod(a % m, m)
    return None if r is None else int(r)
