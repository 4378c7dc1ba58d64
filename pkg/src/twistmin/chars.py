"""Dirichlet characters with exact root-of-unity values.

A character mod N is stored as one local character per prime power p^e || N.
Each local character keeps a table of exponents k (value e(k/phi(p^e))) over
the residues mod p^e, built from exponents on canonical generators: a least
primitive root for odd p, and the pair (-1, 5) for p = 2.  Equality and
hashing use the value table, so two characters are equal exactly when they
agree on every unit.
"""

from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np

from ._arith import factor, ord_p, primitive_root, totient

__all__ = [
    "PrimeLocalChar",
    "DirichletChar",
    "LocalCharBatch",
    "root_of_unity",
    "enumerate_chars",
    "enumerate_primitive",
    "enumerate_local",
    "local_batches",
    "is_minimal",
    "is_minimal_local",
    "reduce_to_minimal",
    "legendre",
]


def root_of_unity(x: Fraction) -> complex:
    """e(x) = exp(2 pi i x), exact for quarter turns."""
    x = x % 1
    if x == 0:
        return 1 + 0j
    if x == Fraction(1, 2):
        return -1 + 0j
    if x == Fraction(1, 4):
        return 1j
    if x == Fraction(3, 4):
        return -1j
    return cmath.exp(2j * math.pi * float(x))


@lru_cache(maxsize=None)
def generators(p: int, e: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Canonical generators of (Z/p^e)^x and their orders."""
    if e == 0 or (p == 2 and e == 1):
        return (), ()
    if p == 2:
        if e == 2:
            return (3,), (2,)
        return (2**e - 1, 5), (2, 2 ** (e - 2))
    return (primitive_root(p, e),), (totient(p**e),)


@lru_cache(maxsize=64)
def _logs(p: int, e: int) -> np.ndarray:
    """Discrete logs on the canonical generators; rows of -1 for non-units."""
    m = p**e
    gens, orders = generators(p, e)
    logs = np.full((m, len(gens)), -1, dtype=np.int64)
    if not gens:
        return logs
    for ks in itertools.product(*(range(o) for o in orders)):
        x = 1
        for g, k in zip(gens, ks):
            x = x * pow(g, k, m) % m
        logs[x] = ks
    logs.setflags(write=False)
    return logs


@lru_cache(maxsize=64)
def _unit_mask(p: int, e: int) -> np.ndarray:
    m = p**e
    mask = np.ones(m, dtype=bool) if m == 1 else (np.arange(m) % p != 0)
    mask.setflags(write=False)
    return mask


class PrimeLocalChar:
    """A character modulo p^e given by exponents on the canonical generators."""

    __slots__ = ("p", "e", "exps", "table", "s", "_hash")

    def __init__(self, p: int, e: int, exps=()):
        gens, orders = generators(p, e)
        if len(exps) == 0:
            exps = (0,) * len(orders)
        exps = tuple(int(c) % o for c, o in zip(exps, orders))
        if len(exps) != len(orders):
            raise ValueError(f"expected {len(orders)} generator exponents for {p}^{e}")
        self.p, self.e, self.exps = p, e, exps
        den = self.den
        if gens:
            logs = _logs(p, e)
            w = np.array([den // o * c for o, c in zip(orders, exps)], dtype=np.int64)
            table = (logs @ w) % den
            table[~_unit_mask(p, e)] = -1
        else:
            table = np.where(_unit_mask(p, e), 0, -1).astype(np.int64)
        table.setflags(write=False)
        self.table = table
        self.s = self._conductor_exponent()
        self._hash = hash((p, e, table.tobytes()))

    @property
    def modulus(self) -> int:
        return self.p**self.e

    @property
    def den(self) -> int:
        return totient(self.p**self.e)

    def _conductor_exponent(self) -> int:
        p, e, t = self.p, self.e, self.table
        for s in range(e + 1):
            idx = 1 + p**s * np.arange(p ** (e - s)) if s else np.flatnonzero(t >= 0)
            idx = idx % p**e
            if np.all(t[idx] == 0):
                return s
        return e

    @property
    def order(self) -> int:
        _, orders = generators(self.p, self.e)
        return reduce(math.lcm, (o // math.gcd(o, c) for o, c in zip(orders, self.exps)), 1)

    def exponent(self, n: int) -> Fraction | None:
        k = int(self.table[n % self.modulus])
        return None if k < 0 else Fraction(k, self.den)

    def __call__(self, n: int) -> complex:
        k = self.exponent(n)
        return 0j if k is None else root_of_unity(k)

    def prim(self, n: int) -> complex:
        """Value of the primitive character (conductor p^s) inducing this one."""
        if self.s == 0:
            return 1 + 0j
        return self(n)

    def parity(self) -> int:
        return 1 if self.exponent(-1) == 0 else -1

    def is_trivial(self) -> bool:
        return self.s == 0

    def __eq__(self, other):
        return (
            isinstance(other, PrimeLocalChar)
            and (self.p, self.e) == (other.p, other.e)
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"PrimeLocalChar({self.p}, {self.e}, {self.exps})"

    @classmethod
    def from_exponent_fn(cls, p: int, e: int, fn) -> "PrimeLocalChar":
        gens, orders = generators(p, e)
        exps = []
        for g, o in zip(gens, orders):
            v = fn(g) * o
            if v.denominator != 1:
                raise ValueError("value is not a root of unity of the generator order")
            exps.append(int(v))
        return cls(p, e, exps)

    def induce(self, e2: int) -> "PrimeLocalChar":
        if self.s > e2:
            raise ValueError(f"conductor {self.p}^{self.s} does not divide {self.p}^{e2}")
        if e2 == self.e:
            return self
        # the character factors through p^s, so any lift of a unit works
        return PrimeLocalChar.from_exponent_fn(self.p, e2, self.exponent)

    def primitive(self) -> "PrimeLocalChar":
        return self.induce(self.s)

    def __mul__(self, other: "PrimeLocalChar") -> "PrimeLocalChar":
        if self.p != other.p:
            raise ValueError("local characters at different primes")
        e = max(self.e, other.e)
        a, b = self.induce(e), other.induce(e)
        return PrimeLocalChar(self.p, e, [x + y for x, y in zip(a.exps, b.exps)])

    def __pow__(self, k: int) -> "PrimeLocalChar":
        return PrimeLocalChar(self.p, self.e, [k * c for c in self.exps])

    def conj(self) -> "PrimeLocalChar":
        return self**-1


def enumerate_local(p: int, e: int) -> list[PrimeLocalChar]:
    _, orders = generators(p, e)
    return [PrimeLocalChar(p, e, ks) for ks in itertools.product(*(range(o) for o in orders))]


def legendre(p: int, e: int = 1) -> PrimeLocalChar:
    """The quadratic character (./p) as a character mod p^e, p odd."""
    return PrimeLocalChar(p, e, [totient(p**e) // 2])


class LocalCharBatch:
    """All characters mod p^e of a fixed conductor exponent, evaluated together.

    Calling the batch at x returns the vector of values over its members.  It
    exposes the same attributes as PrimeLocalChar that the local closed forms
    read (p, e, s, call, prim, parity), so those formulas vectorise as is.
    """

    def __init__(self, p: int, e: int, exps: np.ndarray, s: int):
        self.p, self.e, self.s = p, e, s
        _, orders = generators(p, e)
        self.exps = np.asarray(exps, dtype=np.int64).reshape(len(exps), len(orders))
        self._w = np.array([totient(p**e) // o for o in orders], dtype=np.int64)

    def __len__(self):
        return len(self.exps)

    @property
    def den(self) -> int:
        return totient(self.p**self.e)

    def members(self) -> list[PrimeLocalChar]:
        return [PrimeLocalChar(self.p, self.e, row) for row in self.exps]

    def _exp(self, x: int) -> np.ndarray | None:
        if self.e == 0:
            return np.zeros(len(self), dtype=np.int64)
        lg = _logs(self.p, self.e)[x % self.p**self.e]
        if lg.size and lg[0] < 0 or (not lg.size and x % self.p == 0 and self.p**self.e > 1):
            return None
        return (self.exps @ (self._w * lg)) % self.den

    def __call__(self, x: int) -> np.ndarray:
        k = self._exp(x)
        if k is None:
            return np.zeros(len(self), dtype=complex)
        return np.exp(2j * np.pi * k / self.den)

    def prim(self, x: int) -> np.ndarray:
        if self.s == 0:
            return np.ones(len(self), dtype=complex)
        return self(x)

    def parity(self) -> np.ndarray:
        return np.real(self(-1)).round().astype(int)

    def orders(self) -> np.ndarray:
        _, orders = generators(self.p, self.e)
        out = np.ones(len(self), dtype=np.int64)
        for i, o in enumerate(orders):
            out = np.lcm(out, o // np.gcd(o, self.exps[:, i]))
        return out

    def select(self, mask: np.ndarray) -> "LocalCharBatch":
        return LocalCharBatch(self.p, self.e, self.exps[mask], self.s)


def local_batches(p: int, e: int) -> dict[int, LocalCharBatch]:
    """All characters mod p^e grouped by conductor exponent."""
    _, orders = generators(p, e)
    if not orders:
        return {0: LocalCharBatch(p, e, np.zeros((1, 0), dtype=np.int64), 0)}
    grid = np.array(list(itertools.product(*(range(o) for o in orders))), dtype=np.int64)
    s = np.array([_exps_conductor(p, e, row) for row in grid])
    return {int(si): LocalCharBatch(p, e, grid[s == si], int(si)) for si in np.unique(s)}


def _exps_conductor(p: int, e: int, exps) -> int:
    """Conductor exponent read off the generator exponents."""
    if p == 2:
        if e <= 1:
            return 0
        a = exps[0]
        b = exps[1] if e >= 3 else 0
        if b:
            return e - ord_p(b, 2)
        return 2 if a else 0
    a = exps[0]
    return 0 if a == 0 else e - min(ord_p(a, p), e - 1)


class DirichletChar:
    """A Dirichlet character mod N as a product of local characters."""

    __slots__ = ("N", "locals", "_hash")

    def __init__(self, N: int, locals_=None):
        self.N = int(N)
        if self.N < 1:
            raise ValueError("modulus must be positive")
        fac = factor(self.N)
        if locals_ is None:
            locals_ = [PrimeLocalChar(p, e) for p, e in fac]
        if isinstance(locals_, dict):
            locals_ = [locals_[p] for p, _ in fac]
        locals_ = tuple(locals_)
        if [(c.p, c.e) for c in locals_] != list(fac):
            raise ValueError("local characters do not match the factorisation of N")
        self.locals = locals_
        self._hash = hash((self.N, self.locals))

    # construction ---------------------------------------------------------
    @classmethod
    def trivial(cls, N: int) -> "DirichletChar":
        return cls(N)

    @classmethod
    def from_literal(cls, text: str) -> "DirichletChar":
        """Parse ``N:c1,c2,...`` (generator exponents, ascending primes)."""
        text = text.strip()
        head, _, tail = text.partition(":")
        N = int(head)
        vals = [int(v) for v in tail.split(",") if v.strip()] if tail else []
        locs = []
        for p, e in factor(N):
            k = len(generators(p, e)[0])
            if len(vals) < k:
                raise ValueError(f"literal {text!r}: too few exponents")
            locs.append(PrimeLocalChar(p, e, vals[:k]))
            vals = vals[k:]
        if vals:
            raise ValueError(f"literal {text!r}: too many exponents")
        return cls(N, locs)

    def to_literal(self) -> str:
        return f"{self.N}:" + ",".join(str(c) for loc in self.locals for c in loc.exps)

    # evaluation -----------------------------------------------------------
    def exponent(self, n: int) -> Fraction | None:
        tot = Fraction(0)
        for loc in self.locals:
            k = loc.exponent(n)
            if k is None:
                return None
            tot += k
        return tot % 1

    def __call__(self, n: int) -> complex:
        k = self.exponent(n)
        return 0j if k is None else root_of_unity(k)

    def local(self, p: int) -> PrimeLocalChar:
        for loc in self.locals:
            if loc.p == p:
                return loc
        return PrimeLocalChar(p, 0)

    @property
    def conductor(self) -> int:
        return math.prod(loc.p**loc.s for loc in self.locals)

    def is_primitive(self) -> bool:
        return self.conductor == self.N

    def parity(self) -> int:
        return 1 if self.exponent(-1) == 0 else -1

    def is_even(self) -> bool:
        return self.parity() == 1

    @property
    def order(self) -> int:
        return reduce(math.lcm, (loc.order for loc in self.locals), 1)

    def is_trivial(self) -> bool:
        return all(loc.s == 0 for loc in self.locals)

    # algebra --------------------------------------------------------------
    def induce(self, M: int) -> "DirichletChar":
        q = self.conductor
        if M % q:
            raise ValueError(f"conductor {q} does not divide {M}")
        return DirichletChar(M, [self.local(p).induce(e) for p, e in factor(M)])

    def primitive(self) -> "DirichletChar":
        return self.induce(self.conductor)

    def __mul__(self, other: "DirichletChar") -> "DirichletChar":
        L = math.lcm(self.N, other.N)
        return DirichletChar(
            L, [(self.local(p).induce(e) * other.local(p).induce(e)) for p, e in factor(L)]
        )

    def __pow__(self, k: int) -> "DirichletChar":
        return DirichletChar(self.N, [loc**k for loc in self.locals])

    def conj(self) -> "DirichletChar":
        return self**-1

    def __eq__(self, other):
        return isinstance(other, DirichletChar) and self.N == other.N and self.locals == other.locals

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"DirichletChar({self.to_literal()!r})"


def enumerate_chars(N: int) -> list[DirichletChar]:
    per = [enumerate_local(p, e) for p, e in factor(N)]
    return [DirichletChar(N, combo) for combo in itertools.product(*per)]


def enumerate_primitive(q: int) -> list[DirichletChar]:
    per = [[c for c in enumerate_local(p, e) if c.s == e] for p, e in factor(q)]
    return [DirichletChar(q, combo) for combo in itertools.product(*per)]


# minimality -----------------------------------------------------------------

def is_minimal_local(p: int, e: int, s: int, order: int) -> bool:
    if e == 0:
        return True
    if p > 2:
        return s in (0, e) or order == 2 ** ord_p(p - 1, 2)
    allowed = {e // 2, e}
    if e <= 3:
        allowed |= {0}
    elif e % 2:
        allowed |= {0, 2}
    return s in allowed


def is_minimal(chi: DirichletChar) -> bool:
    return all(is_minimal_local(c.p, c.e, c.s, c.order) for c in chi.locals)


def _twist_local(c: PrimeLocalChar) -> PrimeLocalChar:
    """psi_p with chi_p psi_p^2 minimal and cond(psi_p) cond(chi_p psi_p) | p^e."""
    p, e, s = c.p, c.e, c.s
    if is_minimal_local(p, e, s, c.order):
        return PrimeLocalChar(p, e)
    if 2 * s > e:
        raise ValueError(f"no minimising twist at p={p}: conductor exponent {s} exceeds {e}/2")
    if p > 2:
        phi = totient(p**e)
        a = c.exps[0] or phi
        if a % 2 == 0:
            b = -a // 2
        else:
            b = (phi // 2 ** ord_p(p - 1, 2) - a) // 2
        return PrimeLocalChar(p, e, [b])
    if e % 2 == 0 or s < 3:
        raise ValueError(f"no minimising twist at p=2 for e={e}, s={s}")
    # chi(5) = e(a / 2^(s-2)) with a odd; psi(-1) = 1, psi(5) = e(-a / 2^(s-1))
    b = c.exps[1]
    a = b >> (e - s)
    return PrimeLocalChar(2, e, [0, -a * 2 ** (e - s - 1)])


def reduce_to_minimal(chi: DirichletChar) -> tuple[DirichletChar, DirichletChar]:
    """Return (psi, chi * psi^2) with the product minimal.

    Raises ValueError when no such twist exists with cond(psi)cond(chi psi) | N,
    which happens only when the twist-minimal space is zero anyway.
    """
    psi = DirichletChar(chi.N, [_twist_local(c) for c in chi.locals])
    return psi, chi * psi * psi
