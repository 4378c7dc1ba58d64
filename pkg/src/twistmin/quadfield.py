"""Discriminants, Kronecker symbols, L(1, psi_D), class numbers and units."""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from ._arith import factor, is_square, ord_p

__all__ = [
    "Discriminant",
    "ClassData",
    "ClassCache",
    "CacheBoundError",
    "split_fundamental",
    "is_fundamental",
    "kronecker",
    "kronecker_vec",
    "psi_D",
    "L1_fundamental",
    "L1_psiD",
    "euler_factor",
    "form_class_number",
    "fundamental_unit",
    "unit_norm",
    "log_eps1",
    "default_cache",
]


def kronecker(a: int, n: int) -> int:
    """The Kronecker symbol (a/n)."""
    a, n = int(a), int(n)
    if n == 0:
        return 1 if abs(a) == 1 else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            sign = -sign
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def kronecker_vec(a: int, n: np.ndarray) -> np.ndarray:
    """(a/n) for a fixed integer a and an array of positive integers n."""
    n = np.asarray(n, dtype=np.int64).copy()
    out = np.ones(n.shape, dtype=np.int64)
    v = np.zeros(n.shape, dtype=np.int64)
    while True:
        ev = n % 2 == 0
        if not ev.any():
            break
        n[ev] //= 2
        v[ev] += 1
    if a % 2 == 0:
        out[v > 0] = 0
    elif a % 8 in (3, 5):
        out[v % 2 == 1] *= -1
    x = a % n
    m = n.copy()
    live = x != 0
    while live.any():
        while True:
            ev = live & (x % 2 == 0)
            if not ev.any():
                break
            x[ev] //= 2
            r = m[ev] % 8
            out[ev] *= np.where((r == 3) | (r == 5), -1, 1)
        xs, ms = x[live], m[live]
        flip = (xs % 4 == 3) & (ms % 4 == 3)
        sub = out[live]
        sub[flip] *= -1
        out[live] = sub
        m[live] = xs
        x[live] = ms % xs
        live = x != 0
    out[m != 1] = 0
    return out


# discriminants --------------------------------------------------------------

def is_fundamental(d: int) -> bool:
    if d == 1:
        return True
    if d % 4 == 1:
        return all(e == 1 for _, e in factor(d))
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and all(e == 1 for _, e in factor(m))
    return False


@dataclass(frozen=True)
class Discriminant:
    D: int
    d: int
    ell: int

    @property
    def is_square(self) -> bool:
        return self.d == 1


@lru_cache(maxsize=200_000)
def split_fundamental(D: int) -> Discriminant:
    """Write D = d * ell^2 with d fundamental (d = 1 for squares)."""
    D = int(D)
    if D == 0 or D % 4 in (2, 3):
        raise ValueError(f"{D} is not a discriminant")
    core, ell = (1 if D > 0 else -1), 1
    for p, e in factor(D):
        core *= p ** (e % 2)
        ell *= p ** (e // 2)
    if core % 4 != 1:
        core *= 4
        ell //= 2
    return Discriminant(D, core, ell)


def psi_D(D: Discriminant | int, n: int) -> int:
    if not isinstance(D, Discriminant):
        D = split_fundamental(D)
    return kronecker(D.d, n // math.gcd(n, D.ell))


@lru_cache(maxsize=200_000)
def L1_fundamental(d: int) -> float:
    """L(1, (d/.)) from the finite character-sum closed forms."""
    if d == 1 or not is_fundamental(d):
        raise ValueError(f"{d} is not a non-square fundamental discriminant")
    q = abs(d)
    a = np.arange(1, q, dtype=np.int64)
    chi = kronecker_vec(d, a).astype(float)
    if d < 0:
        return float(-math.pi / q**1.5 * np.dot(chi, a))
    return float(-np.dot(chi, np.log(np.sin(np.pi * a / q))) / math.sqrt(q))


def euler_factor(D: Discriminant) -> float:
    """(1/ell) prod_{p | ell} [1 + (p - psi_d(p)) (p^f - 1)/(p - 1)]."""
    out = 1.0 / D.ell
    for p, f in factor(D.ell):
        out *= 1 + (p - kronecker(D.d, p)) * (p**f - 1) / (p - 1)
    return out


def L1_psiD(D: Discriminant | int) -> float:
    if not isinstance(D, Discriminant):
        D = split_fundamental(D)
    if D.is_square:
        raise ValueError(f"D = {D.D} is a square")
    return L1_fundamental(D.d) * euler_factor(D)


# binary quadratic forms -----------------------------------------------------

def _reduced_definite(d: int) -> list[tuple[int, int, int]]:
    out = []
    amax = math.isqrt(-d // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                out.append((a, b, c))
    return out


def _reduced_indefinite(d: int) -> list[tuple[int, int, int]]:
    r = math.isqrt(d)
    out = []
    for b in range(1, r + 1):
        if (b - d) % 2 or b * b >= d:
            continue
        ac = (b * b - d) // 4
        for a in range(1, -ac + 1):
            if ac % a:
                continue
            for sa in (a, -a):
                c = ac // sa
                # sqrt(d) - b < 2|a| < sqrt(d) + b
                if (2 * a + b) ** 2 > d and (2 * a - b < 0 or (2 * a - b) ** 2 < d):
                    if math.gcd(math.gcd(a, b), abs(c)) == 1:
                        out.append((sa, b, c))
    return out


def _rho(form: tuple[int, int, int], d: int) -> tuple[int, int, int]:
    a, b, c = form
    r = math.isqrt(d)
    m = 2 * abs(c)
    # b' = -b mod 2|c| with sqrt(d) - 2|c| < b' < sqrt(d)
    bp = (-b) % m
    bp += m * ((r - bp) // m)
    while bp > r:
        bp -= m
    return (c, bp, (bp * bp - d) // (4 * c))


@lru_cache(maxsize=200_000)
def form_class_number(d: int) -> int:
    """Number of proper classes of primitive forms of discriminant d."""
    if d < 0:
        return len(_reduced_definite(d))
    forms = set(_reduced_indefinite(d))
    cycles = 0
    while forms:
        start = forms.pop()
        f = _rho(start, d)
        while f != start:
            forms.discard(f)
            f = _rho(f, d)
        cycles += 1
    return cycles


@lru_cache(maxsize=200_000)
def _unit(d: int) -> tuple[int, int, int]:
    """Least (t, u, N) with t^2 - d u^2 = 4N, N = +-1, u > 0."""
    if d <= 0 or is_square(d):
        raise ValueError("fundamental unit needs a positive non-square discriminant")
    if d % 4 == 1:
        D, P, Q = d, 1, 2
    else:
        D, P, Q = d // 4, 0, 1
    r = math.isqrt(D)
    p1, p0, q1, q0 = 1, 0, 0, 1
    while True:
        a = (P + r) // Q
        p1, p0 = a * p1 + p0, p1
        q1, q0 = a * q1 + q0, q1
        if d % 4 == 1:
            t, u = 2 * p1 - q1, q1
        else:
            t, u = 2 * p1, q1
        nrm = t * t - d * u * u
        if nrm in (4, -4) and u > 0:
            return t, u, nrm // 4
        P = a * Q - P
        Q = (D - P * P) // Q


def unit_norm(d: int) -> int:
    return _unit(d)[2]


def fundamental_unit(d: int) -> tuple[int, int]:
    """Least positive (t0, u0) with t0^2 - d u0^2 = 4."""
    t, u, nrm = _unit(d)
    if nrm == 1:
        return t, u
    return (t * t + d * u * u) // 2, t * u


def log_eps1(d: int) -> float:
    t0, _ = fundamental_unit(d)
    if t0 < 10**8:
        return math.acosh(t0 / 2)
    return math.log(t0)


# cache ------------------------------------------------------------------------

class CacheBoundError(ValueError):
    pass


@dataclass(frozen=True)
class ClassData:
    d: int
    h: int
    t0: int
    u0: int
    L1: float


def _default_cache_path() -> Path:
    env = os.environ.get("TWISTMIN_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "twistmin" / "classdata.jsonl"


# d arising from t^2 +- 4 with |t| <= e^6
DEFAULT_BOUND = 403**2 + 4


class ClassCache:
    """JSON-lines store of ClassData keyed by fundamental d > 0."""

    def __init__(self, path: str | os.PathLike | None = None, bound: int = DEFAULT_BOUND,
                 persist: bool = True):
        self.path = Path(path) if path is not None else _default_cache_path()
        self.bound = bound
        self.persist = persist
        self._data: dict[int, ClassData] | None = None
        self._lock = threading.Lock()

    def _load(self) -> dict[int, ClassData]:
        if self._data is None:
            data = {}
            if self.path.exists():
                with open(self.path) as fh:
                    for line in fh:
                        line = line.strip()
                        if not line:
                            continue
                        try:
                            rec = json.loads(line)
                        except json.JSONDecodeError:
                            continue  # torn trailing write
                        data[int(rec["d"])] = ClassData(
                            int(rec["d"]), int(rec["h"]), int(rec["t0"]), int(rec["u0"]),
                            float(rec["L1"]))
            self._data = data
        return self._data

    def compute(self, d: int) -> ClassData:
        t0, u0 = fundamental_unit(d)
        return ClassData(d, form_class_number(d), t0, u0, L1_fundamental(d))

    def get(self, d: int) -> ClassData:
        if not (d > 1 and is_fundamental(d)):
            raise ValueError(f"{d} is not a positive fundamental discriminant")
        if d > self.bound:
            raise CacheBoundError(
                f"d = {d} exceeds the cache bound {self.bound}; extend it with "
                f"`twistmin cache fill --X <larger X>` (add `--cache <path>` for a non-default cache)")
        data = self._load()
        rec = data.get(d)
        if rec is None:
            rec = self.compute(d)
            with self._lock:
                data[d] = rec
                if self.persist:
                    self._append(rec)
        return rec

    def _append(self, rec: ClassData) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        line = (json.dumps(asdict(rec), separators=(",", ":")) + "\n").encode()
        fd = os.open(self.path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
        try:
            os.write(fd, line)
        finally:
            os.close(fd)

    def fill(self, dmax: int) -> int:
        """Populate every fundamental d in (1, dmax]; returns the number added."""
        added = 0
        for d in range(5, dmax + 1):
            if is_fundamental(d) and d not in self._load():
                self.get(d)
                added += 1
        return added

    def __len__(self):
        return len(self._load())


_DEFAULT: ClassCache | None = None


def default_cache() -> ClassCache:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = ClassCache()
    return _DEFAULT
