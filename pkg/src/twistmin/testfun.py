"""The sinc^4 test-function family and its integral transforms.

h(r) = (sinc^2(delta r/2) sum_j x_j cos(j delta r))^2 has compactly supported
Fourier transform g, a piecewise cubic on the grid delta*Z.  g is built
exactly: the linear spline K with transform sinc^2 * sum x_j cos is convolved
with itself piece by piece.  Integrals of g against the kernels of the trace
formula are done per grid piece with the Molin rule; log u parts are
integrated in closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .quadrature import integrate_piecewise

__all__ = [
    "PiecewisePoly",
    "TestPair",
    "basis_g",
    "basis_pair",
    "build_test_pair",
    "eval_h",
    "Transforms",
    "transforms",
    "digamma",
    "digamma_integrals",
    "sinc",
]

EULER_GAMMA = 0.57721566490153286061


# piecewise polynomials on delta*Z -------------------------------------------------

@dataclass(frozen=True)
class PiecewisePoly:
    """f(u) = sum_j coefs[i, j] s^j on piece i, where u/delta = k0 + i + s, s in [0, 1)."""

    delta: float
    k0: int
    coefs: np.ndarray

    @property
    def support(self) -> float:
        return self.delta * max(abs(self.k0), abs(self.k0 + len(self.coefs)))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        tau = u / self.delta
        k = np.floor(tau).astype(np.int64)
        i = k - self.k0
        inside = (i >= 0) & (i < len(self.coefs))
        s = tau - k
        out = np.zeros(np.shape(u))
        ii = np.where(inside, i, 0)
        c = self.coefs[ii]
        acc = np.zeros(np.shape(u))
        for j in range(self.coefs.shape[1] - 1, -1, -1):
            acc = acc * s + c[..., j]
        out = np.where(inside, acc, 0.0)
        # the right end of the last piece closes the support
        end = (i == len(self.coefs)) & (s == 0)
        if np.any(end):
            out = np.where(end, self.coefs[-1].sum(), out)
        return out[()] if out.ndim == 0 else out

    def derivative(self) -> "PiecewisePoly":
        c = self.coefs
        d = c[:, 1:] * np.arange(1, c.shape[1]) / self.delta
        return PiecewisePoly(self.delta, self.k0, d if d.shape[1] else np.zeros((len(c), 1)))

    def integral(self) -> float:
        c = self.coefs
        return float(self.delta * np.sum(c / np.arange(1, c.shape[1] + 1)))

    def pieces(self, nonneg: bool = True):
        """(a, b, coefficients in u - a) for each grid piece, u >= 0 only by default."""
        out = []
        scale = self.delta ** -np.arange(self.coefs.shape[1])
        for i, c in enumerate(self.coefs):
            k = self.k0 + i
            if nonneg and k < 0:
                continue
            out.append((k * self.delta, (k + 1) * self.delta, c * scale))
        return out

    def global_poly(self, i: int) -> np.ndarray:
        """Piece i as ascending coefficients in u."""
        a = (self.k0 + i) * self.delta
        out = np.zeros(1)
        shift = np.array([-a / self.delta, 1 / self.delta])
        powk = np.array([1.0])
        for cj in self.coefs[i]:
            out = P.polyadd(out, cj * powk)
            powk = P.polymul(powk, shift)
        return out

    def _aligned(self, other: "PiecewisePoly"):
        k0 = min(self.k0, other.k0)
        k1 = max(self.k0 + len(self.coefs), other.k0 + len(other.coefs))
        deg = max(self.coefs.shape[1], other.coefs.shape[1])
        a = np.zeros((k1 - k0, deg))
        b = np.zeros((k1 - k0, deg))
        a[self.k0 - k0:self.k0 - k0 + len(self.coefs), :self.coefs.shape[1]] = self.coefs
        b[other.k0 - k0:other.k0 - k0 + len(other.coefs), :other.coefs.shape[1]] = other.coefs
        return k0, a, b

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        k0, a, b = self._aligned(other)
        return PiecewisePoly(self.delta, k0, a + b)

    def __radd__(self, other):
        if other == 0:
            return self
        return NotImplemented

    def __mul__(self, c: float) -> "PiecewisePoly":
        return PiecewisePoly(self.delta, self.k0, self.coefs * c)

    __rmul__ = __mul__

    def shift(self, m: int) -> "PiecewisePoly":
        """u -> u - m delta."""
        return PiecewisePoly(self.delta, self.k0 + m, self.coefs)

    def reflect(self) -> "PiecewisePoly":
        """u -> -u."""
        c = self.coefs[::-1]
        out = np.zeros_like(c)
        # q(s) = p(1 - s)
        for i, row in enumerate(c):
            out[i] = _compose_one_minus(row)
        return PiecewisePoly(self.delta, -(self.k0 + len(self.coefs)), out)

    def to_dict(self) -> dict:
        return {"delta": self.delta, "k0": self.k0, "coefs": self.coefs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewisePoly":
        return cls(float(d["delta"]), int(d["k0"]), np.array(d["coefs"], dtype=float))


def _compose_one_minus(c: np.ndarray) -> np.ndarray:
    out = np.zeros(len(c))
    base = np.array([1.0, -1.0])
    powk = np.array([1.0])
    for cj in c:
        out[:len(powk)] += cj * powk
        powk = P.polymul(powk, base)
    return out


@lru_cache(maxsize=None)
def _conv_kernels(da: int, db: int) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear maps for convolving two unit-grid pieces.

    For p of degree < da and q of degree < db on [0, 1), (p*q)(tau) lives on
    [0, 2).  Returns L, R of shape (da, db, da+db) with
    (p*q)(s) on [0,1)   = sum p_a q_b L[a, b, :] . s^k, and
    (p*q)(1+s) on [0,1) = sum p_a q_b R[a, b, :] . s^k.
    """
    n = da + db
    L = np.zeros((da, db, n))
    R = np.zeros((da, db, n))
    for a in range(da):
        for b in range(db):
            # integrand sigma^a (tau - sigma)^b = sum_c C(b,c) tau^c (-1)^(b-c) sigma^(a+b-c)
            for c in range(b + 1):
                coef = math.comb(b, c) * (-1) ** (b - c)
                m = a + b - c + 1  # antiderivative power of sigma
                # [0, tau]: tau^c * tau^m / m
                L[a, b, c + m] += coef / m
                # [tau-1, 1] with tau = 1 + s: (1+s)^c (1 - s^m) / m
                poly = P.polymul(_binom_row(c), P.polysub([1.0], _mono(m)))
                R[a, b, :len(poly)] += coef / m * poly
    return L, R


def _binom_row(c: int) -> np.ndarray:
    return np.array([math.comb(c, i) for i in range(c + 1)], dtype=float)


def _mono(m: int) -> np.ndarray:
    out = np.zeros(m + 1)
    out[m] = 1.0
    return out


def convolve(f: PiecewisePoly, g: PiecewisePoly) -> PiecewisePoly:
    """Exact convolution of two piecewise polynomials on the same grid."""
    if f.delta != g.delta:
        raise ValueError("grids differ")
    da, db = f.coefs.shape[1], g.coefs.shape[1]
    L, R = _conv_kernels(da, db)
    npieces = len(f.coefs) + len(g.coefs)
    out = np.zeros((npieces, da + db))
    for i, p in enumerate(f.coefs):
        outer = np.einsum("a,abk->bk", p, L)
        outer_r = np.einsum("a,abk->bk", p, R)
        out[i:i + len(g.coefs)] += g.coefs @ outer
        out[i + 1:i + 1 + len(g.coefs)] += g.coefs @ outer_r
    # u-scale: integrating over sigma contributes one factor delta
    return PiecewisePoly(f.delta, f.k0 + g.k0, out * f.delta)


# the test-function family -----------------------------------------------------------

def _spline_K(delta: float, x) -> PiecewisePoly:
    """Linear spline with transform sinc^2(delta r/2) sum x_j cos(j delta r).

    Values at the nodes j delta are x_0 at 0 and x_j/2 at +-j, scaled by 1/delta.
    """
    x = np.asarray(x, dtype=float)
    M = len(x)
    nodes = np.zeros(2 * M + 1)
    nodes[M] = x[0]
    nodes[M + 1:2 * M] = x[1:] / 2
    nodes[1:M] = x[1:][::-1] / 2
    c = np.stack([nodes[:-1], np.diff(nodes)], axis=1) / delta
    return PiecewisePoly(delta, -M, c)


def basis_g(i: int, delta: float) -> PiecewisePoly:
    """Transform of sinc^4(delta r/2) cos(i delta r): half the sum of B(u -+ i delta)."""
    tri = _spline_K(delta, [1.0])
    B = convolve(tri, tri)
    if i == 0:
        return B
    return 0.5 * (B.shift(i) + B.shift(-i))


def sinc(z):
    z = np.asarray(z)
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    return np.where(small, 1 - z * z / 6, np.sin(zs) / zs)[()]


@dataclass(frozen=True)
class TestPair:
    """A pair (g, h) with h = sinc^4(delta r/2) * sum_i c_i cos(i delta r).

    x holds the coefficients x_j when h is the square of
    sinc^2 * sum x_j cos(j delta r); basis pairs keep x = None.
    """

    delta: float
    cos_coeffs: tuple[float, ...]
    g: PiecewisePoly
    x: tuple[float, ...] | None = None

    @property
    def M(self) -> int:
        return len(self.x) if self.x is not None else len(self.cos_coeffs)

    @property
    def X(self) -> float:
        return self.g.support

    def h(self, r):
        return eval_h(self, r)

    def to_json(self) -> str:
        return json.dumps({"delta": self.delta, "x": None if self.x is None else list(self.x),
                           "cos_coeffs": list(self.cos_coeffs), "g": self.g.to_dict()})

    @classmethod
    def from_json(cls, text: str) -> "TestPair":
        d = json.loads(text)
        x = None if d["x"] is None else tuple(d["x"])
        return cls(float(d["delta"]), tuple(d["cos_coeffs"]), PiecewisePoly.from_dict(d["g"]), x)


def build_test_pair(delta: float, x) -> TestPair:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 1:
        raise ValueError("need at least one coefficient")
    K = _spline_K(delta, x)
    g = convolve(K, K)
    M = len(x)
    c = np.zeros(2 * M - 1)
    for j in range(M):
        for k in range(M):
            c[abs(j - k)] += 0.5 * x[j] * x[k]
            c[j + k] += 0.5 * x[j] * x[k]
    return TestPair(float(delta), tuple(c), g, tuple(float(v) for v in x))


def basis_pair(i: int, delta: float) -> TestPair:
    c = np.zeros(i + 1)
    c[i] = 1.0
    return TestPair(float(delta), tuple(c), basis_g(i, delta))


def eval_h(tp: TestPair, r):
    """h(r) for real r or r on the imaginary axis (cos and sinc continue analytically)."""
    r = np.asarray(r)
    d = tp.delta
    s2 = sinc(d * r / 2) ** 2
    if tp.x is not None:
        j = np.arange(len(tp.x))
        inner = np.tensordot(np.cos(np.multiply.outer(r, j * d)), np.asarray(tp.x), axes=1)
        out = (s2 * inner) ** 2
    else:
        i = np.arange(len(tp.cos_coeffs))
        inner = np.tensordot(np.cos(np.multiply.outer(r, i * d)), np.asarray(tp.cos_coeffs), axes=1)
        out = s2 * s2 * inner
    if np.iscomplexobj(out) and np.all(np.abs(np.imag(out)) <= 1e-12 * (1 + np.abs(out))):
        out = np.real(out)
    return out[()] if np.ndim(out) == 0 else out


# analytic kernels (accept complex u for the Molin sup bound) ---------------------------

def _u_over_sinh(u):
    u = np.asarray(u)
    small = np.abs(u) < 1e-4
    us = np.where(small, 1.0, u)
    return np.where(small, 2 - u * u / 12, us / np.sinh(us / 2))


def _inv_sinh(u):
    return 1 / np.sinh(np.asarray(u) / 2)


def _log_sinh_over_u(u):
    u = np.asarray(u)
    small = np.abs(u) < 1e-4
    us = np.where(small, 1.0, u)
    return np.where(small, math.log(0.5) + u * u / 24, np.log(np.sinh(us / 2) / us))


def _log_tanh_over_u(u):
    u = np.asarray(u)
    small = np.abs(u) < 1e-4
    us = np.where(small, 1.0, u)
    return np.where(small, math.log(0.25) - u * u / 48, np.log(np.tanh(us / 4) / us))


def _cosh_half(u):
    return np.cosh(np.asarray(u) / 2)


def _int_log(coef_u: np.ndarray, a: float, b: float) -> float:
    """Closed form of the integral of log(u) * sum c_k u^k over [a, b], a >= 0."""

    def F(u):
        if u == 0:
            return 0.0
        k = np.arange(len(coef_u))
        return float(np.sum(coef_u * u ** (k + 1) * (math.log(u) / (k + 1) - 1 / (k + 1) ** 2)))

    return F(b) - F(a)


@dataclass
class Transforms:
    """Every g-side functional the trace formulas need, for one test pair."""

    tp: TestPair
    n: int = 40
    err: dict = field(default_factory=dict)

    @cached_property
    def g0(self) -> float:
        return float(self.tp.g(0.0))

    @cached_property
    def int_g(self) -> float:
        return self.tp.g.integral()

    @cached_property
    def _gprime(self) -> PiecewisePoly:
        return self.tp.g.derivative()

    @cached_property
    def h_half(self) -> float:
        """h(i/2) = integral of g(u) cosh(u/2)."""
        v, e = integrate_piecewise(_cosh_half, self.tp.g.pieces(), self.n)
        self.err["h_half"] = 2 * e
        return 2 * v

    @cached_property
    def identity(self) -> float:
        """Integral over R of g'(u)/sinh(u/2)."""
        pcs = self._gprime.pieces()
        a0, b0, c0 = pcs[0]
        # g' is odd, so its expansion at 0 starts at u^1; divide it out
        head = (a0, b0, c0[1:] if len(c0) > 1 else np.zeros(1))
        v0, e0 = integrate_piecewise(_u_over_sinh, [head], self.n)
        v1, e1 = integrate_piecewise(_inv_sinh, pcs[1:], self.n)
        self.err["identity"] = 2 * (e0 + e1)
        return 2 * (v0 + v1)

    def _log_part(self) -> float:
        gp = self._gprime
        total = 0.0
        for i in range(len(gp.coefs)):
            k = gp.k0 + i
            if k < 0:
                continue
            total += _int_log(gp.global_poly(i), k * gp.delta, (k + 1) * gp.delta)
        return total

    @cached_property
    def log_sinh(self) -> float:
        """-integral_0^inf log(sinh(u/2)) g'(u) du."""
        v, e = integrate_piecewise(_log_sinh_over_u, self._gprime.pieces(), self.n)
        self.err["log_sinh"] = e
        return -(v + self._log_part())

    @cached_property
    def log_tanh(self) -> float:
        """-integral_0^inf log(tanh(u/4)) g'(u) du."""
        v, e = integrate_piecewise(_log_tanh_over_u, self._gprime.pieces(), self.n)
        self.err["log_tanh"] = e
        return -(v + self._log_part())

    def elliptic(self, D: int) -> float:
        """sqrt|D|/pi * integral over R of g(u) cosh(u/2) / (4 sinh^2(u/2) + |D|)."""
        key = ("elliptic", D)
        if key not in self.err:
            aD = abs(D)
            kern = lambda u: np.cosh(u / 2) / (4 * np.sinh(u / 2) ** 2 + aD)
            v, e = integrate_piecewise(kern, self.tp.g.pieces(), self.n)
            self.err[key] = (2 * math.sqrt(aD) / math.pi * v, 2 * math.sqrt(aD) / math.pi * e)
        return self.err[key][0]

    def hyperbolic(self, t: int, D: int) -> float:
        """g(2 log((|t| + sqrt D)/2))."""
        return float(self.tp.g(2 * math.log((abs(t) + math.sqrt(D)) / 2)))

    def g_at(self, u: float) -> float:
        return float(self.tp.g(u))

    @cached_property
    def digamma(self) -> "DigammaIntegrals":
        return digamma_integrals(self.tp)


def transforms(tp: TestPair, n: int = 40) -> Transforms:
    return Transforms(tp, n)


# digamma -------------------------------------------------------------------------------

_B2K = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


def digamma(z):
    """psi(z) for Re z >= 1/2: shift to Re z >= 10, then the Stirling series."""
    z = np.array(z, dtype=complex, ndmin=1)
    acc = np.zeros_like(z)
    shift = np.maximum(np.ceil(10 - z.real), 0).astype(int)
    for k in range(int(shift.max(initial=0))):
        m = shift > k
        acc[m] -= 1 / z[m]
        z[m] += 1
    w = 1 / (z * z)
    ser = np.zeros_like(z)
    for k in range(len(_B2K), 0, -1):
        ser = ser * w + _B2K[k - 1] / (2 * k)
    out = acc + np.log(z) - 0.5 / z - ser * w
    return out if out.size > 1 else out[0]


@dataclass(frozen=True)
class DigammaIntegrals:
    """(1/2pi) integral of h(r) psi(a + ir) dr for a = 1/2 and a = 1."""

    half: float
    one: float
    R_max: float
    tail_bound: float


def digamma_integrals(tp: TestPair, tol: float = 1e-11, nodes: int = 16) -> DigammaIntegrals:
    """Gauss-Legendre panels of width pi/X on [0, R_max].

    |h(r)| <= C/r^4 with C = sum|c_i| (2/delta)^4 and |Re psi(a+ir)| <= log r + 2
    for r >= 2, so the tail past R is at most C (log R + 2.5)/(3 pi R^3).
    """
    c = np.asarray(tp.cos_coeffs)
    C = float(np.sum(np.abs(c))) * (2 / tp.delta) ** 4
    scale = max(1.0, float(np.sum(np.abs(c))))
    R = 64.0
    while C * (math.log(R) + 2.5) / (3 * math.pi * R**3) > tol * scale:
        R *= 1.25
    X = max(tp.X, 1.0)
    width = math.pi / X
    npan = int(math.ceil(R / width))
    R = npan * width
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    vals = {0.5: 0.0, 1.0: 0.0}
    chunk = 4096
    for start in range(0, npan, chunk):
        k = np.arange(start, min(npan, start + chunk))
        r = ((k[:, None] + 0.5) + 0.5 * xg[None, :]) * width
        w = np.broadcast_to(0.5 * width * wg, r.shape)
        hr = np.asarray(eval_h(tp, r.ravel()), dtype=float)
        for a in vals:
            vals[a] += float(np.sum(w.ravel() * hr * digamma(a + 1j * r.ravel()).real))
    tail = C * (math.log(R) + 2.5) / (3 * math.pi * R**3)
    return DigammaIntegrals(vals[0.5] / math.pi, vals[1.0] / math.pi, R, tail)
