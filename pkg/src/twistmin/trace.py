"""Geometric sides of the twist-minimal and full-level trace formulas.

geom_min assembles the twist-minimal formula directly from the local tables;
geom_full assembles the full formula for Gamma_0(N) with an even character;
geom_full_sieved recombines the latter over the sieve pairs and the beta sum,
which must reproduce geom_min.  The quadratic-form pipeline sits on top.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import localdata as ld
from ._arith import divisors, factor, primes_of, von_mangoldt
from .chars import DirichletChar, enumerate_chars, is_minimal
from .quadfield import ClassCache, L1_psiD, euler_factor, split_fundamental
from .sieve import beta, enumerate_sieve_pairs, twisted_restriction
from .testfun import EULER_GAMMA, TestPair, Transforms, build_test_pair, basis_pair, eval_h

__all__ = [
    "TraceBreakdown",
    "geom_min",
    "geom_full",
    "geom_full_sieved",
    "QFormMatrix",
    "qform",
    "minimize_constrained",
    "check_h_criterion",
    "gamma_targets",
    "artin_char_filter",
]

IMAG_TOL = 1e-9


@dataclass
class TraceBreakdown:
    N: int
    chi: str
    n: int
    terms: dict[str, complex]
    trunc: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        tot = sum(self.terms.values())
        if abs(np.imag(tot)) > IMAG_TOL * (1 + abs(tot)):
            raise ArithmeticError(f"geometric side has imaginary part {np.imag(tot):.3e}")
        return float(np.real(tot))

    def to_dict(self) -> dict:
        return {"N": self.N, "chi": self.chi, "n": self.n,
                "terms": {k: float(np.real(v)) for k, v in self.terms.items()},
                "total": self.total, "trunc": dict(self.trunc)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _as_transforms(tp) -> Transforms:
    return tp if isinstance(tp, Transforms) else Transforms(tp)


def _t_range(n: int, X: float) -> range:
    # (|t| + sqrt(t^2 - 4n))/2 >= e^{X/2} puts g(2 log(...)) outside the support
    tmax = int(math.exp(X / 2) + math.exp(-X / 2)) + 1
    return range(-tmax, tmax + 1)


def _m_max(X: float) -> int:
    return int(math.exp(X / 2)) + 1


def _L1(D: int, classes: ClassCache | None) -> float:
    disc = split_fundamental(D)
    if classes is None or disc.d < 0:
        return L1_psiD(disc)
    return classes.get(disc.d).L1 * euler_factor(disc)


def _class_sum(weight, n: int, T: Transforms, classes: ClassCache | None = None):
    """Sum over t of weight(t) L(1, psi_D) times the hyperbolic or elliptic kernel."""
    hyp, ell = 0j, 0j
    X = T.tp.X
    trange = _t_range(n, X)
    for t in trange:
        D = t * t - 4 * n
        if D >= 0 and math.isqrt(D) ** 2 == D:
            continue
        if D > 0:
            u = 2 * math.log((abs(t) + math.sqrt(D)) / 2)
            if u >= X:
                continue
            k = T.hyperbolic(t, D)
        else:
            k = T.elliptic(D)
        if k == 0:
            continue
        w = weight(t)
        if w == 0:
            continue
        val = w * _L1(D, classes) * k
        if D > 0:
            hyp += val
        else:
            ell += val
    return hyp, ell, trange.stop - 1


def _prime_powers_upto(mmax: int) -> list[int]:
    return [m for m in range(2, mmax + 1) if von_mangoldt(m) > 0]


def _prod(values):
    out = 1
    for v in values:
        out = out * v
    return out


# twist-minimal formula ---------------------------------------------------------------

def geom_min(chi: DirichletChar, n: int, tp, as_printed: bool = False,
             classes: ClassCache | None = None) -> TraceBreakdown:
    """Geometric side of the twist-minimal formula (eigenvalue 0 excluded).

    Two terms differ from the usual printed display.  The n = 1 parabolic
    constant is gamma + log(2/N) + log(2, N)/2 - log(2)/2; without the last
    term the side disagrees with the full formula and with the classical
    level-1 formula by log(2) g(0)/2.  The constant function is fixed by
    T_{-1} as well, so -mu(chi) h(i/2) is removed for both n; keeping it at
    n = 1 only makes the n = -1 forms indefinite.  as_printed=True restores
    both printed choices.
    """
    if n not in (1, -1):
        raise ValueError("n must be 1 or -1")
    if not is_minimal(chi):
        raise ValueError(f"{chi.to_literal()} is not minimal")
    if not chi.is_even():
        raise ValueError("odd characters carry no weight-0 forms; the formula needs chi even")
    T = _as_transforms(tp)
    N, q = chi.N, chi.conductor
    locs = chi.locals
    terms: dict[str, complex] = {}

    if n == 1:
        M = _prod(ld.bigM(c) for c in locs)
        terms["identity"] = -float(M) / 12 * T.identity
    else:
        terms["identity"] = 0.0
    if n == 1 or not as_printed:
        mu = _prod(ld.mu_const(c) for c in locs)
        terms["constant_eigfn"] = -float(mu) * T.h_half
    else:
        terms["constant_eigfn"] = 0.0

    hyp, ell, tmax = _class_sum(lambda t: _prod(ld.H_tn(c, t, n) for c in locs), n, T, classes)
    terms["hyperbolic"] = hyp
    terms["elliptic"] = ell

    g0 = T.g0
    two_N = math.gcd(2, N)
    bracket = (EULER_GAMMA + math.log(2 * math.pi / N) + 0.5 * math.log(2 / two_N)) * g0 + T.log_sinh
    if n == 1:
        shift = 0.0 if as_printed else 0.5 * math.log(2)
        bracket += ((EULER_GAMMA + math.log(2 / N) + 0.5 * math.log(two_N) - shift
                     + 0.5 * sum(math.log(p) for p in primes_of(N))) * g0 + T.log_tanh)
    terms["parabolic_main"] = _prod(ld.phi_mn(c, 1, n) for c in locs) * bracket

    mmax = _m_max(T.tp.X)
    prim = 0j
    for m in _prime_powers_upto(mmax):
        gm = T.g_at(2 * math.log(m))
        if gm:
            prim += von_mangoldt(m) / m * _prod(ld.phi_mn(c, m, n) for c in locs) * gm
    terms["parabolic_primes"] = 2 * prim

    lam = von_mangoldt(N // q)
    terms["lambda_Nq"] = -lam * _prod(complex(ld.psi_parabolic(c, n)) for c in locs) * g0 if lam else 0.0
    terms["residual_N1"] = -0.25 * T.int_g if N == 1 else 0.0
    return TraceBreakdown(N, chi.to_literal(), n, terms, {"t_max": tmax, "m_max": mmax, "R_max": 0.0})


# full formula on Gamma_0(N) -------------------------------------------------------------

def _local_ratio(c, t: int, n: int):
    return ld.S_p(c, t, n) / float(ld.S_p_unramified(c.p, t, n))


def geom_full(N: int, chi: DirichletChar, n: int, tp,
              classes: ClassCache | None = None) -> TraceBreakdown:
    """Right-hand side of the full formula, the lambda = 0 share included."""
    if n not in (1, -1):
        raise ValueError("n must be 1 or -1")
    if N % chi.conductor:
        raise ValueError(f"conductor {chi.conductor} does not divide {N}")
    chi = chi.primitive().induce(N)
    if not chi.is_even():
        raise ValueError("the full formula is stated for even characters")
    T = _as_transforms(tp)
    q = chi.conductor
    locs = chi.locals
    terms: dict[str, complex] = {}

    level = N * math.prod(Fraction(p + 1, p) for p in primes_of(N))
    terms["identity"] = -(1 + n) / 2 * float(level) / 12 * T.identity

    hyp, ell, tmax = _class_sum(lambda t: _prod(_local_ratio(c, t, n) for c in locs), n, T, classes)
    terms["hyperbolic"] = hyp
    terms["elliptic"] = ell

    h0 = float(eval_h(T.tp, 0.0))
    g0 = T.g0
    dig = T.digamma
    Ichi = ld.I_chi(chi)
    loc = [(c.p, c.e, c.s) for c in locs]
    if n == 1:
        psi1 = float(_prod(ld.psi1(*x) for x in loc))
        psi2 = float(_prod(ld.psi2(*x) for x in loc))
        terms["cusp_h0"] = psi1 * h0 / 4 - 0.25 * Ichi * psi2 * h0
        terms["cusp_digamma"] = -psi1 * (dig.half + dig.one)
        corr = 0.0
        for i, (p, e, s) in enumerate(loc):
            rest = _prod(ld.psi1(*x) for j, x in enumerate(loc) if j != i)
            corr += float(ld.psi3(p, e, s) * rest) * math.log(p)
        terms["cusp_g0"] = (psi1 * math.log(math.pi / 2) - corr) * g0
    elif Ichi:
        w = 2 ** len(loc)
        om1 = float(ld.omega_1(N, q))
        om2 = float(ld.omega_2(N, q))
        tpsi2 = _prod(ld.tilde_psi2(c) for c in locs)
        terms["cusp_h0"] = 0.25 * (w * om1 - ld.I_q4(q) * tpsi2) * h0
        terms["cusp_digamma"] = -w * om1 * dig.one
        spread = sum(max(0.5, s) * math.log(p) for p, e, s in loc if p > 2)
        terms["cusp_g0"] = w * (om1 * (math.log(math.pi) - spread) + om2 * math.log(2)) * g0
    else:
        terms["cusp_h0"] = terms["cusp_digamma"] = terms["cusp_g0"] = 0.0

    mmax = _m_max(T.tp.X)
    prim = 0j
    for m in _prime_powers_upto(mmax):
        if math.gcd(m, q) > 1:
            continue
        gm = T.g_at(2 * math.log(m))
        if gm:
            prim += von_mangoldt(m) / m * _prod(ld.phi_pm_char(c, m, n) for c in locs) * gm
    terms["parabolic_primes"] = 2 * prim
    return TraceBreakdown(N, chi.to_literal(), n, terms,
                          {"t_max": tmax, "m_max": mmax, "R_max": dig.R_max})


def _combine(parts: list[tuple[complex, TraceBreakdown]], N: int, chi: str, n: int) -> TraceBreakdown:
    terms: dict[str, complex] = {}
    trunc: dict[str, float] = {}
    for w, b in parts:
        for k, v in b.terms.items():
            terms[k] = terms.get(k, 0.0) + w * v
        for k, v in b.trunc.items():
            trunc[k] = max(trunc.get(k, 0.0), v)
    return TraceBreakdown(N, chi, n, terms, trunc)


def tr_new(level: int, chi: DirichletChar, n: int, tp, as_printed: bool = False,
           _cache: dict | None = None, classes: ClassCache | None = None) -> TraceBreakdown:
    """The beta-sieved new part at the given level, lambda = 0 removed.

    The constant function contributes h(i/2) for both n whenever the
    character is trivial; as_printed removes it for n = 1 only.
    """
    T = _as_transforms(tp)
    prim = chi.primitive()
    q = prim.N
    K = level // q
    parts = []
    for d in divisors(K):
        b = beta(K // d)
        if b == 0:
            continue
        key = (d * q, prim.to_literal(), n, as_printed)
        if _cache is not None and key in _cache:
            br = _cache[key]
        else:
            br = geom_full(d * q, prim, n, T, classes)
            if prim.is_trivial() and (n == 1 or not as_printed):
                br.terms["lambda0"] = -T.h_half
            if _cache is not None:
                _cache[key] = br
        parts.append((b, br))
    return _combine(parts, level, chi.to_literal(), n)


def geom_full_sieved(chi: DirichletChar, n: int, tp, as_printed: bool = False,
                     cache: dict | None = None, classes: ClassCache | None = None) -> TraceBreakdown:
    """Sum over the sieve pairs of (-1)^k' 2^-k psi(n) times the new part."""
    T = _as_transforms(tp)
    cache = {} if cache is None else cache
    parts = []
    for pair in enumerate_sieve_pairs(chi):
        w = pair.weight(n)
        if w == 0:
            continue
        tw = twisted_restriction(chi, pair)
        parts.append((w, tr_new(pair.M, tw, n, T, as_printed, cache, classes)))
    return _combine(parts, chi.N, chi.to_literal(), n)


# quadratic form ----------------------------------------------------------------------------

@dataclass(frozen=True)
class QFormMatrix:
    A: np.ndarray
    delta: float
    chi: str
    epsilon: int
    n_artin: int
    m_chi: int
    traces: tuple[float, ...]

    @property
    def M(self) -> int:
        return self.A.shape[0]

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.A @ x)

    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.A)[0])


def basis_traces(chi: DirichletChar, epsilon: int, delta: float, M: int) -> np.ndarray:
    """t_i for the basis pairs i = 0..2M-2 and the operator (T_1 + (-1)^eps T_{-1})/2."""
    out = np.zeros(2 * M - 1)
    for i in range(2 * M - 1):
        T = Transforms(basis_pair(i, delta))
        plus = geom_min(chi, 1, T).total
        minus = geom_min(chi, -1, T).total
        out[i] = 0.5 * (plus + (-1) ** epsilon * minus)
    return out


def qform(chi: DirichletChar, epsilon: int, delta: float, M: int, n_artin: int = 0,
          m: int | None = None) -> QFormMatrix:
    from .sieve import m_chi as _m_chi

    t = basis_traces(chi, epsilon, delta, M)
    j = np.arange(M)
    Tm = 0.5 * (t[np.abs(j[:, None] - j[None, :])] + t[j[:, None] + j[None, :]])
    mc = _m_chi(chi) if m is None else m
    A = (Tm - n_artin * np.ones((M, M))) / mc
    A = 0.5 * (A + A.T)
    return QFormMatrix(A, delta, chi.to_literal(), epsilon, n_artin, mc, tuple(t))


@dataclass(frozen=True)
class Minimizer:
    x: np.ndarray
    Q: float
    Q_uniform: float
    kkt_residual: float


def minimize_constrained(A, ridge: float = 1e-12) -> Minimizer:
    """Minimise x^T A x subject to sum(x) = 1."""
    A = np.asarray(A.A if isinstance(A, QFormMatrix) else A, dtype=float)
    M = A.shape[0]
    reg = A + ridge * max(np.trace(A), 0.0) / M * np.eye(M)
    one = np.ones(M)
    y = np.linalg.solve(reg, one)
    denom = one @ y
    if not denom > 1e-14 * np.abs(y).sum():
        raise np.linalg.LinAlgError("form is not positive on the constraint plane")
    x = y / denom
    x = x + (1 - x.sum()) / M
    Q = float(x @ A @ x)
    grad = 2 * A @ x
    lam = grad.mean()
    kkt = float(np.max(np.abs(grad - lam)))
    u = one / M
    return Minimizer(x, Q, float(u @ A @ u), kkt)


@dataclass(frozen=True)
class HCriterion:
    min_value: float
    argmin_y: float
    holds: bool


def check_h_criterion(x, delta: float, step: float = 1e-3) -> HCriterion:
    """min over y in [0, 1/2] of h(iy) and whether it is at least 1."""
    tp = build_test_pair(delta, x)
    y = np.arange(0, 0.5 + step / 2, step)
    v = np.asarray(eval_h(tp, 1j * y), dtype=float)
    i = int(np.argmin(v))
    return HCriterion(float(v[i]), float(y[i]), bool(v[i] >= 1 - 1e-9))


# target enumerations --------------------------------------------------------------------------

def gamma_targets(N: int) -> list[tuple[int, DirichletChar]]:
    """All (M, chi mod M) with lcm(M, cond(chi)^2) | N^2 and chi minimal and even."""
    out = []
    N2 = N * N
    for M in divisors(N2):
        for chi in enumerate_chars(M):
            q = chi.conductor
            if N2 % math.lcm(M, q * q) == 0 and is_minimal(chi) and chi.is_even():
                out.append((M, chi))
    return out


def _artin_local_ok(c, eN: int) -> bool:
    if eN in (1, c.s) and c.e > 0:
        return c.order in (2, 3, 4, 5)
    return True


def artin_char_filter(N: int) -> list[DirichletChar]:
    """Minimal even chi mod M | N whose local orders fit an icosahedral image."""
    out = []
    for M in divisors(N):
        for chi in enumerate_chars(M):
            if not (is_minimal(chi) and chi.is_even()):
                continue
            ok = True
            orders = []
            for c in chi.locals:
                eN = dict(factor(N)).get(c.p, 0)
                if not _artin_local_ok(c, eN):
                    ok = False
                    break
                if c.s > 0:
                    orders.append(c.order)
            if ok and 4 in orders and 5 in orders:
                ok = False
            if ok:
                out.append(chi)
    return out
