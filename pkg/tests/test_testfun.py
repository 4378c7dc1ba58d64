import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from twistmin.testfun import (EULER_GAMMA, PiecewisePoly, TestPair as Pair, Transforms, basis_g, basis_pair,
                              build_test_pair, convolve, digamma, eval_h, sinc)


def fourier(g: PiecewisePoly, r: float) -> float:
    """2 * integral_0^X g(u) cos(ru) du, one QUADPACK call per piece."""
    import warnings
    warnings.simplefilter("ignore", integrate.IntegrationWarning)
    tot = 0.0
    for a, b, coef in g.pieces():
        f = lambda u, a=a, coef=coef: np.polynomial.polynomial.polyval(u - a, coef)
        if r == 0:
            v = integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13)[0]
        else:
            v = integrate.quad(f, a, b, weight="cos", wvar=r, epsabs=1e-14, epsrel=1e-13)[0]
        tot += v
    return 2 * tot


def piecewise_quad(kernel, g: PiecewisePoly, lo=0.0):
    tot = 0.0
    for a, b, coef in g.pieces():
        f = lambda u, a=a, coef=coef: kernel(u) * np.polynomial.polynomial.polyval(u - a, coef)
        tot += integrate.quad(f, max(a, lo), b, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return tot


def test_fourier_consistency():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        M = int(rng.integers(1, 9))
        tp = build_test_pair(float(rng.uniform(0.2, 0.8)), rng.uniform(-1, 1, M))
        for r in rng.uniform(0, 30, 20):
            worst = max(worst, abs(eval_h(tp, r) - fourier(tp.g, r)))
    assert worst <= 1e-8


@pytest.mark.parametrize("i", [0, 1, 4])
def test_basis_transform(i):
    delta = 0.5
    g = basis_g(i, delta)
    assert fourier(g, 1.3) == pytest.approx(sinc(delta * 1.3 / 2) ** 4 * math.cos(i * delta * 1.3),
                                            abs=1e-8)
    assert g.support == pytest.approx((i + 2) * delta)
    u = np.linspace((i + 2) * delta, (i + 4) * delta, 50)
    assert np.all(g(u) == 0)


def test_basis_zero_is_normalized_spline():
    g = basis_g(0, 0.3)
    assert g.integral() == pytest.approx(1, abs=1e-12)
    tp = build_test_pair(0.3, [1.0])
    u = np.linspace(-1, 1, 101)
    assert np.allclose(tp.g(u), g(u), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=8), st.floats(0.1, 1.0))
def test_h0_and_integral(x, delta):
    tp = build_test_pair(delta, x)
    s = sum(x) ** 2
    assert eval_h(tp, 0.0) == pytest.approx(s, abs=1e-12)
    assert tp.g.integral() == pytest.approx(s, abs=1e-10 * (1 + s))
    # exact zero strictly outside the support
    X = 2 * len(x) * delta
    assert tp.X <= X + 1e-12
    u = np.linspace(X, X + 3, 40)[1:]
    assert np.all(tp.g(u) == 0) and np.all(tp.g(-u) == 0)


def test_even_and_continuous(pair8):
    g = pair8.g
    u = np.linspace(0, pair8.X, 333)
    assert np.allclose(g(u), g(-u), atol=1e-14)
    knots = pair8.delta * np.arange(-16, 17)
    eps = 1e-9
    assert np.allclose(g(knots - eps), g(knots + eps), atol=1e-7)


def test_positivity(pair8):
    r = np.arange(0, 60, 1e-2)
    assert np.all(eval_h(pair8, r) >= 0)
    y = np.arange(-0.5, 0.5 + 1e-9, 1e-2)
    hy = eval_h(pair8, 1j * y)
    assert np.isrealobj(hy) and np.all(hy >= 0)


def test_decay_bound(pair8):
    C = sum(abs(v) for v in pair8.x) ** 2 * (2 / pair8.delta) ** 4
    r = np.linspace(5, 500, 2000)
    assert np.all(np.abs(eval_h(pair8, r)) <= C / r**4)


def test_basis_decomposition(pair8):
    g = sum(c * basis_g(i, pair8.delta) for i, c in enumerate(pair8.cos_coeffs))
    u = np.linspace(-pair8.X, pair8.X, 777)
    assert np.allclose(g(u), pair8.g(u), atol=1e-12)
    x = np.asarray(pair8.x)
    r = np.linspace(0, 20, 50)
    d = pair8.delta
    want = sum(x[j] * x[k] * 0.5 * sinc(d * r / 2) ** 4 * (np.cos((j - k) * d * r) + np.cos((j + k) * d * r))
               for j in range(8) for k in range(8))
    assert np.allclose(eval_h(pair8, r), want, atol=1e-12)


def test_convolution_of_triangles():
    tri = PiecewisePoly(1.0, -1, np.array([[0.0, 1.0], [1.0, -1.0]]))
    B = convolve(tri, tri)
    assert B.integral() == pytest.approx(1.0)
    assert B(0.0) == pytest.approx(2 / 3)
    assert B(1.0) == pytest.approx(1 / 6)


def test_h_half(pair8, tf8):
    want = 2 * piecewise_quad(lambda u: np.cosh(u / 2), pair8.g)
    assert tf8.h_half == pytest.approx(want, abs=1e-10)
    assert eval_h(pair8, 0.5j) == pytest.approx(want, abs=1e-8)


def test_identity_integral(pair8, tf8):
    gp = pair8.g.derivative()
    want = 2 * piecewise_quad(lambda u: 1 / np.sinh(u / 2) if u > 0 else 0.0, gp)
    assert tf8.identity == pytest.approx(want, abs=1e-8)
    assert tf8.err["identity"] < 1e-10


def test_log_integrals(pair8, tf8):
    gp = pair8.g.derivative()
    ls = -piecewise_quad(lambda u: math.log(math.sinh(u / 2)) if u > 0 else 0.0, gp)
    lt = -piecewise_quad(lambda u: math.log(math.tanh(u / 4)) if u > 0 else 0.0, gp)
    assert tf8.log_sinh == pytest.approx(ls, abs=1e-8)
    assert tf8.log_tanh == pytest.approx(lt, abs=1e-8)


def test_int_log_antiderivative():
    from twistmin.testfun import _int_log
    c = np.array([0.3, -1.0, 2.0, 0.5])
    want = integrate.quad(lambda u: math.log(u) * np.polynomial.polynomial.polyval(u, c), 0, 1.7)[0]
    assert _int_log(c, 0.0, 1.7) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("t", [0, 1, -1])
def test_elliptic_dual_route(pair8, tf8, t):
    """The g-side kernel against (1/pi) integral of exp(-2 r theta)/(1 + exp(-2 pi r)) h(r)."""
    D = t * t - 4
    theta = math.acos(abs(t) / 2)

    def w(r):
        if r >= 0:
            return math.exp(-2 * r * theta) / (1 + math.exp(-2 * math.pi * r))
        return math.exp(2 * r * (math.pi - theta)) / (1 + math.exp(2 * math.pi * r))

    f = lambda r: w(r) * float(eval_h(pair8, r))
    v = sum(integrate.quad(f, a, a + 2, epsabs=1e-15, limit=200)[0] for a in range(-200, 200, 2))
    assert tf8.elliptic(D) == pytest.approx(v / math.pi, abs=1e-8)


def test_elliptic_decays(tf8):
    vals = [abs(tf8.elliptic(-d)) for d in (3, 300, 30000, 3000000)]
    assert vals == sorted(vals, reverse=True)
    assert vals[-1] < 1e-2


def test_hyperbolic_is_exact_evaluation(pair8, tf8):
    t, D = 3, 5
    u = 2 * math.log((3 + math.sqrt(5)) / 2)
    assert tf8.hyperbolic(t, D) == pair8.g(u)


def test_digamma_values():
    assert digamma(1) == pytest.approx(-EULER_GAMMA, abs=1e-13)
    assert digamma(0.5) == pytest.approx(-EULER_GAMMA - 2 * math.log(2), abs=1e-13)
    z = np.array([0.5 + 3j, 1 + 0.1j, 0.7 + 40j, 12 - 5j])
    assert np.allclose(digamma(z), special.psi(z), atol=1e-12, rtol=0)


def test_digamma_integrals_against_g_side(pair8, tf8):
    g0 = tf8.g0
    g = pair8.g

    def ker(a):
        def f(t):
            den = -math.expm1(-t)
            return (math.exp(-t) * g0 - math.exp(-a * t) * float(g(t))) / den if t > 0 else 0.0
        return f

    def side(a):
        X = pair8.X
        body = sum(integrate.quad(ker(a), k * pair8.delta, (k + 1) * pair8.delta, epsabs=1e-15)[0]
                   for k in range(int(round(X / pair8.delta))))
        # past the support g = 0 and the integrand is g0 e^{-t}/(1 - e^{-t})
        tail = -g0 * math.log(-math.expm1(-X))
        return -EULER_GAMMA * g0 + body + tail

    dg = tf8.digamma
    assert dg.tail_bound < 1e-9
    assert dg.one == pytest.approx(side(1.0), abs=1e-9)
    assert dg.half == pytest.approx(side(0.5), abs=1e-9)


def test_json_roundtrip(pair8):
    back = Pair.from_json(pair8.to_json())
    r = np.linspace(0, 10, 30)
    assert np.allclose(eval_h(back, r), eval_h(pair8, r), atol=0)
    u = np.linspace(-6, 6, 30)
    assert np.array_equal(back.g(u), pair8.g(u))
    bp = basis_pair(3, 0.25)
    assert np.array_equal(Pair.from_json(bp.to_json()).g(u), bp.g(u))


def test_rejects_empty():
    with pytest.raises(ValueError):
        build_test_pair(0.5, [])
