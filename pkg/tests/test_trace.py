import json
import math

import numpy as np
import pytest

from twistmin import trace as tr
from twistmin.chars import DirichletChar, enumerate_chars, is_minimal
from twistmin.testfun import Transforms, basis_pair, build_test_pair
from twistmin.trace import (artin_char_filter, check_h_criterion, gamma_targets, geom_full,
                            geom_full_sieved, geom_min, minimize_constrained, qform)

# Classical level-one trace formula: cusp terms h(0)/4 - g(0) log 2 - digamma
# integral plus the scattering integral of h phi'/phi, with phi written through
# zeta.  Integrated once with mpmath on [0, 400] for x = (1/8,)*8, delta = 0.375.
# The prime-power sum lives inside phi'/phi, so it is not added again.
CLASSICAL_CUSP_PLUS_SCATTERING = 0.6608151059376228


@pytest.fixture(scope="module")
def uniform8():
    return Transforms(build_test_pair(0.375, [1 / 8] * 8))


def test_level_one_case_structure(tf8):
    one = DirichletChar.trivial(1)
    plus = geom_min(one, 1, tf8)
    minus = geom_min(one, -1, tf8)
    assert plus.terms["constant_eigfn"] == pytest.approx(-tf8.h_half)
    assert plus.terms["residual_N1"] == pytest.approx(-0.25 * tf8.int_g)
    for key in ("identity", "elliptic"):
        assert minus.terms[key] == 0
    # the constant function is fixed by T_{-1}, so h(i/2) is removed at n = -1 too
    assert minus.terms["constant_eigfn"] == plus.terms["constant_eigfn"]
    assert minus.total == pytest.approx(minus.terms["constant_eigfn"] + minus.terms["hyperbolic"].real
                                        + minus.terms["parabolic_main"]
                                        + minus.terms["parabolic_primes"].real
                                        + minus.terms["residual_N1"], abs=1e-12)


def test_level_one_classical_oracle(uniform8):
    b = geom_min(DirichletChar.trivial(1), 1, uniform8)
    t = b.terms
    classical = (t["identity"] + t["hyperbolic"] + t["elliptic"] + CLASSICAL_CUSP_PLUS_SCATTERING
                 - uniform8.h_half).real
    assert b.total == pytest.approx(classical, abs=1e-6)
    printed = geom_min(DirichletChar.trivial(1), 1, uniform8, as_printed=True)
    assert printed.total - b.total == pytest.approx(0.5 * math.log(2) * uniform8.g0, abs=1e-12)
    assert abs(printed.total - classical) > 1e-2


def test_full_side_includes_eigenvalue_zero(uniform8):
    one = DirichletChar.trivial(1)
    full = geom_full(1, one, 1, uniform8).total
    assert full - geom_min(one, 1, uniform8).total == pytest.approx(uniform8.h_half, abs=1e-8)


@pytest.mark.parametrize("lit,n", [("1:", 1), ("1:", -1), ("5:2", 1), ("9:0", 1), ("13:4", -1), ("25:0", -1),
                                   ("36:1,1", -1), ("25:2", 1), ("100:1,5", 1), ("100:1,5", -1)])
def test_sieved_identity_samples(tf8, lit, n):
    chi = DirichletChar.from_literal(lit) if lit != "1:" else DirichletChar.trivial(1)
    a = geom_min(chi, n, tf8).total
    b = geom_full_sieved(chi, n, tf8).total
    assert abs(a - b) <= 1e-6 * (1 + abs(a))


@pytest.mark.parametrize("lit", ["1:", "5:0", "6:0", "25:0"])
def test_eigenvalue_zero_removed_for_both_n(tf8, lit):
    chi = DirichletChar.from_literal(lit) if lit != "1:" else DirichletChar.trivial(1)
    mu = {"1:": 1, "5:0": -1, "6:0": 1, "25:0": 0}[lit]
    a = geom_min(chi, -1, tf8)
    assert a.terms["constant_eigfn"] == pytest.approx(-mu * tf8.h_half)
    assert geom_full_sieved(chi, -1, tf8).total == pytest.approx(a.total, abs=1e-8)
    printed = geom_min(chi, -1, tf8, as_printed=True)
    assert printed.total - a.total == pytest.approx(mu * tf8.h_half, abs=1e-12)
    assert geom_full_sieved(chi, -1, tf8, as_printed=True).total == pytest.approx(printed.total, abs=1e-8)


def test_level_one_odd_part_is_positive():
    """(T_1 - T_{-1})/2 sums h over odd forms only, so its form must be PSD.

    With the eigenvalue-0 term kept at n = 1 only, it is negative definite.
    """
    chi = DirichletChar.trivial(1)
    assert qform(chi, 1, 0.375, 8).min_eig() > 0
    t = []
    for i in range(15):
        T = Transforms(basis_pair(i, 0.375))
        t.append(0.5 * (geom_min(chi, 1, T).total - geom_min(chi, -1, T, as_printed=True).total))
    j = np.arange(8)
    A = 0.5 * (np.asarray(t)[abs(j[:, None] - j[None, :])] + np.asarray(t)[j[:, None] + j[None, :]])
    assert np.linalg.eigvalsh(A)[0] < 0


def test_rejects_odd_and_non_minimal(tf8):
    odd = [c for c in enumerate_chars(7) if not c.is_even()][0]
    with pytest.raises(ValueError):
        geom_min(odd, 1, tf8)
    with pytest.raises(ValueError):
        geom_full(7, odd, 1, tf8)
    with pytest.raises(ValueError):
        geom_min(DirichletChar.trivial(16), 1, tf8)


def test_truncation_is_complete(tf8, monkeypatch):
    chi = DirichletChar.trivial(5)
    base = {n: geom_min(chi, n, tf8).total for n in (1, -1)}
    t_range, m_max = tr._t_range, tr._m_max
    monkeypatch.setattr(tr, "_t_range", lambda n, X: range(t_range(n, X).start - 7, t_range(n, X).stop + 7))
    monkeypatch.setattr(tr, "_m_max", lambda X: 3 * m_max(X))
    for n in (1, -1):
        assert geom_min(chi, n, tf8).total == base[n]


def test_breakdown_json_schema(tf8):
    d = json.loads(geom_min(DirichletChar.trivial(1), 1, tf8).to_json())
    assert set(d) == {"N", "chi", "n", "terms", "total", "trunc"}
    assert set(d["trunc"]) >= {"t_max", "m_max"}
    assert d["total"] == pytest.approx(sum(d["terms"].values()))


def test_imaginary_total_is_an_error():
    b = tr.TraceBreakdown(1, "1:", 1, {"a": 1 + 1e-3j})
    with pytest.raises(ArithmeticError):
        b.total


def test_qform_small():
    chi = DirichletChar.trivial(1)
    Q = qform(chi, 0, 0.75, 1)
    assert Q.A.shape == (1, 1)
    assert Q.A[0, 0] == pytest.approx(Q.traces[0] / Q.m_chi)
    Q3 = qform(chi, 0, 0.5, 3, n_artin=2)
    assert np.array_equal(Q3.A, Q3.A.T)
    Q0 = qform(chi, 0, 0.5, 3)
    assert np.allclose(Q3.A, Q0.A - 2 / Q0.m_chi)
    assert Q0.min_eig() >= -1e-8 * np.linalg.norm(Q0.A)


def test_minimize_examples():
    m = minimize_constrained(np.eye(4))
    assert np.allclose(m.x, 0.25) and m.Q == pytest.approx(0.25)
    m = minimize_constrained(np.diag([1.0, 4.0]))
    assert np.allclose(m.x, [0.8, 0.2]) and m.Q == pytest.approx(0.8)
    rng = np.random.default_rng(3)
    for _ in range(5):
        B = rng.normal(size=(2, 2))
        A = B @ B.T + 1e-3 * np.eye(2)
        m = minimize_constrained(A)
        s = np.linspace(-5, 5, 200001)
        grid = A[0, 0] * s**2 + 2 * A[0, 1] * s * (1 - s) + A[1, 1] * (1 - s) ** 2
        assert m.Q == pytest.approx(grid.min(), abs=1e-6)
        assert abs(m.x.sum() - 1) < 1e-12 and m.kkt_residual < 1e-9
    with pytest.raises(np.linalg.LinAlgError):
        minimize_constrained(np.array([[1.0, 0.0], [0.0, -1.0]]))


def test_h_criterion_reports():
    for x in ([1.0], [1 / 4] * 4, [0.6, 0.3, 0.1]):
        r = check_h_criterion(x, 0.5)
        assert math.isfinite(r.min_value) and 0 <= r.argmin_y <= 0.5
    # h(iy) >= h(0) = (sum x)^2 = 1 for nonnegative x
    assert check_h_criterion([0.5, 0.5], 0.5).holds


def test_gamma_targets():
    t1 = gamma_targets(1)
    assert len(t1) == 1 and t1[0][0] == 1
    for p in (5, 7):
        Ms = {(M, c.to_literal()) for M, c in gamma_targets(p)}
        for c in enumerate_chars(p * p):
            if p % c.conductor == 0 and is_minimal(c) and c.is_even():
                assert (p * p, c.to_literal()) in Ms


def test_artin_excludes_order_twenty():
    N = 17 * 11
    cands = [c for c in enumerate_chars(N) if is_minimal(c) and c.is_even()
             and sorted(x.order for x in c.locals) == [4, 5]]
    assert cands
    kept = {c.to_literal() for c in artin_char_filter(N)}
    assert not any(c.to_literal() in kept for c in cands)
    for c in artin_char_filter(N):
        assert all(x.order in (1, 2, 3, 4, 5) for x in c.locals)


def test_forms_psd_up_to_36():
    """Both parities, every even minimal chi of modulus <= 36, M = 8, delta = 0.375."""
    bad = []
    for N in range(1, 37):
        chars = [DirichletChar.trivial(1)] if N == 1 else enumerate_chars(N)
        for chi in chars:
            if not (is_minimal(chi) and chi.is_even()):
                continue
            for eps in (0, 1):
                A = qform(chi, eps, 0.375, 8)
                if A.min_eig() < -1e-8 * np.linalg.norm(A.A, 2):
                    bad.append((chi.to_literal(), eps))
    assert not bad
