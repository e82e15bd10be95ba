import math
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, strategies as st

from plumbed.chardata import half_char
from plumbed.errors import PoleAtInput
from plumbed.ratfunc import (
    G_v_eval,
    G_v_laurent,
    G_v_leading,
    G_v_root,
    P_binomial,
    P_vertex,
    P_vertex_coeffs,
    P_weight,
    QSeries,
    binomial_ext,
)

fracs = st.fractions(min_value=-3, max_value=3, max_denominator=6)
series = st.lists(st.tuples(fracs, st.integers(-5, 5)), max_size=6).map(QSeries.from_terms)


def test_binomial_ext_examples():
    assert binomial_ext(3, 2) == 3
    assert binomial_ext(-1, 5) == 1
    assert binomial_ext(2, 5) == 0
    assert binomial_ext(-2, 1) == 0


@given(st.integers(0, 12), st.integers(3, 9))
def test_P_vertex_is_binomial_for_nonneg(n, deg):
    assert P_vertex(n, deg) == binomial_ext(n + deg - 3, n)


@given(st.integers(3, 9))
def test_P_vertex_coeffs_sympy(deg):
    x = sympy.Symbol("x")
    expr = sympy.prod([x + j for j in range(1, deg - 2)]) / sympy.factorial(deg - 3)
    ref = sympy.Poly(sympy.expand(expr), x).all_coeffs()[::-1]
    got = P_vertex_coeffs(deg)
    assert [Fraction(str(c)) for c in ref] == got[: len(ref)]
    assert all(c == 0 for c in got[len(ref):])


@given(series, series, series)
def test_qseries_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == QSeries.from_terms([])


@given(series, fracs)
def test_qseries_shift_and_eval(a, s):
    q = mpmath.mpf("0.37")
    lhs = a.shift(s).evaluate(q)
    rhs = a.evaluate(q) * mpmath.power(q, mpmath.mpf(s.numerator) / s.denominator)
    assert abs(lhs - rhs) < mpmath.mpf(10) ** -40 * (1 + abs(lhs))


@given(series)
def test_qseries_json_roundtrip(a):
    assert QSeries.from_json(a.to_json()) == a


def test_truncate():
    a = QSeries.from_terms([(Fraction(1, 2), 1), (2, 3), (5, 1)])
    assert a.truncate(2).as_dict() == {Fraction(1, 2): 1, Fraction(2): 3}


def test_G_leading_sigma237(s237):
    ld, _ = s237
    assert G_v_leading(ld, "c") == (2, Fraction(-168))


def test_G_leading_numeric(fleet):
    for e in fleet[:15]:
        from plumbed.lattice import linking_data

        ld = linking_data(e.graph)
        for v in ld.vge2:
            order, coeff = G_v_leading(ld, v)
            eps = mpmath.mpf(10) ** -12
            val = G_v_eval(ld, v, 1 + eps)
            assert abs(val / eps**order - coeff) < 1e-6 * abs(coeff)


def test_G_root_matches_eval(s237, hgraph):
    for ld, _ in (s237, hgraph):
        for v in ld.vge2:
            M = ld.partition.leaf_prod[v]
            for k in (3, 5):
                for mu in (1, 2, 7):
                    if (2 * mu) % (2 * k) == 0:
                        continue
                    q = mpmath.exp(2j * mpmath.pi * mu / (2 * k * M))
                    a = G_v_root(ld, v, mu, k)
                    b = G_v_eval(ld, v, q)
                    assert abs(a - b) < mpmath.mpf(10) ** -50
                    t = mpmath.mpf("0.3")
                    a = G_v_root(ld, v, mu, k, t)
                    b = G_v_eval(ld, v, q * mpmath.exp(-t / (2 * M)))
                    assert abs(a - b) < mpmath.mpf(10) ** -50


def test_G_pole(s237):
    ld, _ = s237
    with pytest.raises(PoleAtInput):
        G_v_eval(ld, "c", 1)
    with pytest.raises(PoleAtInput):
        G_v_root(ld, "c", 0, 5)


def test_laurent_matches_eval(s237, hgraph):
    for ld, _ in (s237, hgraph):
        for v in ld.vge2:
            hc = half_char(ld, v)
            lg = G_v_laurent(ld, hc, v, 400)
            M = ld.partition.leaf_prod[v]
            x = mpmath.mpf("0.2")
            q = x if M > 0 else 1 / x
            # the expansion variable is q^{sgn M}; truncation error is below x^400
            assert abs(lg.series.evaluate(x) - G_v_eval(ld, v, q)) < mpmath.mpf(10) ** -40


def test_P_weight_and_binomial(hgraph):
    ld, _ = hgraph
    part = ld.partition
    for n in [(0, 0), (2, 3), (-1, 4)]:
        assert P_weight(n, part) == 1
    assert P_binomial((0, 0), part) == 1
