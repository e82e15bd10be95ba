import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from plumbed.errors import SingularMatrix
from plumbed.lattice import (
    coset_reps,
    det_bareiss,
    ellipsoid_points,
    inverse,
    is_positive_definite,
    linking_data,
    matmul,
    quad,
    reassemble_inverse,
    signature,
    smith_normal_form,
)

int_mats = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=n, max_size=n)
)


@given(int_mats)
def test_det_matches_sympy(A):
    assert det_bareiss(A) == sympy.Matrix(A).det()


@given(int_mats)
def test_inverse_matches_sympy(A):
    M = sympy.Matrix(A)
    if M.det() == 0:
        with pytest.raises(SingularMatrix):
            inverse(A)
        return
    inv = inverse(A)
    ref = M.inv()
    assert all(Fraction(inv[i][j]) == Fraction(int(ref[i, j].p), int(ref[i, j].q))
               for i in range(len(A)) for j in range(len(A)))


@given(int_mats)
def test_smith_form(A):
    U, D, V = smith_normal_form(A)
    assert matmul(U, matmul(D, V)) == A
    assert abs(det_bareiss(U)) == 1 and abs(det_bareiss(V)) == 1
    diag = [D[i][i] for i in range(len(D))]
    assert all(D[i][j] == 0 for i in range(len(D)) for j in range(len(D)) if i != j)
    assert all(d >= 0 for d in diag)
    from sympy.matrices.normalforms import smith_normal_form as snf

    ref = snf(sympy.Matrix(A), domain=sympy.ZZ)
    assert sorted(abs(int(ref[i, i])) for i in range(len(A))) == sorted(diag)
    nz = [d for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


def _brute_cosets(A):
    """Count classes of a box of integer vectors modulo the lattice A Z^n."""
    n = len(A)
    M = sympy.Matrix(A)
    inv = M.inv()
    return abs(M.det()), inv


@given(int_mats)
def test_coset_reps_distinct_and_complete(A):
    d = det_bareiss(A)
    if d == 0:
        with pytest.raises(SingularMatrix):
            coset_reps(A)
        return
    if abs(d) > 400:
        return
    cs = coset_reps(A)
    reps = list(cs)
    assert len(reps) == cs.size == abs(d)
    Ainv = inverse(A)

    def same(x, y):
        diff = [a - b for a, b in zip(x, y)]
        return all(Fraction(sum(Ainv[i][j] * diff[j] for j in range(len(A)))).denominator == 1
                   for i in range(len(A)))

    # pairwise distinct classes, and reduce() lands on a listed representative
    keys = {tuple(cs.reduce(r)) for r in reps}
    assert len(keys) == len(reps)
    for r in reps[:20]:
        assert same(cs.reduce(r), r)
    for i, j in itertools.combinations(range(min(len(reps), 25)), 2):
        assert not same(reps[i], reps[j])


def test_coset_reps_sigma237_level5(s237):
    ld, _ = s237
    S = ld.S_int()
    cs = coset_reps([[2 * 5 * x for x in r] for r in S])
    # |det(2kS)| = 2k * 42 for the single central vertex
    assert cs.size == 420


def test_coset_chunks_partition():
    cs = coset_reps([[6, 2], [2, 4]])
    ch = cs.chunks(3)
    assert ch[0][0] == 0 and ch[-1][1] == cs.size
    got = [tuple(r) for a, b in ch for r in cs.reps(a, b)]
    assert got == [tuple(r) for r in cs]


def test_sigma237_blocks(s237):
    ld, _ = s237
    assert ld.S == [[Fraction(42)]]
    assert ld.Sinv == [[Fraction(1, 42)]]
    assert ld.detS == 42
    # sum (w+3) = 2+1+0-4, leaves give -1/2-1/3-1/7
    assert ld.phi() == Fraction(-83, 42)


def test_h_graph_blocks(hgraph):
    ld, _ = hgraph
    assert is_positive_definite(ld.S)
    assert ld.detS == 36


def test_fleet_block_identities(fleet):
    for e in fleet:
        ld = linking_data(e.graph)
        assert reassemble_inverse(ld) == ld.Winv
        assert is_positive_definite(ld.S)
        assert abs(ld.detW) == 1
        assert signature(ld.W) == -len(ld.W)
        # S is integral, and Sinv = -W_{>=2} + diag(sum over leaf nbrs of 1/w)
        ld.S_int()
        idx = ld.graph.index
        for a, v in enumerate(ld.vge2):
            for b, u in enumerate(ld.vge2):
                expect = Fraction(-ld.W[idx[v]][idx[u]])
                if a == b:
                    expect += sum(Fraction(1, ld.weight(l)) for l in ld.partition.leaf_nbrs[v])
                assert ld.Sinv[a][b] == expect


@given(
    st.lists(st.integers(-3, 3), min_size=2, max_size=2),
    st.fractions(min_value=-3, max_value=3, max_denominator=5),
    st.integers(0, 40),
)
def test_ellipsoid_points_brute(c_raw, shift, bound):
    A = [[Fraction(3), Fraction(1)], [Fraction(1), Fraction(2)]]
    c = [Fraction(c_raw[0], 2), shift]
    pts = ellipsoid_points(A, c, bound)
    got = {tuple(int(x) for x in p) for p in pts
           if quad(A, [Fraction(int(p[0])) + c[0], Fraction(int(p[1])) + c[1]]) <= bound}
    want = set()
    for a in range(-12, 13):
        for b in range(-12, 13):
            if quad(A, [a + c[0], b + c[1]]) <= bound:
                want.add((a, b))
    assert got == want


def test_ellipsoid_empty_dimension():
    pts = ellipsoid_points([], [], 5)
    assert pts.shape == (1, 0)
    assert ellipsoid_points([[Fraction(1)]], [Fraction(0)], -1).shape == (0, 1)
