"""Exact integer/rational linear algebra for linking matrices.

Matrices are plain lists of rows holding ``int`` or ``Fraction``.  Nothing in
this module touches floating point except the outward-rounded bounds of
:func:`ellipsoid_points`, whose results are filtered exactly afterwards.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from .errors import SingularBlock, SingularMatrix

# -- small exact matrix kit ----------------------------------------------------


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(A):
    return [list(r) for r in zip(*A)] if A else []


def matmul(A, B):
    if not A or not B:
        return [[0] * (len(B[0]) if B else 0) for _ in A]
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A, x):
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def submatrix(A, rows, cols):
    return [[A[i][j] for j in cols] for i in rows]


def quad(A, x, y=None):
    y = x if y is None else y
    return sum(xi * aij * yj for xi, row in zip(x, A) for aij, yj in zip(row, y))


def det_bareiss(A):
    """Exact determinant of an integer matrix by fraction-free elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(map(int, r)) for r in A]
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def det_rational(A):
    n = len(A)
    if n == 0:
        return Fraction(1)
    den = 1
    for r in A:
        for x in r:
            den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    scaled = [[int(Fraction(x) * den) for x in r] for r in A]
    return Fraction(det_bareiss(scaled), den**n)


def inverse(A):
    """Exact inverse over the rationals (Gauss-Jordan)."""
    n = len(A)
    M = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            raise SingularMatrix("matrix is singular")
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [x / piv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


def leading_minors(A):
    return [det_rational([r[:k] for r in A[:k]]) for k in range(1, len(A) + 1)]


def is_positive_definite(A):
    return all(m > 0 for m in leading_minors(A))


def is_negative_definite(W):
    """True iff every leading principal minor of ``-W`` is positive."""
    return is_positive_definite([[-x for x in r] for r in W])


def ldl(A):
    """Exact LDL^T of a symmetric positive definite matrix: returns (L, d)."""
    n = len(A)
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    d = [Fraction(0)] * n
    for j in range(n):
        d[j] = Fraction(A[j][j]) - sum(L[j][k] ** 2 * d[k] for k in range(j))
        if d[j] <= 0:
            raise ValueError("matrix is not positive definite")
        for i in range(j + 1, n):
            L[i][j] = (Fraction(A[i][j]) - sum(L[i][k] * L[j][k] * d[k] for k in range(j))) / d[j]
    return L, d


def signature(A):
    """Signature of a symmetric rational matrix via exact congruence diagonalisation."""
    M = [[Fraction(x) for x in r] for r in A]
    n = len(M)
    pos = neg = 0
    active = list(range(n))
    while active:
        p = next((i for i in active if M[i][i] != 0), None)
        if p is None:
            pair = next(((i, j) for i in active for j in active if i < j and M[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # row/col i += row/col j makes the (i, i) entry 2 M[i][j] != 0
            for c in range(n):
                M[i][c] += M[j][c]
            for r in range(n):
                M[r][i] += M[r][j]
            p = i
        piv = M[p][p]
        if piv > 0:
            pos += 1
        else:
            neg += 1
        active.remove(p)
        for i in active:
            f = M[i][p] / piv
            if f:
                for c in range(n):
                    M[i][c] -= f * M[p][c]
        for i in active:
            M[p][i] = M[i][p] = Fraction(0)
    return pos - neg


# -- linking data --------------------------------------------------------------


def linking_matrix(g):
    """Diagonal = weights, 1 for every edge, rows/columns in vertex order."""
    idx = g.index
    n = len(g.vertices)
    W = [[0] * n for _ in range(n)]
    for v, i in idx.items():
        W[i][i] = g.weights[v]
    for e in g.edges:
        a, b = tuple(e)
        W[idx[a]][idx[b]] = W[idx[b]][idx[a]] = 1
    return W


@dataclass(frozen=True)
class LinkingData:
    """Block data of the linking matrix with respect to V1 | V>=2.

    ``S`` is the V>=2 block of ``-W^{-1}`` (positive definite for admissible
    graphs), ``T = -W1^{-1} W_{1,>=2}`` and ``Sinv = S^{-1}``.
    """

    graph: object
    partition: object
    W: List[List[int]]
    W1: List[List[int]]
    S: List[List[Fraction]]
    T: List[List[Fraction]]
    Sinv: List[List[Fraction]]
    detW: int
    detS: Fraction
    Winv: List[List[Fraction]]

    @property
    def vge2(self):
        return self.partition.vge2

    @property
    def vge3(self):
        return self.partition.vge3

    @property
    def v1(self):
        return self.partition.v1

    def S_int(self):
        """``S`` as an integer matrix (admissible graphs only)."""
        out = []
        for r in self.S:
            if any(Fraction(x).denominator != 1 for x in r):
                raise ValueError("S is not integral")
            out.append([int(x) for x in r])
        return out

    def vge3_positions(self):
        pos = {v: i for i, v in enumerate(self.vge2)}
        return [pos[v] for v in self.vge3]

    def weight(self, v):
        return self.graph.weights[v]

    def phi(self):
        """Sum over V of (w_v + 3) plus sum over leaves of 1/w_i (exact)."""
        g = self.graph
        return Fraction(sum(w + 3 for w in g.weights.values())) + sum(
            (Fraction(1, g.weights[i]) for i in self.v1), Fraction(0)
        )


def block_inverse(W, partition, graph=None):
    """Schur-complement inverse of ``W`` with respect to ``V1 | V>=2``.

    The block identity reads ``W^{-1} = -[T; I] S [T^t I] + diag(W1^{-1}, 0)``
    where ``S`` is positive definite for negative definite ``W``.
    """
    order = list(graph.vertices) if graph is not None else None
    idx = {v: i for i, v in enumerate(order)}
    i1 = [idx[v] for v in partition.v1]
    i2 = [idx[v] for v in partition.vge2]
    W1 = submatrix(W, i1, i1)
    W12 = submatrix(W, i1, i2)
    W22 = submatrix(W, i2, i2)
    try:
        W1inv = inverse(W1)
    except SingularMatrix:
        raise SingularBlock("W1 is singular") from None
    if i1:
        T = [[-x for x in r] for r in matmul(W1inv, W12)]
        corr = matmul(transpose(W12), matmul(W1inv, W12))
    else:
        T = []
        corr = [[0] * len(i2) for _ in i2]
    schur = [[Fraction(a) - b for a, b in zip(ra, rb)] for ra, rb in zip(W22, corr)]
    try:
        S = [[-x for x in r] for r in inverse(schur)] if schur else []
    except SingularMatrix:
        raise SingularBlock("Schur complement is singular") from None
    Sinv = [[-x for x in r] for r in schur]
    detW = det_bareiss(W)
    if detW == 0:
        raise SingularBlock("W is singular")
    Winv = inverse(W)
    detS = det_rational(S) if S else Fraction(1)
    return LinkingData(graph, partition, W, W1, S, T, Sinv, detW, detS, Winv)


def linking_data(g):
    from .graph import degree_partition

    part = degree_partition(g)
    return block_inverse(linking_matrix(g), part, g)


def reassemble_inverse(ld):
    """Rebuild ``W^{-1}`` (vertex order) from the block identity."""
    n = len(ld.W)
    g = ld.graph
    idx = g.index
    i1 = [idx[v] for v in ld.v1]
    i2 = [idx[v] for v in ld.vge2]
    n1 = len(i1)
    TI = [list(r) for r in ld.T] + [[Fraction(int(i == j)) for j in range(len(i2))] for i in range(len(i2))]
    core = matmul(TI, matmul(ld.S, transpose(TI))) if i2 else [[Fraction(0)] * n1 for _ in range(n1)]
    W1inv = inverse(ld.W1) if n1 else []
    block = [[-x for x in r] for r in core]
    for a in range(n1):
        for b in range(n1):
            block[a][b] += W1inv[a][b]
    order = i1 + i2
    out = [[Fraction(0)] * n for _ in range(n)]
    for a, ia in enumerate(order):
        for b, ib in enumerate(order):
            out[ia][ib] = block[a][b]
    return out


# -- Smith normal form and coset representatives ------------------------------


def smith_normal_form(A):
    """Return ``(U, D, V)`` with ``A = U D V``, ``U, V`` unimodular, ``D`` diagonal.

    Row/column reduction that always moves the smallest nonzero entry of the
    active block into pivot position.  Diagonal entries are made nonnegative
    and divisibility-ordered.
    """
    n = len(A)
    if n == 0:
        return [], [], []
    m = len(A[0])
    D = [list(map(int, r)) for r in A]
    # track P A Q = D, then A = P^{-1} D Q^{-1}
    Pinv = identity(n)
    Qinv = identity(m)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        for r in Pinv:
            r[i], r[j] = r[j], r[i]

    def swap_cols(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        Qinv[i], Qinv[j] = Qinv[j], Qinv[i]

    def add_row(dst, src, f):
        # row_dst += f row_src  =>  Pinv col_src -= f col_dst
        D[dst] = [a + f * b for a, b in zip(D[dst], D[src])]
        for r in Pinv:
            r[src] -= f * r[dst]

    def add_col(dst, src, f):
        for r in D:
            r[dst] += f * r[src]
        Qinv[src] = [a - f * b for a, b in zip(Qinv[src], Qinv[dst])]

    def negate_row(i):
        D[i] = [-x for x in D[i]]
        for r in Pinv:
            r[i] = -r[i]

    for t in range(min(n, m)):
        while True:
            nz = [(abs(D[i][j]), i, j) for i in range(t, n) for j in range(t, m) if D[i][j] != 0]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            done = True
            for i in range(t + 1, n):
                q = D[i][t] // D[t][t]
                if q:
                    add_row(i, t, -q)
                if D[i][t]:
                    done = False
            for j in range(t + 1, m):
                q = D[t][j] // D[t][t]
                if q:
                    add_col(j, t, -q)
                if D[t][j]:
                    done = False
            if not done:
                continue
            bad = next(
                ((i, j) for i in range(t + 1, n) for j in range(t + 1, m) if D[i][j] % D[t][t]), None
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if D[t][t] < 0:
            negate_row(t)
    return Pinv, D, Qinv


@dataclass
class CosetSystem:
    """Representatives of Z^n / A Z^n from the Smith form ``A = U D V``."""

    modulus_matrix: List[List[int]]
    U: List[List[int]]
    D: List[List[int]]
    V: List[List[int]]

    @property
    def diag(self):
        return [self.D[i][i] for i in range(len(self.D))]

    @property
    def size(self):
        return math.prod(self.diag)

    def rep(self, idx):
        """The representative with mixed-radix counter value ``idx``."""
        y = []
        for d in self.diag:
            idx, r = divmod(idx, d)
            y.append(r)
        return matvec(self.U, y)

    def reps(self, start=0, stop=None):
        stop = self.size if stop is None else min(stop, self.size)
        U = self.U
        ranges = [range(d) for d in reversed(self.diag)]
        n = len(self.diag)
        count = 0
        for ys in itertools.product(*ranges):
            if count >= stop:
                return
            if count >= start:
                y = ys[::-1]
                yield [sum(U[i][j] * y[j] for j in range(n)) for i in range(n)]
            count += 1

    def __iter__(self):
        return self.reps()

    def chunks(self, parts):
        """Disjoint sub-ranges of the counter covering all representatives."""
        size = self.size
        parts = max(1, min(parts, size))
        bounds = [size * i // parts for i in range(parts + 1)]
        return [(bounds[i], bounds[i + 1]) for i in range(parts)]

    def reduce(self, x):
        """Canonical representative of ``x`` modulo ``A Z^n``."""
        y = matvec(inverse_unimodular(self.U), x)
        y = [int(a) % d for a, d in zip(y, self.diag)]
        return matvec(self.U, y)


def inverse_unimodular(U):
    inv = inverse(U)
    return [[int(x) for x in r] for r in inv]


def coset_reps(A):
    if det_bareiss(A) == 0:
        raise SingularMatrix("modulus matrix is singular")
    U, D, V = smith_normal_form(A)
    return CosetSystem([list(r) for r in A], U, D, V)


# -- ellipsoid enumeration ----------------------------------------------------


def ellipsoid_points(A, center, bound, extra=0):
    """All integer ``n`` with ``(n + c)^T A (n + c) <= bound`` as an int64 array.

    ``A`` is symmetric positive definite (rational), ``c`` rational.  The
    enumeration uses the exact LDL^T factorisation; the per-coordinate ranges
    are computed in floating point and widened by ``1 + extra`` so that no
    point is missed.  Callers filter exactly when they need exact membership.
    """
    m = len(A)
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if bound < 0:
        return np.zeros((0, m), dtype=np.int64)
    L, d = ldl(A)
    Lf = [[float(x) for x in r] for r in L]
    df = [float(x) for x in d]
    cf = [float(Fraction(x)) for x in center]
    B = float(bound) * (1 + 1e-12) + 1e-9
    pad = 1 + extra
    out = []
    # y = n + c; q = sum_j d_j (y_j + sum_{i>j} L_ij y_i)^2
    y = [0.0] * m
    n_cur = [0] * m

    def rec(j, rem):
        shift = sum(Lf[i][j] * y[i] for i in range(j + 1, m))
        r = math.sqrt(max(rem, 0.0) / df[j])
        lo = math.floor(-shift - r - cf[j]) - pad
        hi = math.ceil(-shift + r - cf[j]) + pad
        if j == 0:
            ns = np.arange(lo, hi + 1, dtype=np.int64)
            vals = df[0] * (ns + cf[0] + shift) ** 2
            keep = ns[vals <= rem + 1e-9 * (1 + abs(rem)) + 2 * df[0] * (2 * pad + 1) * 0]
            if len(keep):
                block = np.empty((len(keep), m), dtype=np.int64)
                block[:, 0] = keep
                for i in range(1, m):
                    block[:, i] = n_cur[i]
                out.append(block)
            return
        for nj in range(lo, hi + 1):
            yj = nj + cf[j]
            val = df[j] * (yj + shift) ** 2
            if val > rem + 1e-9 * (1 + abs(rem)) and extra == 0:
                continue
            y[j] = yj
            n_cur[j] = nj
            rec(j - 1, rem - val)

    rec(m - 1, B)
    if not out:
        return np.zeros((0, m), dtype=np.int64)
    return np.concatenate(out)
