"""Sparse q-series with rational exponents, and the per-vertex rational functions G_v."""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import mpmath

from .errors import PoleAtInput
from .hp import root_of_unity

# -- q-series ------------------------------------------------------------------


def _lcm(a, b):
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class QSeries:
    """Finite (truncated) series sum c_r q^r with exact rational r.

    ``bound`` is the truncation cutoff: the series is exact for exponents
    ``<= bound`` and says nothing above it.  ``None`` means exact (finite).
    """

    terms: Tuple[Tuple[Fraction, object], ...] = ()
    bound: Optional[Fraction] = None

    @classmethod
    def from_terms(cls, pairs, bound=None):
        acc = {}
        for r, c in pairs:
            r = Fraction(r)
            if bound is not None and r > bound:
                continue
            acc[r] = acc.get(r, 0) + c
        terms = tuple(sorted((r, c) for r, c in acc.items() if c != 0))
        return cls(terms, None if bound is None else Fraction(bound))

    @classmethod
    def monomial(cls, r, c=1):
        return cls.from_terms([(r, c)])

    def as_dict(self):
        return dict(self.terms)

    def coeff(self, r):
        return self.as_dict().get(Fraction(r), 0)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def min_exponent(self):
        return self.terms[0][0] if self.terms else None

    @property
    def denominator(self):
        d = 1
        for r, _ in self.terms:
            d = _lcm(d, r.denominator)
        return d

    def _bound_with(self, other):
        bs = [b for b in (self.bound, other.bound) if b is not None]
        return min(bs) if bs else None

    def __add__(self, other):
        return QSeries.from_terms(list(self.terms) + list(other.terms), self._bound_with(other))

    def __neg__(self):
        return QSeries(tuple((r, -c) for r, c in self.terms), self.bound)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return QSeries.from_terms(((r, c * a) for r, a in self.terms), self.bound)

    def shift(self, s):
        """Multiply by q^s."""
        s = Fraction(s)
        return QSeries(tuple((r + s, c) for r, c in self.terms), None if self.bound is None else self.bound + s)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        # a truncated factor is only reliable up to its bound plus the other's lowest exponent
        bound = None
        if self.bound is not None and other.terms:
            bound = self.bound + other.min_exponent
        if other.bound is not None and self.terms:
            b2 = other.bound + self.min_exponent
            bound = b2 if bound is None else min(bound, b2)
        pairs = ((r1 + r2, c1 * c2) for r1, c1 in self.terms for r2, c2 in other.terms)
        return QSeries.from_terms(pairs, bound)

    __rmul__ = scale

    def truncate(self, bound):
        bound = Fraction(bound)
        if self.bound is not None:
            bound = min(bound, self.bound)
        return QSeries.from_terms(self.terms, bound)

    def __eq__(self, other):
        return isinstance(other, QSeries) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def to_json(self):
        D = self.denominator
        out = {"denominator": D, "terms": [[int(r * D), _jsonable(c)] for r, c in self.terms]}
        if self.bound is not None:
            out["bound"] = str(self.bound)
        return out

    @classmethod
    def from_json(cls, obj):
        D = obj["denominator"]
        bound = Fraction(obj["bound"]) if "bound" in obj else None
        return cls.from_terms(((Fraction(n, D), _unjson(c)) for n, c in obj["terms"]), bound)

    def evaluate(self, q):
        """Sum c_r q^r using the principal branch of q^r (``q`` an mpmath number)."""
        total = mpmath.mpc(0)
        for r, c in self.terms:
            c = Fraction(c)
            total += (mpmath.mpf(c.numerator) / c.denominator) * mpmath.power(q, mpmath.mpf(r.numerator) / r.denominator)
        return total


def _jsonable(c):
    if isinstance(c, Fraction):
        return int(c) if c.denominator == 1 else str(c)
    return c


def _unjson(c):
    return Fraction(c) if isinstance(c, str) else c


# -- binomials and the polynomial weight ----------------------------------------


def binomial_ext(m, l):
    """m!/(l!(m-l)!) for 0 <= l <= m, 1 when m == -1, 0 otherwise."""
    if 0 <= l <= m:
        return math.comb(m, l)
    if m == -1:
        return 1
    return 0


def P_vertex(n, deg):
    """(n+1)(n+2)...(n+deg-3)/(deg-3)!, a polynomial in n (1 for deg <= 3)."""
    if deg <= 3:
        return Fraction(1)
    num = 1
    for j in range(1, deg - 2):
        num *= n + j
    return Fraction(num, math.factorial(deg - 3))


def P_vertex_coeffs(deg):
    """Monomial coefficients [p_0, p_1, ...] of :func:`P_vertex` in n."""
    coeffs = [Fraction(1)]
    for j in range(1, max(deg - 2, 1)):
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i] += c * j
            nxt[i + 1] += c
        coeffs = nxt
    f = math.factorial(max(deg - 3, 0))
    return [c / f for c in coeffs]


def P_weight(n, partition):
    """Product of :func:`P_vertex` over ``V>=3`` (``n`` indexed like ``partition.vge3``)."""
    out = Fraction(1)
    for v, nv in zip(partition.vge3, n):
        out *= P_vertex(nv, partition.degree[v])
    return out


def P_binomial(n, partition):
    out = 1
    for v, nv in zip(partition.vge3, n):
        out *= binomial_ext(nv + partition.degree[v] - 3, nv)
    return out


# -- G_v ---------------------------------------------------------------------------


def _vertex_data(ld, v):
    part = ld.partition
    return part.degree[v], part.leaf_prod[v], [ld.graph.weights[i] for i in part.leaf_nbrs[v]]


def G_v_eval(ld, v, q):
    """G_v(q) at a nonzero complex ``q`` (mpmath)."""
    deg, M, ws = _vertex_data(ld, v)
    q = mpmath.mpc(q)
    if q == 0:
        raise PoleAtInput("q = 0")
    base = q**M - q**(-M)
    if deg > 2 and abs(base) == 0:
        raise PoleAtInput(f"q^(2M) = 1 at vertex {v!r}")
    val = base ** (2 - deg)
    for w in ws:
        e = M // w
        val *= q**e - q**(-e)
    return val


def G_v_root(ld, v, mu, k, t=0):
    """G_v(zeta_{2kM}^mu * exp(-t/2M)) with exact phases.

    With ``q = zeta_{2kM}^mu e^{-t/2M}`` one has ``q^M = e(mu/2k) e^{-t/2}`` and
    ``q^{M/w} = e(mu/(2kw)) e^{-t/(2w)}``, so only those phases are needed.
    """
    deg, M, ws = _vertex_data(ld, v)
    if t:
        t = mpmath.mpf(t)
        a = root_of_unity(mu, 2 * k) * mpmath.exp(-t / 2)
        base = a - 1 / a
    else:
        base = root_of_unity(mu, 2 * k) - root_of_unity(-mu, 2 * k)
    if deg > 2 and base == 0:
        raise PoleAtInput(f"pole at vertex {v!r} (mu = {mu})")
    val = base ** (2 - deg) if deg != 2 else mpmath.mpc(1)
    for w in ws:
        if t:
            b = root_of_unity(mu if w > 0 else -mu, 2 * k * abs(w)) * mpmath.exp(-t / (2 * w))
            val *= b - 1 / b
        else:
            val *= root_of_unity(mu if w > 0 else -mu, 2 * k * abs(w)) - root_of_unity(-mu if w > 0 else mu, 2 * k * abs(w))
    return val


@dataclass(frozen=True)
class LaurentG:
    """Expansion of G_v in the variable ``x = q^{sgn M}`` (valid for |x| < 1)."""

    series: QSeries
    inverted: bool


def G_v_laurent(ld, hc, v, exponent_bound):
    """Expansion of G_v about q = 0 (or q = infinity when M_v < 0).

    The identity used is G_v = (q^{2M} - 1)^{2-deg} * sum_alpha eps q^{2M alpha};
    expanding (1 - q^{2M})^{-(deg-2)} gives an overall factor (-1)^deg.
    Exponents are recorded in ``x = q^{sgn M}`` and truncated at ``exponent_bound``.
    """
    deg, M, _ = _vertex_data(ld, v)
    s = 1 if M > 0 else -1
    bound = Fraction(exponent_bound)
    sign = -1 if deg % 2 else 1
    pairs = []
    if deg <= 2:
        # finite: (q^{2M} - 1)^{2-deg} is a polynomial
        factor = [(0, 1)] if deg == 2 else [(2 * M, 1), (0, -1)]
        if deg == 0:
            factor = [(4 * M, 1), (2 * M, -2), (0, 1)]
        for e in hc.entries:
            for r, c in factor:
                pairs.append((s * (r + 2 * M * e.alpha), c * e.sign))
        return LaurentG(QSeries.from_terms(pairs, bound), M < 0)
    for e in hc.entries:
        n = 0
        while True:
            r = s * 2 * M * (n + e.alpha)
            if r > bound:
                break
            pairs.append((r, sign * e.sign * binomial_ext(n + deg - 3, n)))
            n += 1
    return LaurentG(QSeries.from_terms(pairs, bound), M < 0)


def G_v_leading(ld, v):
    """(order, coeff) with G_v(q) = coeff (q-1)^order + O((q-1)^(order+1))."""
    deg, M, ws = _vertex_data(ld, v)
    order = 2 - deg + len(ws)
    return order, Fraction(2) ** order * Fraction(M) ** (1 - deg + len(ws))
