"""Signed half-character data attached to the vertices of degree at least two."""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from .errors import NotHighDegree
from .ratfunc import QSeries


@dataclass(frozen=True)
class CharEntry:
    alpha: Fraction
    sign: int
    leaf_signs: Tuple[Tuple[str, int], ...]


@dataclass(frozen=True)
class HalfCharacter:
    vertex: str
    degree: int
    M: int
    entries: Tuple[CharEntry, ...]

    @property
    def denominator(self):
        return 2 * abs(self.M)

    @property
    def n_leaves(self):
        return len(self.entries[0].leaf_signs)

    def alphas(self):
        return [e.alpha for e in self.entries]

    def by_leaf_signs(self):
        """Entries in lexicographic order of the leaf-sign vector."""
        return sorted(self.entries, key=lambda e: tuple(s for _, s in e.leaf_signs))


def half_char(ld, v):
    part = ld.partition
    if v not in part.vge2:
        raise NotHighDegree(f"vertex {v!r} has degree {part.degree.get(v)}")
    deg = part.degree[v]
    bar = part.leaf_nbrs[v]
    w = ld.graph.weights
    base = Fraction(deg, 2) - 1
    entries = []
    for signs in itertools.product((1, -1), repeat=len(bar)):
        alpha = base + sum((Fraction(l, 2 * w[i]) for l, i in zip(signs, bar)), Fraction(0))
        sign = 1
        for l in signs:
            sign *= l
        entries.append(CharEntry(alpha, sign, tuple(zip(bar, signs))))
    entries.sort(key=lambda e: e.alpha)
    return HalfCharacter(v, deg, part.leaf_prod[v], tuple(entries))


def eps_moment(hc, n):
    """Sum of sign * alpha**n over the entries."""
    return sum((e.sign * e.alpha**n for e in hc.entries), Fraction(0))


def char_qseries(hc):
    return QSeries.from_terms((e.alpha, e.sign) for e in hc.entries)


@dataclass(frozen=True)
class ProductCharacter:
    """Cartesian product of the half-characters over ``V>=2`` (in that order)."""

    vertices: Tuple[str, ...]
    per_vertex: Dict[str, HalfCharacter]
    entries: Tuple[Tuple[Tuple[Fraction, ...], int], ...]


def product_char(ld):
    verts = tuple(ld.vge2)
    hcs = {v: half_char(ld, v) for v in verts}
    entries = []
    for combo in itertools.product(*(hcs[v].by_leaf_signs() for v in verts)):
        sign = 1
        for e in combo:
            sign *= e.sign
        entries.append((tuple(e.alpha for e in combo), sign))
    return ProductCharacter(verts, hcs, tuple(entries))
