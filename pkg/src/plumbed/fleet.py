"""Seeded generator of admissible plumbing trees of a few fixed shapes.

Weights are drawn at random except for a node weight w_x and one more weight
w_y: det W is bilinear in (w_x, w_y), so for each w_y in range the value of
w_x giving det W = (-1)^|V| is read off exactly.  Candidates failing
negative definiteness are discarded.
"""

import math
import random
from fractions import Fraction
from dataclasses import dataclass
from typing import List, Optional

from .graph import PlumbingGraph, validate
from .lattice import det_bareiss, linking_matrix


@dataclass(frozen=True)
class FleetConfig:
    count: int = 60
    seed: int = 1
    max_vertices: int = 10
    leaf_weights: tuple = (-2, -7)
    node_weights: tuple = (-1, -4)
    chain_weights: tuple = (-2, -4)
    shapes: tuple = ("star", "h", "caterpillar")
    max_attempts: int = 20_000


@dataclass(frozen=True)
class FleetEntry:
    name: str
    shape: str
    graph: PlumbingGraph
    satisfies_condition: bool
    condition_min: int

    def to_json(self):
        from .graph import graph_to_json

        return {
            "name": self.name,
            "shape": self.shape,
            "satisfies_condition": self.satisfies_condition,
            "graph": graph_to_json(self.graph),
        }


def _draw(rng, lohi):
    lo, hi = lohi
    return rng.randint(min(lo, hi), max(lo, hi))


def _skeleton(rng, shape, cfg):
    """(vertex names, edges, solved vertex, weights of the others)."""
    verts, edges, w = [], [], {}

    def add(name, weight, nbr=None):
        verts.append(name)
        w[name] = weight
        if nbr is not None:
            edges.append((nbr, name))

    def leaves(node, count):
        for j in range(count):
            add(f"{node}l{j}", _draw(rng, cfg.leaf_weights), node)

    if shape == "star":
        return _seifert_star(rng, cfg)
    if shape == "h":
        add("u", _draw(rng, cfg.node_weights))
        add("v", 0)
        chain = rng.choice((0, 0, 0, 1, 2))
        prev = "u"
        for j in range(chain):
            add(f"m{j}", _draw(rng, cfg.chain_weights), prev)
            prev = f"m{j}"
        edges.append((prev, "v"))
        leaves("u", rng.choice((2, 2, 3)))
        leaves("v", rng.choice((2, 2, 3)))
        return verts, edges, rng.choice(("u", "v")), w
    if shape == "caterpillar":
        add("a", _draw(rng, cfg.node_weights))
        add("b", _draw(rng, cfg.node_weights), "a")
        add("c", _draw(rng, cfg.node_weights), "b")
        leaves("a", 2)
        leaves("b", rng.choice((1, 2)))
        leaves("c", 2)
        return verts, edges, rng.choice(("a", "b", "c")), w
    raise ValueError(f"unknown shape {shape!r}")


def _neg_continued_fraction(a, b):
    """[c1, c2, ...] with a/b = c1 - 1/(c2 - ...), all c_j >= 2 (0 < b < a coprime)."""
    out = []
    while b:
        c = -(-a // b)
        out.append(c)
        a, b = b, c * b - a
    return out


def _seifert_star(rng, cfg):
    """Star with det W = +-1 built from pairwise coprime a_i.

    With b_i = -(A/a_i)^{-1} mod a_i (A = prod a_i) one has
    sum b_i/a_i = m - 1/A, so the central weight -m gives Euler number -1/A.
    Arms are the negative continued fractions of a_i/b_i.
    """
    for _ in range(200):
        r = rng.choice((3, 3, 3, 4))
        a = []
        while len(a) < r:
            x = rng.randint(2, 13)
            if all(math.gcd(x, y) == 1 for y in a):
                a.append(x)
            elif rng.random() < 0.05:
                break
        if len(a) < r:
            continue
        A = math.prod(a)
        arms = []
        for ai in a:
            bi = (-pow(A // ai, -1, ai)) % ai
            arms.append((ai, bi))
        m = sum(Fraction(bi, ai) for ai, bi in arms) + Fraction(1, A)
        cfs = [_neg_continued_fraction(ai, bi) for ai, bi in arms]
        if 1 + sum(len(c) for c in cfs) > cfg.max_vertices:
            continue
        verts, edges, w = ["c"], [], {"c": -int(m)}
        for i, cf in enumerate(cfs):
            prev = "c"
            for j, c in enumerate(cf):
                name = f"a{i}{j}" if j < len(cf) - 1 else f"cl{i}"
                verts.append(name)
                w[name] = -c
                edges.append((prev, name))
                prev = name
        return verts, edges, None, w
    return None


def _det_with(verts, edges, w, assign):
    g = PlumbingGraph.build([(v, assign.get(v, w[v])) for v in verts], edges)
    return det_bareiss(linking_matrix(g))


def _solutions(verts, edges, w, x, y, y_range, x_max):
    """Pairs (w_x, w_y) with det W = (-1)^n, w_y in ``y_range`` and w_x <= x_max.

    det W is multilinear in the diagonal, hence A w_x w_y + B w_x + C w_y + D.
    """
    corner = {(a, b): _det_with(verts, edges, w, {x: a, y: b}) for a in (0, 1) for b in (0, 1)}
    D = corner[0, 0]
    B = corner[1, 0] - D
    C = corner[0, 1] - D
    A = corner[1, 1] - D - B - C
    target = (-1) ** len(verts)
    out = []
    for wy in y_range:
        slope, rest = A * wy + B, C * wy + D
        if slope and (target - rest) % slope == 0:
            wx = (target - rest) // slope
            if wx <= x_max:
                out.append((wx, wy))
    return out


def condition_min(g):
    """min over V>=3 of (leaf neighbours + 2 - degree); None if V>=3 is empty."""
    vals = []
    for v in g.vertices:
        d = g.degree(v)
        if d >= 3:
            leaves = sum(1 for u in g.neighbors(v) if g.degree(u) == 1)
            vals.append(leaves + 2 - d)
    return min(vals) if vals else None


def _complete(rng, verts, edges, w, x, cfg):
    """Fix w_x and one other weight so that the tree becomes admissible, or None."""
    deg = {v: 0 for v in verts}
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    others = [v for v in verts if v != x]
    rng.shuffle(others)
    for y in others[:4]:
        lo, hi = cfg.leaf_weights if deg[y] == 1 else cfg.node_weights
        cands = _solutions(verts, edges, w, x, y, range(min(lo, hi), max(lo, hi) + 1), -1)
        rng.shuffle(cands)
        for wx, wy in cands:
            g = PlumbingGraph.build([(v, {x: wx, y: wy}.get(v, w[v])) for v in verts], edges)
            if validate(g).admissible:
                return g
    return None


def _iso_key(g):
    # weight/degree profile of each vertex and its neighbourhood; equal for isomorphic trees
    return tuple(sorted(
        (g.weights[v], g.degree(v), tuple(sorted((g.weights[u], g.degree(u)) for u in g.neighbors(v))))
        for v in g.vertices
    ))


def generate_fleet(cfg: Optional[FleetConfig] = None, **overrides) -> List[FleetEntry]:
    """Deterministic list of ``cfg.count`` distinct admissible trees."""
    cfg = cfg or FleetConfig()
    if overrides:
        cfg = FleetConfig(**{**cfg.__dict__, **overrides})
    rng = random.Random(cfg.seed)
    seen, out = set(), []
    attempts = 0
    while len(out) < cfg.count and attempts < cfg.max_attempts:
        attempts += 1
        # round robin over shapes, so that every shape is represented
        shape = cfg.shapes[(len(out) + attempts // 500) % len(cfg.shapes)]
        sk = _skeleton(rng, shape, cfg)
        if sk is None or len(sk[0]) > cfg.max_vertices:
            continue
        verts, edges, x, w = sk
        if x is None:
            g = PlumbingGraph.build([(v, w[v]) for v in verts], edges)
            if not validate(g).admissible:
                continue
        else:
            g = _complete(rng, verts, edges, w, x, cfg)
        if g is None:
            continue
        key = _iso_key(g)
        if key in seen:
            continue
        seen.add(key)
        cm = condition_min(g)
        out.append(FleetEntry(f"{shape}-{len(out):03d}", shape, g, cm is None or cm > 0, cm))
    return out


def default_fleet(count=60, seed=1):
    return generate_fleet(FleetConfig(count=count, seed=seed))
