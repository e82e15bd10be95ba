"""Plumbing graphs: weighted trees with their file formats and Neumann moves."""

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Tuple

from .errors import (
    DuplicateEdge,
    DuplicateVertex,
    GraphSyntaxError,
    NotAdmissible,
    NotATree,
    PatternMismatch,
    UnknownVertexInEdge,
)


def _edge(a, b):
    return frozenset((a, b))


@dataclass(frozen=True)
class PlumbingGraph:
    """A weighted graph; vertex order is the file order and fixes matrix indices."""

    vertices: Tuple[str, ...]
    weights: Dict[str, int]
    edges: FrozenSet[FrozenSet[str]]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "weights", dict(self.weights))
        object.__setattr__(self, "edges", frozenset(frozenset(e) for e in self.edges))

    @classmethod
    def build(cls, weighted_vertices, edges):
        """Construct from ``[(id, weight), ...]`` and ``[(a, b), ...]`` with checks."""
        verts, weights = [], {}
        for v, w in weighted_vertices:
            v = str(v)
            if v in weights:
                raise DuplicateVertex(f"vertex {v!r} declared twice")
            verts.append(v)
            weights[v] = int(w)
        es = set()
        for a, b in edges:
            a, b = str(a), str(b)
            for x in (a, b):
                if x not in weights:
                    raise UnknownVertexInEdge(f"edge ({a}, {b}) uses unknown vertex {x!r}")
            if a == b:
                raise GraphSyntaxError(f"self-loop at {a!r}")
            e = _edge(a, b)
            if e in es:
                raise DuplicateEdge(f"edge ({a}, {b}) declared twice")
            es.add(e)
        return cls(tuple(verts), weights, frozenset(es))

    @property
    def index(self):
        return {v: i for i, v in enumerate(self.vertices)}

    def neighbors(self, v):
        return sorted((next(iter(e - {v})) for e in self.edges if v in e), key=self.index.get)

    def degree(self, v):
        return sum(1 for e in self.edges if v in e)

    def edge_list(self):
        idx = self.index
        out = [tuple(sorted(e, key=idx.get)) for e in self.edges]
        return sorted(out, key=lambda p: (idx[p[0]], idx[p[1]]))

    def is_tree(self):
        n = len(self.vertices)
        if n == 0 or len(self.edges) != n - 1:
            return False
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for u in self.neighbors(v):
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == n

    def relabel(self, mapping):
        return PlumbingGraph(
            tuple(mapping[v] for v in self.vertices),
            {mapping[v]: w for v, w in self.weights.items()},
            frozenset(frozenset(mapping[x] for x in e) for e in self.edges),
        )

    def canonical(self):
        """Same graph with vertices in lexicographic order."""
        order = sorted(self.vertices)
        return PlumbingGraph(tuple(order), self.weights, self.edges)


@dataclass(frozen=True)
class DegreePartition:
    v1: Tuple[str, ...]
    v2: Tuple[str, ...]
    vge2: Tuple[str, ...]
    vge3: Tuple[str, ...]
    degree: Dict[str, int]
    leaf_nbrs: Dict[str, Tuple[str, ...]]
    leaf_prod: Dict[str, int]
    vge4: Tuple[str, ...] = field(default=())


def degree_partition(g):
    """Split vertices by degree and collect the leaf data of each high-degree vertex.

    A degree-0 vertex (the one-vertex graph) is placed in ``vge2`` so that
    ``v1`` and ``vge2`` cover the vertex set.
    """
    if not g.is_tree():
        raise NotATree("degree partition requires a tree")
    deg = {v: g.degree(v) for v in g.vertices}
    v1 = tuple(v for v in g.vertices if deg[v] == 1)
    vge2 = tuple(v for v in g.vertices if deg[v] != 1)
    vge3 = tuple(v for v in vge2 if deg[v] >= 3)
    v2 = tuple(v for v in vge2 if deg[v] < 3)
    vge4 = tuple(v for v in vge3 if deg[v] >= 4)
    leaf_set = set(v1)
    leaf_nbrs, leaf_prod = {}, {}
    for v in vge2:
        bar = tuple(u for u in g.neighbors(v) if u in leaf_set)
        leaf_nbrs[v] = bar
        m = 1
        for i in bar:
            m *= g.weights[i]
        leaf_prod[v] = m
    return DegreePartition(v1, v2, vge2, vge3, deg, leaf_nbrs, leaf_prod, vge4)


# -- text and JSON formats ---------------------------------------------------


def parse_graph(text):
    """Parse the line format (``vertex id w`` / ``edge a b``) or the JSON form."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_json(stripped)
    verts, edges = [], []
    seen_v, seen_e = set(), set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "vertex":
            if len(parts) != 3:
                raise GraphSyntaxError("expected 'vertex <id> <weight>'", lineno)
            try:
                w = int(parts[2])
            except ValueError:
                raise GraphSyntaxError(f"weight {parts[2]!r} is not an integer", lineno) from None
            if parts[1] in seen_v:
                raise DuplicateVertex(f"line {lineno}: vertex {parts[1]!r} declared twice")
            seen_v.add(parts[1])
            verts.append((parts[1], w))
        elif kind == "edge":
            if len(parts) != 3:
                raise GraphSyntaxError("expected 'edge <id> <id>'", lineno)
            a, b = parts[1], parts[2]
            for x in (a, b):
                if x not in seen_v:
                    raise UnknownVertexInEdge(f"line {lineno}: unknown vertex {x!r}")
            if a == b:
                raise GraphSyntaxError(f"self-loop at {a!r}", lineno)
            if _edge(a, b) in seen_e:
                raise DuplicateEdge(f"line {lineno}: edge ({a}, {b}) declared twice")
            seen_e.add(_edge(a, b))
            edges.append((a, b))
        else:
            raise GraphSyntaxError(f"unknown directive {kind!r}", lineno)
    return PlumbingGraph.build(verts, edges)


def _parse_json(text):
    try:
        obj = json.loads(text)
        verts = [(d["id"], d["weight"]) for d in obj["vertices"]]
        edges = [tuple(e) for e in obj.get("edges", [])]
    except (ValueError, KeyError, TypeError) as exc:
        raise GraphSyntaxError(f"bad JSON graph: {exc}") from None
    for e in edges:
        if len(e) != 2:
            raise GraphSyntaxError(f"edge {e!r} must have two endpoints")
    return PlumbingGraph.build(verts, edges)


def serialize_graph(g):
    """Canonical text form: vertices then edges, each sorted lexicographically."""
    lines = [f"vertex {v} {g.weights[v]}" for v in sorted(g.vertices)]
    pairs = sorted(tuple(sorted(e)) for e in g.edges)
    lines += [f"edge {a} {b}" for a, b in pairs]
    return "\n".join(lines) + "\n"


def graph_to_json(g):
    return {
        "vertices": [{"id": v, "weight": g.weights[v]} for v in g.vertices],
        "edges": [list(p) for p in g.edge_list()],
    }


def read_graph(path):
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


# -- standard graphs -----------------------------------------------------------


def star(center_weight, leaf_weights, center="c", names=None):
    names = names or [f"l{i}" for i in range(len(leaf_weights))]
    verts = [(center, center_weight)] + list(zip(names, leaf_weights))
    return PlumbingGraph.build(verts, [(center, n) for n in names])


def sigma237():
    """Brieskorn sphere Sigma(2,3,7): center -1, leaves -2, -3, -7."""
    return PlumbingGraph.build(
        [("c", -1), ("a", -2), ("b", -3), ("d", -7)], [("c", "a"), ("c", "b"), ("c", "d")]
    )


def h_graph(node_weights, leaves1, leaves2):
    """Two degree-3 nodes joined by an edge, each carrying two leaves."""
    verts = [("u", node_weights[0]), ("v", node_weights[1])]
    verts += [("u1", leaves1[0]), ("u2", leaves1[1]), ("v1", leaves2[0]), ("v2", leaves2[1])]
    edges = [("u", "v"), ("u", "u1"), ("u", "u2"), ("v", "v1"), ("v", "v2")]
    return PlumbingGraph.build(verts, edges)


def single_vertex(weight=-1):
    return PlumbingGraph.build([("v", weight)], [])


# -- Neumann moves -------------------------------------------------------------


def _fresh(g, base):
    i = 0
    while f"{base}{i}" in g.weights:
        i += 1
    return f"{base}{i}"


def neumann_move(g, move_id, site, direction, sign=-1, fresh=None):
    """Apply one of the three Neumann moves.

    ``site`` depends on the move and direction:

    * contract-A / contract-B / contract-C: the vertex being removed.
    * expand-A: an edge ``(u, u2)``; a vertex of weight ``sign`` is inserted.
    * expand-B: a vertex ``u``; a leaf of weight ``sign`` is attached.
    * expand-C: ``(u, w_first, moved_neighbors)``; ``u`` splits into a vertex of
      weight ``w_first`` keeping the other neighbors and one of weight
      ``w_u - w_first`` taking ``moved_neighbors``, joined through a 0-vertex.

    Weights of neighbors follow ``new = old - s`` on blow-down of a ``s``-vertex,
    which keeps ``|det W|`` fixed.
    """
    move_id = move_id.upper()
    if direction not in ("expand", "contract"):
        raise ValueError("direction must be 'expand' or 'contract'")
    if move_id not in ("A", "B", "C"):
        raise ValueError("move_id must be A, B or C")
    weights = dict(g.weights)
    edges = set(g.edges)
    verts = list(g.vertices)

    if direction == "contract":
        x = site
        if x not in weights:
            raise PatternMismatch(f"unknown vertex {x!r}")
        nb = g.neighbors(x)
        wx = weights[x]
        if move_id == "A":
            if len(nb) != 2 or wx not in (1, -1):
                raise PatternMismatch("contract-A needs a degree-2 vertex of weight +-1")
            a, b = nb
            for u in nb:
                weights[u] -= wx
            edges -= {_edge(x, a), _edge(x, b)}
            edges.add(_edge(a, b))
        elif move_id == "B":
            if len(nb) != 1 or wx not in (1, -1):
                raise PatternMismatch("contract-B needs a leaf of weight +-1")
            (a,) = nb
            weights[a] -= wx
            edges.discard(_edge(x, a))
        else:
            if len(nb) != 2 or wx != 0:
                raise PatternMismatch("contract-C needs a degree-2 vertex of weight 0")
            a, b = nb
            weights[a] += weights[b]
            edges -= {_edge(x, a), _edge(x, b)}
            for e in list(edges):
                if b in e:
                    (other,) = e - {b}
                    edges.discard(e)
                    edges.add(_edge(a, other))
            verts.remove(b)
            del weights[b]
        verts.remove(x)
        del weights[x]
        return PlumbingGraph(tuple(verts), weights, frozenset(edges))

    if sign not in (1, -1) and move_id in ("A", "B"):
        raise ValueError("sign must be +1 or -1")
    if move_id == "A":
        a, b = site
        if _edge(a, b) not in edges:
            raise PatternMismatch(f"({a}, {b}) is not an edge")
        x = fresh or _fresh(g, "x")
        edges.discard(_edge(a, b))
        edges |= {_edge(a, x), _edge(x, b)}
        weights[a] += sign
        weights[b] += sign
        weights[x] = sign
        verts.append(x)
    elif move_id == "B":
        a = site
        if a not in weights:
            raise PatternMismatch(f"unknown vertex {a!r}")
        x = fresh or _fresh(g, "x")
        edges.add(_edge(a, x))
        weights[a] += sign
        weights[x] = sign
        verts.append(x)
    else:
        a, w_first, moved = site
        if a not in weights:
            raise PatternMismatch(f"unknown vertex {a!r}")
        moved = set(moved)
        if not moved <= set(g.neighbors(a)):
            raise PatternMismatch("moved neighbors must be neighbors of the split vertex")
        x = fresh or _fresh(g, "x")
        weights[x] = 0
        b = _fresh(PlumbingGraph(tuple(verts + [x]), {**weights}, frozenset()), "y")
        weights[b] = weights[a] - w_first
        weights[a] = w_first
        for u in moved:
            edges.discard(_edge(a, u))
            edges.add(_edge(b, u))
        edges |= {_edge(a, x), _edge(x, b)}
        verts += [x, b]
    return PlumbingGraph(tuple(verts), weights, frozenset(edges))


@dataclass(frozen=True)
class ValidationReport:
    is_tree: bool
    is_negative_definite: bool
    is_unimodular: bool
    leaves_at_most_minus2: bool
    det_w: int
    messages: Tuple[str, ...] = ()

    @property
    def admissible(self):
        return self.is_tree and self.is_negative_definite and self.is_unimodular and self.leaves_at_most_minus2

    def to_dict(self):
        return {
            "admissible": self.admissible,
            "is_tree": self.is_tree,
            "is_negative_definite": self.is_negative_definite,
            "is_unimodular": self.is_unimodular,
            "leaves_at_most_minus2": self.leaves_at_most_minus2,
            "det_w": self.det_w,
            "messages": list(self.messages),
        }


def validate(g):
    """Admissibility report; never raises."""
    from .lattice import det_bareiss, is_negative_definite, linking_matrix

    W = linking_matrix(g)
    tree = g.is_tree()
    negdef = is_negative_definite(W)
    det = det_bareiss(W)
    leaves_ok = all(g.weights[v] <= -2 for v in g.vertices if g.degree(v) == 1)
    msgs = []
    if not tree:
        msgs.append("not a tree")
    if not negdef:
        msgs.append("not negative definite")
    if abs(det) != 1:
        msgs.append(f"not unimodular (det W = {det})")
    if not leaves_ok:
        msgs.append("a leaf has weight > -2")
    return ValidationReport(tree, negdef, abs(det) == 1, leaves_ok, det, tuple(msgs))


def require_admissible(g):
    rep = validate(g)
    if not rep.admissible:
        raise NotAdmissible("; ".join(rep.messages))
    return rep
