import pytest
from hypothesis import given, strategies as st

from plumbed.errors import (
    DuplicateEdge,
    DuplicateVertex,
    GraphSyntaxError,
    NotATree,
    PatternMismatch,
    UnknownVertexInEdge,
)
from plumbed.graph import (
    PlumbingGraph,
    degree_partition,
    graph_to_json,
    h_graph,
    neumann_move,
    parse_graph,
    serialize_graph,
    sigma237,
    single_vertex,
    star,
    validate,
)
from plumbed.lattice import det_bareiss, is_negative_definite, linking_matrix

from conftest import H_GRAPH


def test_parse_path():
    g = parse_graph("vertex c -1\nvertex a -2\nedge c a")
    assert g.vertices == ("c", "a")
    assert g.weights == {"c": -1, "a": -2}
    assert g.is_tree()


def test_parse_comments_and_blank_lines():
    g = parse_graph("# header\n\nvertex x -3  # trailing\n")
    assert g.weights == {"x": -3}


@pytest.mark.parametrize(
    "text, exc",
    [
        ("vertex a -2\nvertex a -3", DuplicateVertex),
        ("vertex a -2\nedge a b", UnknownVertexInEdge),
        ("vertex a -2\nvertex b -2\nedge a b\nedge b a", DuplicateEdge),
        ("vertex a x", GraphSyntaxError),
        ("node a -2", GraphSyntaxError),
        ("vertex a -2\nedge a a", GraphSyntaxError),
        ('{"vertices": 3}', GraphSyntaxError),
    ],
)
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_graph(text)


def test_syntax_error_carries_line():
    with pytest.raises(GraphSyntaxError) as info:
        parse_graph("vertex a -2\nbogus\n")
    assert info.value.line == 2


def test_sigma237_file_roundtrip(data_dir):
    import os

    with open(os.path.join(data_dir, "sigma237.txt")) as fh:
        g = parse_graph(fh.read())
    assert len(g.vertices) == 4 and len(g.edges) == 3
    again = parse_graph(serialize_graph(g))
    assert again.canonical() == g.canonical()


def test_json_form_roundtrip():
    import json

    g = H_GRAPH()
    again = parse_graph(json.dumps(graph_to_json(g)))
    assert again == g


def test_validate_sigma237():
    rep = validate(sigma237())
    assert rep.admissible
    # a negative definite 4x4 matrix has positive determinant
    assert rep.det_w == 1


def test_validate_sigma235_not_negative_definite():
    rep = validate(star(-1, [-2, -3, -5]))
    assert not rep.is_negative_definite
    assert not rep.admissible
    assert "not negative definite" in rep.messages


def test_validate_single_vertex():
    rep = validate(single_vertex(-1))
    assert rep.admissible and rep.det_w == -1


def test_validate_leaf_weight():
    rep = validate(star(-3, [-1, -2, -2]))
    assert not rep.leaves_at_most_minus2


def test_partition_sigma237():
    p = degree_partition(sigma237())
    assert set(p.v1) == {"a", "b", "d"}
    assert p.vge2 == p.vge3 == ("c",)
    assert set(p.leaf_nbrs["c"]) == {"a", "b", "d"}
    assert p.leaf_prod["c"] == -42


def test_partition_path():
    g = PlumbingGraph.build([("x", -2), ("m", -1), ("y", -5)], [("x", "m"), ("m", "y")])
    p = degree_partition(g)
    assert set(p.v1) == {"x", "y"} and p.v2 == ("m",) and p.vge3 == ()
    assert p.leaf_prod["m"] == 10


def test_partition_h_graph():
    p = degree_partition(H_GRAPH())
    assert len(p.vge3) == 2
    assert all(len(p.leaf_nbrs[v]) == 2 for v in p.vge3)


def test_partition_not_tree():
    g = PlumbingGraph.build([("a", -2), ("b", -2), ("c", -2)], [("a", "b"), ("b", "c"), ("c", "a")])
    with pytest.raises(NotATree):
        degree_partition(g)


def test_contract_b():
    g = PlumbingGraph.build([("v", -3), ("x", -1), ("l", -2)], [("v", "x"), ("v", "l")])
    out = neumann_move(g, "B", "x", "contract")
    assert out.weights == {"v": -2, "l": -2}
    assert abs(det_bareiss(linking_matrix(out))) == abs(det_bareiss(linking_matrix(g)))


def test_contract_c():
    g = PlumbingGraph.build([("a", -2), ("z", 0), ("b", -3), ("l", -2)], [("a", "z"), ("z", "b"), ("b", "l")])
    out = neumann_move(g, "C", "z", "contract")
    assert out.weights["a"] == -5 and "b" not in out.weights
    assert abs(det_bareiss(linking_matrix(out))) == abs(det_bareiss(linking_matrix(g)))


def test_contract_pattern_mismatch():
    with pytest.raises(PatternMismatch):
        neumann_move(sigma237(), "B", "a", "contract")


@pytest.mark.parametrize("sign", [1, -1])
def test_expand_contract_roundtrip(sign):
    g = sigma237()
    a = neumann_move(g, "A", ("c", "d"), "expand", sign=sign, fresh="x")
    assert neumann_move(a, "A", "x", "contract") == g
    b = neumann_move(g, "B", "a", "expand", sign=sign, fresh="x")
    assert neumann_move(b, "B", "x", "contract") == g


def _moves(g):
    out = []
    for e in g.edge_list():
        for s in (1, -1):
            out.append(("A", e, "expand", s))
    for v in g.vertices:
        for s in (1, -1):
            out.append(("B", v, "expand", s))
    return out


@given(st.data())
def test_moves_preserve_abs_det(fleet, data):
    entry = data.draw(st.sampled_from(fleet))
    g = entry.graph
    move = data.draw(st.sampled_from(_moves(g)))
    out = neumann_move(g, move[0], move[1], move[2], sign=move[3])
    assert abs(det_bareiss(linking_matrix(out))) == abs(det_bareiss(linking_matrix(g))) == 1
    # definiteness is recomputed, never assumed
    assert is_negative_definite(linking_matrix(out)) == validate(out).is_negative_definite


@given(st.data())
def test_partition_stable_under_relabel(fleet, data):
    g = data.draw(st.sampled_from(fleet)).graph
    names = list(g.vertices)
    perm = data.draw(st.permutations(names))
    mapping = {a: f"r_{b}" for a, b in zip(names, perm)}
    p, q = degree_partition(g), degree_partition(g.relabel(mapping))
    assert {mapping[v] for v in p.vge3} == set(q.vge3)
    assert {mapping[v] for v in p.v1} == set(q.v1)
    assert all(q.leaf_prod[mapping[v]] == p.leaf_prod[v] for v in p.vge2)


@given(st.data())
def test_serialize_parse_identity(fleet, data):
    g = data.draw(st.sampled_from(fleet)).graph
    text = serialize_graph(g)
    assert serialize_graph(parse_graph(text)) == text
    assert parse_graph(text).canonical() == g.canonical()


def test_h_graph_builder_shape():
    g = h_graph((-1, -7), (-2, -3), (-2, -3))
    assert len(g.vertices) == 6 and g.is_tree()
