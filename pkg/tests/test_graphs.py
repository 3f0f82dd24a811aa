from importlib import resources

import pytest

from oracles import bipartite_brute, directed_basis, read_text_graph, trace_faces
from perqwalk.graphs import (DisconnectedGraphError, DuplicateLabelError, GraphError, GraphParseError,
                             NonPlanarEmbeddingError, build_state_graph, corpus_graph, corpus_names,
                             faces, format_graph, is_bipartite, load_graph, parse_graph)


def corpus_text(name):
    return (resources.files("perqwalk") / "corpus" / f"{name}.g").read_text()


# ---------------------------------------------------------------- parse_graph

def test_parse_three_vertex_line():
    g = parse_graph("vertices 3\nedge B 0 1\nedge C 1 2\n")
    assert g.vertex_count == 3
    assert g.edge_count == 2
    assert g.labels == ["B", "C"]
    assert not g.has_embedding


def test_parse_single_vertex():
    g = parse_graph("vertices 1\n")
    assert g.vertex_count == 1 and g.edge_count == 0


def test_parse_cube_simple_and_bipartite(cube):
    assert (cube.vertex_count, cube.edge_count) == (8, 12)
    assert cube.has_embedding
    assert is_bipartite(cube)[0]


def test_parse_comments_and_rotation():
    g = parse_graph("# c\nvertices 3  # header\nedge A 0 1\nedge B 1 2\nedge C 2 0\n"
                    "rotation 0: C A\nrotation 1: A B\nrotation 2: B C\n")
    assert g.incident(0) == ("C", "A")


@pytest.mark.parametrize("text, err", [
    ("edge A 0 1\n", GraphParseError),
    ("vertices 2\nedge A 0 5\n", GraphParseError),
    ("vertices 2\nbogus\n", GraphParseError),
    ("vertices 3\nedge A 0 1\n", DisconnectedGraphError),
    ("vertices 2\nedge A 0 1\nedge A 1 0\n", DuplicateLabelError),
    ("vertices 2\nedge A 0 1\nedge B 0 1\n", GraphError),
    ("vertices 2\nedge A 0 0\n", GraphError),
])
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_graph(text)


def test_parse_error_reports_line():
    with pytest.raises(GraphParseError) as info:
        parse_graph("vertices 2\n\nedge A 0 x\n")
    assert info.value.lineno == 3


def test_rotation_must_list_each_edge_once():
    with pytest.raises(GraphError):
        parse_graph("vertices 3\nedge A 0 1\nedge B 1 2\nrotation 1: A A\n")


def test_format_roundtrip(cube):
    assert parse_graph(format_graph(cube)) == cube


def test_load_graph_by_name_and_path(tmp_path):
    p = tmp_path / "g.g"
    p.write_text("vertices 2\nedge A 0 1\n")
    assert load_graph(p).edge_count == 1
    assert load_graph("cube").edge_count == 12
    with pytest.raises(FileNotFoundError):
        load_graph(tmp_path / "missing.g")


# ---------------------------------------------------------------- state graph

def test_line_state_graph_matches_named_edges(path3):
    sg = build_state_graph(path3, 2)
    assert sg.dim == 6
    names = [sg.name(i) for i in range(6)]
    # a, b1 | b2, c1 | c2, d
    assert names == ["B@0", "~0.1", "B@1", "C@1", "C@2", "~2.1"]
    assert sg.partner == [2, 1, 0, 4, 3, 5]
    assert sg.loops == [1, 5]


def test_cube_state_graph_has_no_loops(cube):
    sg = build_state_graph(cube, 3)
    assert sg.dim == 24 and sg.loops == []


def test_single_vertex_three_loops():
    sg = build_state_graph(corpus_graph("single"), 3)
    assert sg.dim == 3 and sg.partner == [0, 1, 2] and sg.loops == [0, 1, 2]


def test_degree_exceeding_target_rejected(cube):
    with pytest.raises(GraphError):
        build_state_graph(cube, 2)


@pytest.mark.parametrize("name", corpus_names())
def test_state_graph_matches_text_oracle(name):
    g = corpus_graph(name)
    target = 3 if g.max_degree <= 3 else None
    sg = build_state_graph(g, target)
    n, edges, rot = read_text_graph(corpus_text(name))
    basis, partner = directed_basis(n, edges, rot, target)
    assert [(e.origin, e.label) for e in sg.edges] == basis
    assert sg.partner == partner
    assert all(partner[partner[i]] == i for i in range(len(partner)))
    assert sum(sg.degree(v) for v in range(n)) == sg.dim
    assert sum(1 for e in sg.edges if not e.is_loop) == 2 * g.edge_count
    flat = sorted(i for row in sg.out for i in row)
    assert flat == list(range(sg.dim))


# ---------------------------------------------------------------- faces

def test_cube_faces_all_even(cube):
    fl = faces(cube)
    assert len(fl) == 6
    assert all(f.length == 4 and f.is_even for f in fl)
    outer = [f for f in fl if f.is_outer]
    assert len(outer) == 1 and set(outer[0].labels) == {"x45", "x67", "y46", "y57"}


def test_triangle_faces():
    fl = faces(corpus_graph("triangle"))
    assert sorted(f.length for f in fl) == [3, 3]
    assert all(f.parity == "odd" for f in fl)
    assert sum(f.is_outer for f in fl) == 1


def test_honeycomb_inner_faces_hexagonal():
    g = corpus_graph("honeycomb")
    fl = faces(g)
    inner = [f for f in fl if not f.is_outer]
    assert len(inner) == 7 and all(f.length == 6 for f in inner)
    n, edges, rot = read_text_graph(corpus_text("honeycomb"))
    assert sorted(trace_faces(n, edges, rot)) == sorted(f.length for f in fl)


@pytest.mark.parametrize("name", [n for n in corpus_names() if n != "single"])
def test_faces_cover_each_directed_edge_once(name):
    g = corpus_graph(name)
    fl = faces(g)
    walked = sorted(d for f in fl for d in f.walk)
    assert walked == list(range(2 * g.edge_count))
    assert len(fl) + g.vertex_count - g.edge_count == 2
    n, edges, rot = read_text_graph(corpus_text(name))
    assert sorted(trace_faces(n, edges, rot)) == sorted(f.length for f in fl)


def test_outer_face_without_hint_is_longest():
    fl = faces(corpus_graph("naphthalene"))
    outer = [f for f in fl if f.is_outer][0]
    assert outer.length == max(f.length for f in fl) == 10


def test_nonplanar_rotation_rejected():
    # K4 with a rotation system of genus 1
    text = ("vertices 4\nedge a 0 1\nedge b 0 2\nedge c 0 3\nedge d 1 2\nedge e 1 3\nedge f 2 3\n"
            "rotation 0: a b c\nrotation 1: a d e\nrotation 2: b d f\nrotation 3: c e f\n")
    g = parse_graph(text)
    with pytest.raises(NonPlanarEmbeddingError):
        faces(g)


def test_faces_need_rotation(path3):
    with pytest.raises(GraphError):
        faces(parse_graph("vertices 3\nedge A 0 1\nedge B 1 2\nedge C 2 0\n"))


# ---------------------------------------------------------------- bipartite

def test_bipartite_examples(cube):
    ok, (a, b) = is_bipartite(cube)
    assert ok and len(a) == len(b) == 4
    assert all((e.a in a) != (e.b in a) for e in cube.edges)
    assert is_bipartite(corpus_graph("triangle")) == (False, None)


@pytest.mark.parametrize("name", ["noncolorable", "prism", "honeycomb", "path3", "k4", "naphthalene"])
def test_bipartite_against_brute_force(name):
    n, edges, _ = read_text_graph(corpus_text(name))
    assert is_bipartite(corpus_graph(name))[0] == bipartite_brute(n, edges)
