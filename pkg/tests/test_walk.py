import json

import numpy as np
import pytest

from conftest import line_walk
from oracles import directed_basis, grover_formula, read_text_graph, reflect_oracle
from perqwalk.graphs import GraphError, build_state_graph, corpus_graph, format_graph, parse_graph
from perqwalk.walk import (CoinSpec, NumericalInstabilityError, PermutationSpec, WalkError, WalkSpec,
                           apply_fixed, grover_coin, grover_walk, hadamard_coin, load_walk, reflecting_shift,
                           relabel, step_operator, unitarity_defect, walk_from_dict, walk_to_dict)

# Named basis of the three-vertex line: the loop at v1 is "a", the paired
# edge leaving v1 is "b1", and so on.  Loops come last in slot order here.
LINE = {"a": 1, "b1": 0, "b2": 2, "c1": 3, "c2": 4, "d": 5}


def ket(dim, i):
    v = np.zeros(dim, dtype=complex)
    v[i] = 1
    return v


# ---------------------------------------------------------------- coins

def test_grover_coin_degree_three():
    expected = np.array([[-1, 2, 2], [2, -1, 2], [2, 2, -1]]) / 3
    assert np.allclose(grover_coin(3), expected, atol=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 7])
def test_grover_coin_formula_and_unitarity(d):
    g = grover_coin(d)
    assert np.allclose(g, grover_formula(d))
    assert unitarity_defect(g) < 1e-14
    assert np.allclose(g @ np.ones(d), np.ones(d))


def test_grover_degree_one_is_identity():
    assert np.allclose(grover_coin(1), [[1]])


def test_hadamard_and_relabel():
    h = hadamard_coin()
    x = np.array([[0, 1], [1, 0]])
    assert np.allclose(relabel(h, [1, 0]), x @ h @ x)
    assert unitarity_defect(h) < 1e-15


def test_nonunitary_coin_rejected(path3):
    sg = build_state_graph(path3, 2)
    with pytest.raises(WalkError):
        WalkSpec(sg, CoinSpec.preset(sg, "grover", {1: np.ones((2, 2))}), PermutationSpec.preset(sg))


def test_wrong_block_size_rejected(path3):
    sg = build_state_graph(path3, 2)
    with pytest.raises(WalkError):
        WalkSpec(sg, CoinSpec.preset(sg, "grover", {1: np.eye(3)}), PermutationSpec.preset(sg))
    with pytest.raises(WalkError):
        CoinSpec.preset(build_state_graph(path3, 3), "hadamard")


def test_bad_variant(cube):
    sg = build_state_graph(cube, 3)
    with pytest.raises(WalkError):
        WalkSpec(sg, CoinSpec.preset(sg), PermutationSpec.preset(sg), "U2")


# ---------------------------------------------------------------- reflecting shift

def test_reflect_on_line_with_b_open(path3):
    sg = build_state_graph(path3, 2)
    r = reflecting_shift(sg, {"B"})
    expected = {"a": "a", "b1": "b2", "b2": "b1", "c1": "c1", "c2": "c2", "d": "d"}
    for src, dst in expected.items():
        assert np.allclose(r @ ket(6, LINE[src]), ket(6, LINE[dst]))


def test_reflect_all_closed_is_identity(cube):
    sg = build_state_graph(cube, 3)
    assert np.array_equal(reflecting_shift(sg, set()), np.eye(24))


def test_reflect_unknown_label(cube):
    with pytest.raises(GraphError):
        reflecting_shift(build_state_graph(cube, 3), {"nope"})


@pytest.mark.parametrize("open_labels", [None, set(), {"x01", "z37"}, {"y02", "y13", "y46", "y57"}])
def test_reflect_matches_oracle(cube, open_labels):
    sg = build_state_graph(cube, 3)
    n, edges, rot = read_text_graph(format_graph(cube))
    basis, partner = directed_basis(n, edges, rot, 3)
    labels = set(cube.labels) if open_labels is None else open_labels
    r = reflecting_shift(sg, open_labels)
    assert np.array_equal(r, reflect_oracle(basis, partner, labels))
    assert np.array_equal(r @ r, np.eye(24))
    assert np.array_equal(r, r.T)


# ---------------------------------------------------------------- shift and step

def test_line_swap_shift_moves_forward(path3):
    w = load_walk("line-shift", path3)
    s = step_operator(w)
    cycle = ["a", "b1", "c1", "d", "c2", "b2", "a"]
    for src, dst in zip(cycle, cycle[1:]):
        assert np.allclose(s @ ket(6, LINE[src]), ket(6, LINE[dst]))


def test_hadamard_line_one_step():
    # five vertices at positions -2..2; rotation lists (left, right)
    g = parse_graph("vertices 5\nedge e0 0 1\nedge e1 1 2\nedge e2 2 3\nedge e3 3 4\n"
                    "rotation 0: e0\nrotation 1: e0 e1\nrotation 2: e1 e2\nrotation 3: e2 e3\nrotation 4: e3\n")
    sg = build_state_graph(g, 2)
    # the coin acts in the (right-moving, left-moving) order; slots are (left, right)
    coin = relabel(hadamard_coin(), [1, 0])
    w = WalkSpec(sg, CoinSpec.preset(sg, "hadamard", {v: coin for v in (1, 2, 3)}),
                 PermutationSpec.preset(sg, "swap"), "U1")
    minus_at_0 = ket(sg.dim, sg.index("e1", 2))
    plus_at_1 = ket(sg.dim, sg.index("e3", 3))
    minus_at_m1 = ket(sg.dim, sg.index("e0", 1))
    assert np.allclose(step_operator(w) @ minus_at_0, (plus_at_1 - minus_at_m1) / np.sqrt(2))


def test_identity_walk_closed_is_identity():
    g = corpus_graph("single")
    sg = build_state_graph(g, 3)
    w = WalkSpec(sg, CoinSpec.preset(sg, "identity"), PermutationSpec.preset(sg))
    assert np.array_equal(step_operator(w, set()), np.eye(3))


def test_variant_relation(cube_walk):
    w1 = cube_walk.with_variant("U1")
    for k in (None, {"x01"}, set()):
        u3 = step_operator(cube_walk, k)
        u1 = step_operator(w1, k)
        assert np.allclose(u3, cube_walk.C @ u1 @ cube_walk.C.conj().T, atol=1e-14)


@pytest.mark.parametrize("shift", ["identity", "cw", "ccw", "transporting"])
def test_step_unitary(cube, shift):
    w = grover_walk(cube, shift)
    for k in (None, set(), {"x01", "y02"}):
        assert unitarity_defect(step_operator(w, k)) < 1e-13


def test_cw_and_ccw_inverse_blocks(cube):
    sg = build_state_graph(cube, 3)
    pcw = PermutationSpec.preset(sg, "cw").matrix(sg)
    pccw = PermutationSpec.preset(sg, "ccw").matrix(sg)
    assert np.array_equal(pcw @ pccw, np.eye(24))
    # cw sends each slot to the next one in rotation order
    i = sg.index("x01", 0)
    assert np.argmax(pcw[:, i]) == sg.index("z04", 0)


def test_transporting_needs_bipartite():
    sg = build_state_graph(corpus_graph("triangle"), 3)
    with pytest.raises(WalkError):
        PermutationSpec.preset(sg, "transporting")


def test_permutation_kinds(cube):
    sg = build_state_graph(cube, 3)
    spec = PermutationSpec.preset(sg, "transporting")
    assert {spec.kind(v) for v in range(8)} == {"cw", "ccw"}
    assert PermutationSpec.preset(sg, ["identity"] * 7 + [[1, 0, 2]]).kind(7) is None
    with pytest.raises(WalkError):
        PermutationSpec.preset(sg, ["identity"] * 7 + [[0, 0, 2]])
    with pytest.raises(WalkError):
        PermutationSpec.preset(sg, ["cw"] * 3)


def test_apply_fixed_matches_power(cube_walk, cube):
    rng = np.random.default_rng(3)
    psi = rng.normal(size=24) + 1j * rng.normal(size=24)
    psi /= np.linalg.norm(psi)
    k = {"x01", "y13", "z26"}
    u = step_operator(cube_walk, k)
    assert np.allclose(apply_fixed(psi, cube_walk, k, 2), u @ u @ psi)
    assert np.allclose(apply_fixed(psi, cube_walk, k, 0), psi)
    with pytest.raises(WalkError):
        apply_fixed(2 * psi, cube_walk, k, 1)


def test_norm_drift_detected(path3):
    sg = build_state_graph(path3, 2)
    bad = WalkSpec(sg, CoinSpec.preset(sg, "grover", {1: 1.01 * np.eye(2)}), PermutationSpec.preset(sg),
                   validate=False)
    psi = ket(6, 2)
    with pytest.raises(NumericalInstabilityError):
        apply_fixed(psi, bad, None, 50)


# ---------------------------------------------------------------- JSON

def test_walk_json_roundtrip(cube):
    w = grover_walk(cube, "transporting")
    data = json.loads(json.dumps(walk_to_dict(w, 3)))
    w2 = walk_from_dict(data, cube)
    assert np.allclose(step_operator(w), step_operator(w2))


def test_walk_dict_forms(path3, tmp_path):
    w = walk_from_dict({"target_degree": 2, "coin": {"default": "grover", "vertices": {"1": "hadamard"}},
                        "permutation": {"default": "identity", "vertices": {"1": "swap"}}, "variant": "U1"},
                       path3)
    assert np.allclose(w.coin.blocks[1], hadamard_coin())
    assert w.permutation.kind(1) == "cw" and w.variant == "U1"
    p = tmp_path / "w.json"
    p.write_text(json.dumps({"target_degree": 2, "coin": "hadamard"}))
    assert np.allclose(load_walk(p, path3).coin.blocks[0], hadamard_coin())
    assert load_walk('{"target_degree": 2}', path3).dim == 6
    with pytest.raises(FileNotFoundError):
        load_walk("no-such-preset", path3)


@pytest.mark.parametrize("name", ["grover-reflect", "grover-cyclic", "grover-transporting"])
def test_cube_presets(cube, name):
    w = load_walk(name, cube)
    assert w.dim == 24 and unitarity_defect(step_operator(w)) < 1e-13


def test_line_presets(path3):
    assert np.allclose(step_operator(load_walk("line-grover", path3)),
                       step_operator(line_walk(path3, "grover")))
    assert np.allclose(step_operator(load_walk("line-hadamard", path3)),
                       step_operator(line_walk(path3, "hadamard")))
