"""Grover walks on graphs of maximum degree three.

Two families of closed-form results live here:

* trapped states (eigenvalue -1 common eigenstates of the reflecting walk),
  built from alternating-sign walks on faces, paths and padding loops;
* edge-3-colorings, which encode common eigenstates at ``e^{+-i pi/3}`` for
  walks whose local permutations are cyclic rotations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._numerics import rank
from .graphs import Face, GraphError, StateGraph, StructureGraph, build_state_graph, faces, is_bipartite
from .walk import CoinSpec, PermutationSpec, WalkSpec

ALPHA_PLUS = np.exp(1j * np.pi / 3)
ALPHA_MINUS = np.exp(-1j * np.pi / 3)
COLOR_NAMES = ("r", "g", "b")
COLOR_VALUES = np.exp(2j * np.pi * np.arange(3) / 3)  # r = 1, g = e^{2 i pi/3}, b = e^{-2 i pi/3}


def _check_degree(g: StructureGraph) -> None:
    if g.max_degree > 3:
        raise GraphError(f"maximum degree is {g.max_degree}; this construction needs <= 3")


# ---------------------------------------------------------------- dimension

def trapped_dimension(g: StructureGraph) -> int:
    """Number of independent trapped states of the reflecting Grover walk."""
    _check_degree(g)
    n = 2 * g.vertex_count - g.edge_count
    cubic = all(g.degree(v) == 3 for v in range(g.vertex_count))
    if cubic and is_bipartite(g)[0]:
        n += 1
    return n


@dataclass(frozen=True)
class RankReport:
    dependent: bool
    deficiency: int
    predicted: bool
    unknowns: int
    equations: int


def condition_rank_check(sg: StateGraph) -> RankReport:
    """Rank test of the eigenvalue -1 conditions.

    Unknowns are one value per structure edge (both directions agree) and one
    per loop; every vertex contributes the equation "entries sum to zero".
    The vertex equations are dependent exactly for bipartite, loop-free,
    3-regular graphs, and then with a one-dimensional dependency.
    """
    g = sg.structure
    _check_degree(g)
    col: dict[int, int] = {}
    k = 0
    for e in sg.edges:
        if e.is_loop or e.index < e.partner:
            col[e.index] = k
            k += 1
    for e in sg.edges:
        if not e.is_loop and e.index > e.partner:
            col[e.index] = col[e.partner]
    a = np.zeros((g.vertex_count, k))
    for v in range(g.vertex_count):
        for i in sg.out[v]:
            a[v, col[i]] += 1.0
    deficiency = g.vertex_count - rank(a) if g.vertex_count else 0
    predicted = (not sg.loops and all(sg.degree(v) == 3 for v in range(g.vertex_count))
                 and is_bipartite(g)[0])
    if deficiency > 1:
        raise ArithmeticError(f"rank deficiency {deficiency} exceeds 1")
    if bool(deficiency) != predicted:
        raise ArithmeticError("rank deficiency disagrees with the bipartite/3-regular criterion")
    return RankReport(bool(deficiency), deficiency, predicted, k, g.vertex_count)


# ---------------------------------------------------------------- trapped basis

@dataclass(frozen=True)
class TrappedState:
    kind: str  # "A", "B", "C" or "D"
    vector: np.ndarray = field(repr=False)  # integer entries
    support: tuple[str, ...]  # edge labels and loop names touched

    @property
    def eigenvalue(self) -> complex:
        return -1.0 + 0j

    def normalized(self) -> np.ndarray:
        v = self.vector.astype(complex)
        return v / np.linalg.norm(v)


def _walk_tokens(sg: StateGraph, tokens: Sequence[int]) -> np.ndarray:
    """Alternating +1/-1 along ``tokens``; paired edges write both directions."""
    vec = np.zeros(sg.dim, dtype=np.int64)
    sign = 1
    for d in tokens:
        vec[d] += sign
        p = sg.edges[d].partner
        if p != d:
            vec[p] += sign
        sign = -sign
    return vec


def _rotate_to(walk: Sequence[int], sg: StateGraph, vertex: int) -> list[int]:
    for k, d in enumerate(walk):
        if sg.edges[d].origin == vertex:
            return list(walk[k:]) + list(walk[:k])
    raise GraphError(f"vertex {vertex} is not on the face")


def _shortest_path(sg: StateGraph, sources: Sequence[int], targets: set[int]) -> list[int]:
    """Directed edges of a shortest path from some source into ``targets``.

    Among shortest paths the source with the smallest id wins, then the
    lexicographically smallest sequence of edge labels.
    """
    g = sg.structure
    dist = {t: 0 for t in targets}
    todo = deque(sorted(targets))
    while todo:
        v = todo.popleft()
        for w in g.neighbors(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                todo.append(w)
    start = min(sources, key=lambda s: (dist[s], s))
    path = []
    v = start
    while dist[v] > 0:
        options = sorted((lab, g.edge(lab).other(v)) for lab in g.incident(v))
        lab, w = next((lab, w) for lab, w in options if dist[w] == dist[v] - 1)
        path.append(sg.index(lab, v))
        v = w
    return path


def _reverse(sg: StateGraph, path: Sequence[int]) -> list[int]:
    return [sg.edges[d].partner for d in reversed(path)]


def _support(sg: StateGraph, vec: np.ndarray) -> tuple[str, ...]:
    names = []
    for i in np.flatnonzero(vec):
        e = sg.edges[i]
        name = sg.name(i) if e.is_loop else e.label
        if name not in names:
            names.append(name)
    return tuple(names)


def trapped_basis(sg: StateGraph, face_list: Sequence[Face] | None = None) -> list[TrappedState]:
    """Integer-valued basis of the eigenvalue -1 common eigenstates.

    Each state is an alternating +1/-1 walk, signed so that its lowest-index
    nonzero entry is positive.  Inner even faces give A states.  Odd inner
    faces are tied to the first odd face by a path (B states).  Loops are tied
    to the first loop (C states) when every face is even, otherwise each loop
    is tied to the first odd face (D states).  The outer face is never used.
    """
    g = sg.structure
    _check_degree(g)
    if any(sg.degree(v) > 3 for v in range(g.vertex_count)):
        raise GraphError("state graph degree exceeds 3")
    fl = list(face_list) if face_list is not None else faces(g, sg)
    inner = [f for f in fl if not f.is_outer and f.length]
    even = [f for f in inner if f.is_even]
    odd = [f for f in inner if not f.is_even]
    loops = sg.loops
    out: list[TrappedState] = []

    def add(kind, tokens):
        vec = _walk_tokens(sg, tokens)
        nz = np.flatnonzero(vec)
        if nz.size and vec[nz[0]] < 0:
            vec = -vec  # lowest-index entry carries the + sign
        out.append(TrappedState(kind, vec, _support(sg, vec)))

    for f in even:
        add("A", list(f.walk))
    if odd:
        f1 = odd[0]
        f1_vertices = sorted(set(f1.vertices))
        for f2 in odd[1:]:
            path = _shortest_path(sg, f1_vertices, set(f2.vertices))
            a1 = sg.edges[path[0]].origin if path else min(set(f1.vertices) & set(f2.vertices))
            a2 = sg.edges[path[-1]].target if path else a1
            tokens = _rotate_to(f1.walk, sg, a1) + path + _rotate_to(f2.walk, sg, a2) + _reverse(sg, path)
            add("B", tokens)
        for loop in loops:
            v = sg.edges[loop].origin
            path = _shortest_path(sg, [v], set(f1.vertices))
            a = sg.edges[path[-1]].target if path else v
            add("D", [loop] + path + _rotate_to(f1.walk, sg, a) + _reverse(sg, path) + [loop])
    elif loops:
        first = loops[0]
        v1 = sg.edges[first].origin
        for loop in loops[1:]:
            v2 = sg.edges[loop].origin
            path = _shortest_path(sg, [v1], {v2})
            add("C", [first] + path + [loop])
    return out


def check_trapped_state(sg: StateGraph, vec: np.ndarray) -> bool:
    """Exact eigenvalue -1 test for the reflecting Grover walk, in integers.

    ``d * G_d = 2 J - d I``, so ``G_d x = -x`` is ``2 * sum(x) == 0`` per vertex.
    """
    vec = np.asarray(vec)
    if not np.issubdtype(vec.dtype, np.integer):
        raise TypeError("exact check needs integer entries")
    for v in range(sg.vertex_count):
        idx = list(sg.out[v])
        d = len(idx)
        block = vec[idx]
        lhs = 2 * block.sum() - d * block  # d * G x
        if not np.array_equal(lhs, -d * block):
            return False
    return all(vec[e.index] == vec[e.partner] for e in sg.edges)


# ---------------------------------------------------------------- colorings

@dataclass(frozen=True)
class EdgeColoring:
    """Colors 0, 1, 2 (r, g, b) per directed edge of a 3-regular state graph."""

    state_graph: StateGraph = field(repr=False)
    colors: tuple[int, ...]
    alpha: complex

    def names(self) -> list[str]:
        return [COLOR_NAMES[c] for c in self.colors]

    def conjugate(self) -> "EdgeColoring":
        """Swap g and b; the result belongs to the conjugate eigenvalue."""
        return EdgeColoring(self.state_graph, tuple((-c) % 3 for c in self.colors), np.conj(self.alpha))

    def table(self) -> list[tuple[str, str]]:
        sg = self.state_graph
        return [(sg.name(i), COLOR_NAMES[c]) for i, c in enumerate(self.colors)]

    def is_consistent(self) -> bool:
        sg = self.state_graph
        for v in range(sg.vertex_count):
            if len({self.colors[i] for i in sg.out[v]}) != 3:
                return False
        return all(self.colors[e.index] == self.colors[e.partner] for e in sg.edges)


@dataclass(frozen=True)
class Conflict:
    kind: str  # "vertex": two slots at one vertex clash; "pair": partners differ
    vertex: int | None
    edges: tuple[int, int]
    message: str


def _step(kind: str | None, alpha: complex) -> int:
    plus = abs(alpha - ALPHA_PLUS) < 1e-9
    if not plus and abs(alpha - ALPHA_MINUS) > 1e-9:
        raise ValueError("alpha must be e^{i pi/3} or e^{-i pi/3}")
    if kind not in ("cw", "ccw"):
        raise ValueError("every local permutation must be a cyclic rotation")
    return 1 if (kind == "cw") == plus else -1


def edge_3_color(sg: StateGraph, perms: PermutationSpec, alpha: complex = ALPHA_PLUS) -> EdgeColoring | Conflict:
    """Propagate colors from the lowest-index edge (set to r).

    At a vertex the color advances by one step per slot, upward for
    (CW, e^{i pi/3}) and (CCW, e^{-i pi/3}) and downward otherwise; partners
    must share their color.  The first contradiction is returned as a Conflict.
    """
    n = sg.vertex_count
    if any(sg.degree(v) != 3 for v in range(n)):
        raise GraphError("edge_3_color needs a 3-regular state graph")
    steps = [_step(perms.kind(v), alpha) for v in range(n)]
    colors: list[int | None] = [None] * sg.dim
    if sg.dim == 0:
        return EdgeColoring(sg, (), alpha)
    colors[0] = 0
    todo = deque([0])
    while todo:
        i = todo.popleft()
        e = sg.edges[i]
        v = e.origin
        slots = sg.out[v]
        s = slots.index(i)
        for j, idx in enumerate(slots):
            want = (colors[i] + steps[v] * (j - s)) % 3
            if colors[idx] is None:
                colors[idx] = want
                todo.append(idx)
            elif colors[idx] != want:
                return Conflict("vertex", v, (i, idx),
                                f"edges {sg.name(i)} and {sg.name(idx)} at vertex {v} cannot both be colored")
        p = e.partner
        if colors[p] is None:
            colors[p] = colors[i]
            todo.append(p)
        elif colors[p] != colors[i]:
            return Conflict("pair", None, (i, p),
                            f"paired edges {sg.name(i)} and {sg.name(p)} carry different colors")
    return EdgeColoring(sg, tuple(colors), alpha)


def eigenstate_from_coloring(c: EdgeColoring, alpha: complex | None = None) -> np.ndarray:
    """``phi_j = color value`` (1, e^{2 i pi/3}, e^{-2 i pi/3}); unnormalized."""
    if alpha is not None and abs(alpha - c.alpha) > 1e-9:
        if abs(alpha - np.conj(c.alpha)) < 1e-9:
            c = c.conjugate()
        else:
            raise ValueError("alpha does not match the coloring")
    if not c.is_consistent():
        raise ValueError("coloring is not consistent")
    return COLOR_VALUES[list(c.colors)]


def find_structure_3_coloring(g: StructureGraph) -> dict[str, int] | None:
    """Exhaustive backtracking search for a proper edge-3-coloring."""
    _check_degree(g)
    labels = g.labels
    used: list[set[int]] = [set() for _ in range(g.vertex_count)]
    out: dict[str, int] = {}

    def go(k: int) -> bool:
        if k == len(labels):
            return True
        e = g.edge(labels[k])
        for c in range(3):
            if c in used[e.a] or c in used[e.b]:
                continue
            used[e.a].add(c)
            used[e.b].add(c)
            out[e.label] = c
            if go(k + 1):
                return True
            used[e.a].discard(c)
            used[e.b].discard(c)
            del out[e.label]
        return False

    return dict(out) if go(0) else None


def lift_coloring(sg: StateGraph, coloring: Mapping[str, int]) -> list[int]:
    """Directed-edge colors: paired edges take the structure color, loops the
    free colors in ascending order along the slot order."""
    g = sg.structure
    if set(coloring) != set(g.labels):
        raise ValueError("coloring must assign every structure edge")
    colors = [0] * sg.dim
    for v in range(sg.vertex_count):
        taken = [coloring[sg.edges[i].label] for i in sg.out[v] if not sg.edges[i].is_loop]
        if len(set(taken)) != len(taken) or any(c not in (0, 1, 2) for c in taken):
            raise ValueError(f"not a proper edge-3-coloring at vertex {v}")
        free = iter(c for c in range(3) if c not in taken)
        for i in sg.out[v]:
            e = sg.edges[i]
            colors[i] = coloring[e.label] if not e.is_loop else next(free)
    return colors


def permutations_from_coloring(g: StructureGraph, coloring: Mapping[str, int],
                               alpha: complex = ALPHA_PLUS) -> PermutationSpec:
    """Cyclic local permutations for which the coloring is an eigenstate at ``alpha``."""
    _check_degree(g)
    sg = build_state_graph(g, 3)
    colors = lift_coloring(sg, coloring)
    plus = abs(alpha - ALPHA_PLUS) < 1e-9
    if not plus and abs(alpha - ALPHA_MINUS) > 1e-9:
        raise ValueError("alpha must be e^{i pi/3} or e^{-i pi/3}")
    names = []
    for v in range(sg.vertex_count):
        c = [colors[i] for i in sg.out[v]]
        up = (c[1] - c[0]) % 3 == 1
        names.append("cw" if up == plus else "ccw")
    return PermutationSpec.preset(sg, names)


def cyclic_grover_walk(g: StructureGraph, perms: PermutationSpec, variant: str = "U3") -> WalkSpec:
    sg = build_state_graph(g, 3)
    return WalkSpec(sg, CoinSpec.preset(sg, "grover"), perms, variant)
