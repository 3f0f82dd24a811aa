"""Structure graphs, state graphs, faces of a rotation system, bipartiteness.

The structure graph is the undirected, simple, connected graph of walker
positions.  The state graph replaces every structure edge by two opposite
directed edges (partners of each other) and pads vertices with unpaired loops.
Its directed edges index the walk's Hilbert space:

* vertices in file order,
* at each vertex the real edges in rotation order (file order without an
  embedding), then the loops.

Rotations are read as clockwise cyclic orders.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class GraphError(ValueError):
    """Invalid graph data."""


class GraphParseError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class DisconnectedGraphError(GraphError):
    pass


class DuplicateLabelError(GraphError):
    pass


class NonPlanarEmbeddingError(GraphError):
    pass


@dataclass(frozen=True)
class Edge:
    label: str
    a: int
    b: int

    def other(self, v: int) -> int:
        return self.b if v == self.a else self.a


@dataclass(frozen=True)
class StructureGraph:
    """Undirected simple connected graph, optionally with a rotation system.

    ``rotation[v]`` lists the labels of the edges at ``v`` in clockwise order.
    """

    vertex_count: int
    edges: tuple[Edge, ...]
    rotation: tuple[tuple[str, ...], ...] | None = None
    outer_face_hint: frozenset[str] | None = None
    _by_label: dict = field(init=False, repr=False, compare=False)
    _incident: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.vertex_count < 1:
            raise GraphError("graph needs at least one vertex")
        by_label = {}
        seen_pairs = set()
        incident = [[] for _ in range(self.vertex_count)]
        for e in self.edges:
            if e.label in by_label:
                raise DuplicateLabelError(f"duplicate edge label {e.label!r}")
            for v in (e.a, e.b):
                if not 0 <= v < self.vertex_count:
                    raise GraphError(f"edge {e.label!r}: vertex {v} out of range")
            if e.a == e.b:
                raise GraphError(f"edge {e.label!r} is a loop; only simple structure graphs are supported")
            pair = (min(e.a, e.b), max(e.a, e.b))
            if pair in seen_pairs:
                raise GraphError(f"edge {e.label!r} is parallel to another edge")
            seen_pairs.add(pair)
            by_label[e.label] = e
            incident[e.a].append(e.label)
            incident[e.b].append(e.label)
        if self.rotation is not None:
            rot = tuple(tuple(r) for r in self.rotation)
            if len(rot) != self.vertex_count:
                raise GraphError("rotation must list every vertex")
            for v, order in enumerate(rot):
                if sorted(order) != sorted(incident[v]):
                    raise GraphError(f"rotation at vertex {v} must list each incident edge exactly once")
            object.__setattr__(self, "rotation", rot)
            incident = [list(r) for r in rot]
        if self.outer_face_hint is not None:
            hint = frozenset(self.outer_face_hint)
            unknown = hint - by_label.keys()
            if unknown:
                raise GraphError(f"outer face hint names unknown edges {sorted(unknown)}")
            object.__setattr__(self, "outer_face_hint", hint)
        object.__setattr__(self, "_by_label", by_label)
        object.__setattr__(self, "_incident", tuple(tuple(x) for x in incident))
        if not _connected(self.vertex_count, self.edges):
            raise DisconnectedGraphError("structure graph is not connected")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.edges]

    @property
    def has_embedding(self) -> bool:
        return self.rotation is not None

    def edge(self, label: str) -> Edge:
        try:
            return self._by_label[label]
        except KeyError:
            raise GraphError(f"unknown edge label {label!r}") from None

    def incident(self, v: int) -> tuple[str, ...]:
        """Edge labels at ``v`` in rotation order (file order without an embedding)."""
        return self._incident[v]

    def degree(self, v: int) -> int:
        return len(self._incident[v])

    @property
    def max_degree(self) -> int:
        return max(self.degree(v) for v in range(self.vertex_count))

    def neighbors(self, v: int) -> list[int]:
        return [self._by_label[lab].other(v) for lab in self._incident[v]]


def _connected(n: int, edges) -> bool:
    adj = [[] for _ in range(n)]
    for e in edges:
        adj[e.a].append(e.b)
        adj[e.b].append(e.a)
    seen = {0}
    todo = [0]
    while todo:
        v = todo.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == n


# ---------------------------------------------------------------- file format

_INT = re.compile(r"^-?\d+$")


def parse_graph(text: str) -> StructureGraph:
    """Parse the plain-text graph format.

    ::

        # comment
        vertices 3
        edge B 0 1
        edge C 1 2
        rotation 1: B C
        outer_face: B,C
    """
    n = None
    edges: list[Edge] = []
    labels_seen: set[str] = set()
    rotation: dict[int, tuple[str, ...]] = {}
    outer = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "vertices":
            if n is not None:
                raise GraphParseError(lineno, "repeated 'vertices' header")
            if not _INT.match(rest) or int(rest) < 1:
                raise GraphParseError(lineno, f"bad vertex count {rest!r}")
            n = int(rest)
        elif head == "edge":
            if n is None:
                raise GraphParseError(lineno, "'edge' before 'vertices' header")
            parts = rest.split()
            if len(parts) != 3 or not (_INT.match(parts[1]) and _INT.match(parts[2])):
                raise GraphParseError(lineno, "expected 'edge LABEL a b'")
            label, a, b = parts[0], int(parts[1]), int(parts[2])
            if label in labels_seen:
                raise DuplicateLabelError(f"line {lineno}: duplicate edge label {label!r}")
            for v in (a, b):
                if not 0 <= v < n:
                    raise GraphParseError(lineno, f"vertex {v} out of range")
            labels_seen.add(label)
            edges.append(Edge(label, a, b))
        elif head.startswith("rotation"):
            m = re.match(r"^rotation\s+(\d+)\s*:(.*)$", line)
            if m is None:
                raise GraphParseError(lineno, "expected 'rotation v: LABEL ...'")
            v = int(m.group(1))
            if n is None or not 0 <= v < n:
                raise GraphParseError(lineno, f"rotation for unknown vertex {v}")
            if v in rotation:
                raise GraphParseError(lineno, f"repeated rotation for vertex {v}")
            rotation[v] = tuple(m.group(2).split())
        elif head.startswith("outer_face"):
            m = re.match(r"^outer_face\s*:(.*)$", line)
            if m is None:
                raise GraphParseError(lineno, "expected 'outer_face: LABEL,...'")
            outer = frozenset(x.strip() for x in m.group(1).split(",") if x.strip())
        else:
            raise GraphParseError(lineno, f"unknown directive {head!r}")
    if n is None:
        raise GraphParseError(0, "missing 'vertices' header")
    rot = None
    if rotation:
        degree = [0] * n
        default = [[] for _ in range(n)]
        for e in edges:
            for v in (e.a, e.b):
                degree[v] += 1
                default[v].append(e.label)
        for v in range(n):
            if v not in rotation:
                if degree[v] >= 2:
                    raise GraphError(f"embedding lacks a rotation for vertex {v}")
                rotation[v] = tuple(default[v])
        rot = tuple(rotation[v] for v in range(n))
    return StructureGraph(n, tuple(edges), rot, outer)


def format_graph(g: StructureGraph) -> str:
    lines = [f"vertices {g.vertex_count}"]
    lines += [f"edge {e.label} {e.a} {e.b}" for e in g.edges]
    if g.rotation is not None:
        lines += [f"rotation {v}: " + " ".join(r) for v, r in enumerate(g.rotation) if r]
    if g.outer_face_hint:
        lines.append("outer_face: " + ",".join(sorted(g.outer_face_hint)))
    return "\n".join(lines) + "\n"


def corpus_names() -> list[str]:
    root = resources.files("perqwalk") / "corpus"
    return sorted(p.name[:-2] for p in root.iterdir() if p.name.endswith(".g"))


def corpus_graph(name: str) -> StructureGraph:
    path = resources.files("perqwalk") / "corpus" / f"{name}.g"
    if not path.is_file():
        raise GraphError(f"no corpus graph named {name!r}")
    return parse_graph(path.read_text(encoding="utf-8"))


def load_graph(source: str | Path) -> StructureGraph:
    """Read a graph file; a bare corpus name (e.g. ``cube``) also works."""
    path = Path(source)
    if path.is_file():
        return parse_graph(path.read_text(encoding="utf-8"))
    name = path.name[:-2] if path.name.endswith(".g") else path.name
    if str(source) == path.name and name in corpus_names():
        return corpus_graph(name)
    raise FileNotFoundError(f"graph file not found: {source}")


# ---------------------------------------------------------------- state graph

@dataclass(frozen=True)
class DirectedEdge:
    index: int
    origin: int
    target: int
    label: str | None  # structure edge; None for an unpaired loop
    partner: int

    @property
    def is_loop(self) -> bool:
        return self.label is None


@dataclass(frozen=True)
class StateGraph:
    structure: StructureGraph
    edges: tuple[DirectedEdge, ...]
    out: tuple[tuple[int, ...], ...]

    @property
    def vertex_count(self) -> int:
        return self.structure.vertex_count

    @property
    def dim(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.out[v])

    @property
    def partner(self) -> list[int]:
        return [e.partner for e in self.edges]

    @property
    def loops(self) -> list[int]:
        return [e.index for e in self.edges if e.is_loop]

    @property
    def is_regular(self) -> bool:
        return len({len(o) for o in self.out}) == 1

    def index(self, label: str, origin: int) -> int:
        """Index of the directed edge of structure edge ``label`` leaving ``origin``."""
        for i in self.out[origin]:
            if self.edges[i].label == label:
                return i
        raise GraphError(f"no edge {label!r} at vertex {origin}")

    def name(self, i: int) -> str:
        e = self.edges[i]
        if e.is_loop:
            return f"~{e.origin}.{self.out[e.origin].index(i)}"
        return f"{e.label}@{e.origin}"

    def vertex_of(self) -> list[int]:
        return [e.origin for e in self.edges]

    def vertex_slice(self, v: int) -> list[int]:
        return list(self.out[v])


def build_state_graph(g: StructureGraph, target_degree: int | None = None) -> StateGraph:
    """Two partner directed edges per structure edge, loops padded up to ``target_degree``."""
    if target_degree is not None:
        for v in range(g.vertex_count):
            if g.degree(v) > target_degree:
                raise GraphError(f"vertex {v} has degree {g.degree(v)} > target {target_degree}")
    slots: list[list[tuple[str | None, int]]] = []
    for v in range(g.vertex_count):
        row = [(lab, g.edge(lab).other(v)) for lab in g.incident(v)]
        if target_degree is not None:
            row += [(None, v)] * (target_degree - len(row))
        slots.append(row)
    index: dict[tuple[str, int], int] = {}
    flat = []
    out = []
    for v, row in enumerate(slots):
        ids = []
        for lab, w in row:
            i = len(flat)
            flat.append((v, w, lab))
            if lab is not None:
                index[(lab, v)] = i
            ids.append(i)
        out.append(tuple(ids))
    edges = []
    for i, (v, w, lab) in enumerate(flat):
        partner = i if lab is None else index[(lab, w)]
        edges.append(DirectedEdge(i, v, w, lab, partner))
    return StateGraph(g, tuple(edges), tuple(out))


# ---------------------------------------------------------------- faces

@dataclass(frozen=True)
class Face:
    id: int
    walk: tuple[int, ...]  # directed edge indices around the face
    is_outer: bool
    vertices: tuple[int, ...]  # origin of each walk edge
    labels: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.walk)

    @property
    def is_even(self) -> bool:
        return len(self.walk) % 2 == 0

    @property
    def parity(self) -> str:
        return "even" if self.is_even else "odd"


def faces(g: StructureGraph, state_graph: StateGraph | None = None) -> list[Face]:
    """Trace the faces of the embedded graph.

    The successor of the directed edge ``u -> v`` is the edge following
    ``v -> u`` in the rotation at ``v``.  Face ids follow the smallest
    untraced directed edge.  Indices refer to ``state_graph`` (loop-free state
    graph of ``g`` by default).
    """
    if g.edge_count == 0:
        return [Face(0, (), True, (), ())]
    if g.rotation is None:
        raise GraphError("faces() needs a rotation system")
    sg = state_graph if state_graph is not None else build_state_graph(g)
    if sg.structure is not g and sg.structure != g:
        raise GraphError("state graph does not belong to this structure graph")
    real = [[i for i in sg.out[v] if not sg.edges[i].is_loop] for v in range(g.vertex_count)]
    pos = {}
    for v, row in enumerate(real):
        for k, i in enumerate(row):
            pos[i] = k
    paired = [e.index for e in sg.edges if not e.is_loop]
    seen = set()
    walks = []
    for start in paired:
        if start in seen:
            continue
        walk = []
        d = start
        while d not in seen:
            seen.add(d)
            walk.append(d)
            back = sg.edges[d].partner
            v = sg.edges[d].target
            row = real[v]
            d = row[(pos[back] + 1) % len(row)]
        if d != start:
            raise NonPlanarEmbeddingError("face tracing did not close")
        walks.append(walk)
    euler = len(walks) + g.vertex_count - g.edge_count
    if euler != 2:
        raise NonPlanarEmbeddingError(f"rotation system is not planar (F + V - E = {euler})")

    def key(w):
        return (-len(w), min(w))

    candidates = list(range(len(walks)))
    if g.outer_face_hint:
        candidates = [k for k, w in enumerate(walks)
                      if {sg.edges[d].label for d in w} == set(g.outer_face_hint)]
        if not candidates:
            raise GraphError("outer face hint matches no traced face")
    outer = min(candidates, key=lambda k: key(walks[k]))
    return [
        Face(k, tuple(w), k == outer,
             tuple(sg.edges[d].origin for d in w),
             tuple(sg.edges[d].label for d in w))
        for k, w in enumerate(walks)
    ]


# ---------------------------------------------------------------- bipartite

def is_bipartite(g: StructureGraph) -> tuple[bool, tuple[frozenset[int], frozenset[int]] | None]:
    side = [-1] * g.vertex_count
    side[0] = 0
    todo = deque([0])
    while todo:
        v = todo.popleft()
        for w in g.neighbors(v):
            if side[w] < 0:
                side[w] = 1 - side[v]
                todo.append(w)
            elif side[w] == side[v]:
                return False, None
    a = frozenset(v for v in range(g.vertex_count) if side[v] == 0)
    b = frozenset(v for v in range(g.vertex_count) if side[v] == 1)
    return True, (a, b)
