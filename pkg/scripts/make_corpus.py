"""Regenerate the bundled graph corpus under src/perqwalk/corpus/.

Rotations are written clockwise.  Geometric graphs (cube, honeycomb patches,
path, triangle) get their rotation from coordinates; polyhedral graphs take the
combinatorial embedding found by networkx.  Vertices of degree < 3 list their
real edges so that appending loops at the end keeps the geometric cyclic order.

Requires networkx (dev only).
"""

from __future__ import annotations

import math
from pathlib import Path

import networkx as nx

OUT = Path(__file__).resolve().parents[1] / "src" / "perqwalk" / "corpus"


def _clockwise(center, points):
    cx, cy = center
    # larger atan2 first == clockwise sweep
    return sorted(points, key=lambda p: -math.atan2(p[1][1] - cy, p[1][0] - cx))


def write_graph(name, n, edges, rotation=None, outer=None, comment=""):
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.strip().splitlines()]
    lines.append(f"vertices {n}")
    for label, a, b in edges:
        lines.append(f"edge {label} {a} {b}")
    if rotation is not None:
        for v in range(n):
            order = list(rotation.get(v) or [])
            if len(order) >= 3:
                # cyclic shift only; short lists keep their loop-relative order
                k = order.index(min(order))
                order = order[k:] + order[:k]
            if order:
                lines.append(f"rotation {v}: " + " ".join(order))
    if outer:
        lines.append("outer_face: " + ",".join(outer))
    (OUT / f"{name}.g").write_text("\n".join(lines) + "\n")


def geometric(coords, edges, virtual=None):
    """Clockwise rotations from planar coordinates.

    ``virtual`` maps a vertex to extra direction vectors that stand for loops;
    the real edges are rotated so the loops would come last.
    """
    inc = {v: [] for v in range(len(coords))}
    for label, a, b in edges:
        inc[a].append((label, coords[b]))
        inc[b].append((label, coords[a]))
    rot = {}
    for v, items in inc.items():
        cx, cy = coords[v]
        pts = list(items)
        for k, d in enumerate((virtual or {}).get(v, [])):
            pts.append((None, (cx + d[0], cy + d[1])))
        order = [lab for lab, _ in _clockwise(coords[v], pts)]
        if None in order:
            # rotate so that the first real edge follows the last virtual slot
            k = max(i for i, lab in enumerate(order) if lab is None)
            order = order[k + 1:] + order[:k + 1]
        rot[v] = [lab for lab in order if lab is not None]
    return rot


def cube():
    coords, edges = [], []
    for v in range(8):
        x, y, z = v & 1, (v >> 1) & 1, (v >> 2) & 1
        s = 3.0 if z else 1.0
        coords.append(((x - 0.5) * s, (y - 0.5) * s))
    for v in range(8):
        for bit, d in ((1, "x"), (2, "y"), (4, "z")):
            w = v | bit
            if w != v:
                edges.append((f"{d}{v}{w}", v, w))
    rot = geometric(coords, edges)
    outer = ["x45", "x67", "y46", "y57"]
    write_graph("cube", 8, edges, rot, outer,
                "Cube; vertex id = binary zyx coordinates, edge label = axis + endpoints.\n"
                "Outer face is the top face (z = 1).")


def hex_patch(name, centers, comment):
    corners = {}
    coords = []
    edges = set()
    for (q, r) in centers:
        cx = math.sqrt(3) * (q + r / 2)
        cy = 1.5 * r
        ring = []
        for k in range(6):
            ang = math.pi / 6 + k * math.pi / 3
            p = (round(cx + math.cos(ang), 6), round(cy + math.sin(ang), 6))
            if p not in corners:
                corners[p] = len(coords)
                coords.append(p)
            ring.append(corners[p])
        for k in range(6):
            a, b = ring[k], ring[(k + 1) % 6]
            edges.add((min(a, b), max(a, b)))
    edges = sorted(edges)
    labelled = [(f"e{i}", a, b) for i, (a, b) in enumerate(edges)]
    nbrs = {v: [] for v in range(len(coords))}
    for _, a, b in labelled:
        nbrs[a].append(b)
        nbrs[b].append(a)
    virtual = {}
    for v, ns in nbrs.items():
        dirs = [(coords[w][0] - coords[v][0], coords[w][1] - coords[v][1]) for w in ns]
        if len(dirs) == 2:
            virtual[v] = [(-(dirs[0][0] + dirs[1][0]), -(dirs[0][1] + dirs[1][1]))]
    rot = geometric(coords, labelled, virtual)
    write_graph(name, len(coords), labelled, rot, None, comment)


def embedded(name, g, comment, labels=None, outer=None):
    ok, emb = nx.check_planarity(g)
    assert ok
    nodes = sorted(g.nodes())
    idx = {v: i for i, v in enumerate(nodes)}
    edges = []
    lab = {}
    for i, (a, b) in enumerate(sorted((min(idx[a], idx[b]), max(idx[a], idx[b])) for a, b in g.edges())):
        label = labels(a, b) if labels else f"e{i}"
        edges.append((label, a, b))
        lab[(a, b)] = lab[(b, a)] = label
    rot = {}
    for v in nodes:
        rot[idx[v]] = [lab[(idx[v], idx[w])] for w in emb.neighbors_cw_order(v)]
    write_graph(name, len(nodes), edges, rot, outer, comment)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    cube()
    write_graph("path3", 3, [("B", 0, 1), ("C", 1, 2)],
                {0: ["B"], 1: ["B", "C"], 2: ["C"]}, None,
                "Three-vertex line v1 - v2 - v3 with edges B and C.")
    write_graph("triangle", 3, [("A", 0, 1), ("B", 1, 2), ("C", 2, 0)],
                {0: ["C", "A"], 1: ["A", "B"], 2: ["B", "C"]}, None,
                "Triangle; smallest odd cycle.")
    write_graph("single", 1, [], None, None, "One vertex, no edges.")
    hex_patch("honeycomb", [(0, 0), (1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)],
              "Honeycomb patch of seven hexagons (coronene shape).")
    hex_patch("naphthalene", [(0, 0), (1, 0)], "Two fused hexagons.")
    embedded("dodecahedron", nx.dodecahedral_graph(), "Dodecahedron graph.")
    embedded("k4", nx.complete_graph(4), "Tetrahedron (K4).")
    prism = nx.circular_ladder_graph(3)
    embedded("prism", prism, "Triangular prism.")
    # two K4s with one subdivided edge each, subdivision vertices joined by a bridge
    g = nx.Graph()
    for off in (0, 5):
        a, b, c, d, s = (off + i for i in range(5))
        g.add_edges_from([(a, b), (a, c), (b, c), (b, d), (c, d), (a, s), (s, d)])
    g.add_edge(4, 9)
    embedded("noncolorable", g,
             "Planar cubic graph with a bridge: two subdivided K4 halves.\n"
             "It has no proper edge-3-coloring.")


if __name__ == "__main__":
    main()
