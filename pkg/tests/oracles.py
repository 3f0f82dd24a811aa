"""Independent reference computations used by the tests.

Nothing here imports the package: each helper re-derives its answer from the
raw graph text or from textbook formulas so that tests compare two routes.
"""

from __future__ import annotations

import itertools
import re

import numpy as np


def read_text_graph(text: str):
    """(n, [(label, a, b)], {v: [labels]}) straight from the file text."""
    n = None
    edges, rot = [], {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line.startswith("vertices"):
            n = int(line.split()[1])
        elif line.startswith("edge"):
            _, lab, a, b = line.split()
            edges.append((lab, int(a), int(b)))
        elif line.startswith("rotation"):
            m = re.match(r"rotation\s+(\d+)\s*:(.*)", line)
            rot[int(m.group(1))] = m.group(2).split()
    return n, edges, rot


def directed_basis(n, edges, rot, target_degree=None):
    """[(origin, label or None)] in the documented order plus the partner list."""
    basis = []
    for v in range(n):
        labels = rot.get(v) or [lab for lab, a, b in edges if v in (a, b)]
        row = [(v, lab) for lab in labels]
        if target_degree is not None:
            row += [(v, None)] * (target_degree - len(row))
        basis += row
    ends = {lab: (a, b) for lab, a, b in edges}
    partner = []
    for i, (v, lab) in enumerate(basis):
        if lab is None:
            partner.append(i)
        else:
            a, b = ends[lab]
            w = b if v == a else a
            partner.append(basis.index((w, lab)))
    return basis, partner


def reflect_oracle(basis, partner, open_labels):
    d = len(basis)
    r = np.zeros((d, d))
    for i, (_, lab) in enumerate(basis):
        j = partner[i] if lab in open_labels else i
        r[j, i] = 1
    return r


def trace_faces(n, edges, rot):
    """Face lengths by half-edge tracing: next of (u, v) is (v, w) with w after u at v."""
    ends = {lab: (a, b) for lab, a, b in edges}

    def other(lab, v):
        a, b = ends[lab]
        return b if v == a else a

    nxt = {}
    for v in range(n):
        labels = rot[v]
        for k, lab in enumerate(labels):
            u = other(lab, v)
            after = labels[(k + 1) % len(labels)]
            nxt[(u, v, lab)] = (v, other(after, v), after)
    seen, lengths = set(), []
    for start in nxt:
        if start in seen:
            continue
        h, L = start, 0
        while h not in seen:
            seen.add(h)
            L += 1
            h = nxt[h]
        lengths.append(L)
    return lengths


def bipartite_brute(n, edges) -> bool:
    for bits in itertools.product((0, 1), repeat=n):
        if all(bits[a] != bits[b] for _, a, b in edges):
            return True
    return False


def has_bridge(n, edges) -> bool:
    def connected(es):
        adj = {v: set() for v in range(n)}
        for _, a, b in es:
            adj[a].add(b)
            adj[b].add(a)
        seen, todo = {0}, [0]
        while todo:
            v = todo.pop()
            for w in adj[v] - seen:
                seen.add(w)
                todo.append(w)
        return len(seen) == n

    return any(not connected(edges[:k] + edges[k + 1:]) for k in range(len(edges)))


def kraus_sum(rho, ops, probs):
    out = np.zeros_like(rho)
    for u, p in zip(ops, probs):
        out = out + p * (u @ rho @ u.conj().T)
    return out


def pair_patterns_ok(support, labels) -> bool:
    for a, b in itertools.combinations(labels, 2):
        if len({(a in k, b in k) for k in support}) < 3:
            return False
    return True


def block_diag(blocks):
    d = sum(b.shape[0] for b in blocks)
    out = np.zeros((d, d), dtype=complex)
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k:k + m, k:k + m] = b
        k += m
    return out


def grover_formula(d):
    return np.array([[2 / d - (i == j) for j in range(d)] for i in range(d)], dtype=complex)
