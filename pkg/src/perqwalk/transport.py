"""Excitation transport to a sink.

The sink absorbs whatever sits on its vertices after each step, so one step
is ``rho -> sum_K pi_K (I - T) U_K rho U_K^dagger (I - T)`` with ``T`` the
projector onto the sink vertices.  Whatever lives in the span of trapped
states orthogonal to the sink is never absorbed; everything else eventually
is, which gives the efficiency ``q = 1 - ||Pi_sr psi0||^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._numerics import nullspace
from .attractors import orthonormalize
from .graphs import Face, GraphError, StateGraph, faces
from .percolation import DEFAULT_CAP, PercolationScheme, RandomUnitaryChannel
from .walk import NumericalInstabilityError, WalkSpec, step_operator

OVERLAP_TOL = 1e-12
MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class Sink:
    vertices: frozenset[int]

    @classmethod
    def at(cls, *vertices: int):
        return cls(frozenset(vertices))

    @classmethod
    def parse(cls, text: str | None):
        """``"7"``, ``"0,7"`` or empty for no sink."""
        if not text:
            return cls(frozenset())
        return cls(frozenset(int(x) for x in str(text).replace(" ", "").split(",") if x))

    def indices(self, sg: StateGraph) -> list[int]:
        for v in self.vertices:
            if not 0 <= v < sg.vertex_count:
                raise GraphError(f"sink vertex {v} is not in the graph")
        return [i for v in sorted(self.vertices) for i in sg.out[v]]

    def projector(self, sg: StateGraph) -> np.ndarray:
        t = np.zeros((sg.dim, sg.dim), dtype=complex)
        for i in self.indices(sg):
            t[i, i] = 1.0
        return t


def evolve_with_sink(rho0: np.ndarray, w: WalkSpec, scheme: PercolationScheme, sink: Sink,
                     steps: int, cap: int = DEFAULT_CAP, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Surviving population ``p(t)`` for ``t = 0..steps`` and the final state.

    The absorbed fraction is ``q(t) = 1 - p(t)`` (for unit-trace input).
    """
    sg = w.state_graph
    keep = np.eye(sg.dim, dtype=complex) - sink.projector(sg)
    channel = RandomUnitaryChannel(w, scheme, post=keep, cap=cap, threads=threads)
    rho = np.asarray(rho0, dtype=complex)
    p = [float(np.real(np.trace(rho)))]
    n = sg.dim
    use_superop = steps * len(channel) > n * n
    s = channel.superoperator() if use_superop else None
    for _ in range(steps):
        rho = (s @ rho.reshape(-1)).reshape(n, n) if use_superop else channel.apply(rho)
        p.append(float(np.real(np.trace(rho))))
        if p[-1] > p[-2] + MONOTONE_TOL:
            raise NumericalInstabilityError("surviving population increased")
    return np.array(p), rho


# ---------------------------------------------------------------- sr-trapped

def sr_trapped_basis(trapped: Sequence[np.ndarray], sink: Sink, sg: StateGraph) -> list[np.ndarray]:
    """Combinations of ``trapped`` that vanish on the sink.

    Sink base states are handled in index order.  A base state no trapped
    state touches changes nothing; if one state touches it, that state is
    dropped; if several do, the first is used to eliminate the base state
    from the others and then dropped.
    """
    states = [np.array(v, dtype=complex) for v in trapped]
    for i in sink.indices(sg):
        hits = [k for k, v in enumerate(states) if abs(v[i]) > OVERLAP_TOL]
        if not hits:
            continue
        pivot = states[hits[0]]
        for k in hits[1:]:
            states[k] = states[k] - (states[k][i] / pivot[i]) * pivot
            states[k][i] = 0.0
        del states[hits[0]]
    return states


def sr_projector(sr: Sequence[np.ndarray]) -> np.ndarray:
    basis = orthonormalize(sr)
    if not basis:
        return np.zeros((0, 0), dtype=complex)
    b = np.stack(basis, axis=1)
    return b @ b.conj().T


def transfer_efficiency(psi0: np.ndarray, sr: Sequence[np.ndarray]) -> float:
    """``q = 1 - ||Pi_sr psi0||^2`` for a unit initial state."""
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-8:
        raise ValueError("initial state must be normalized")
    kept = sum(abs(np.vdot(e, psi0)) ** 2 for e in orthonormalize(sr))
    return float(min(1.0, max(0.0, 1.0 - kept)))


def _source_states(sg: StateGraph, vertex: int, orthogonal_to: Iterable[np.ndarray]) -> np.ndarray:
    idx = list(sg.out[vertex])
    local = np.zeros((sg.dim, len(idx)), dtype=complex)
    for k, i in enumerate(idx):
        local[i, k] = 1.0
    extra = [np.asarray(v, dtype=complex) for v in orthogonal_to]
    if extra:
        rows = np.array([local.conj().T @ v for v in extra]).conj()
        local = local @ nullspace(rows)
    if local.shape[1] == 0:
        raise ValueError("no initial states left")
    return local


def extremal_states(sr: Sequence[np.ndarray], sg: StateGraph, vertex: int,
                    orthogonal_to: Iterable[np.ndarray] = ()) -> list[tuple[float, np.ndarray]]:
    """``(q, psi)`` pairs diagonalizing the efficiency on one vertex, ascending in ``q``."""
    local = _source_states(sg, vertex, orthogonal_to)
    basis = orthonormalize(sr)
    if not basis:
        return [(1.0, local[:, k]) for k in range(local.shape[1])]
    b = np.stack(basis, axis=1)
    overlap = b.conj().T @ local
    kept, vecs = np.linalg.eigh(overlap.conj().T @ overlap)
    out = [(float(1.0 - kept[k]), local @ vecs[:, k]) for k in range(len(kept))]
    return sorted(out, key=lambda x: x[0])


def efficiency_range(sr: Sequence[np.ndarray], sg: StateGraph, vertex: int,
                     orthogonal_to: Iterable[np.ndarray] = ()) -> tuple[float, float]:
    """Smallest and largest ``q`` over unit states living on one vertex.

    ``orthogonal_to`` restricts the initial states further.
    """
    ext = extremal_states(sr, sg, vertex, orthogonal_to)
    return ext[0][0], ext[-1][0]


# ---------------------------------------------------------------- non-percolated

def face_circulations(sg: StateGraph, face_list: Sequence[Face] | None = None) -> list[np.ndarray]:
    """``sum_{d in face} |d> - |partner(d)>`` for every inner even face.

    Signed so that the lowest-index nonzero entry is +1.
    """
    fl = face_list if face_list is not None else faces(sg.structure, sg)
    out = []
    for f in fl:
        if f.is_outer or not f.is_even:
            continue
        v = np.zeros(sg.dim, dtype=np.int64)
        for d in f.walk:
            v[d] += 1
            v[sg.edges[d].partner] -= 1
        nz = np.flatnonzero(v)
        if nz.size and v[nz[0]] < 0:
            v = -v
        out.append(v)
    return out


def nonpercolated_trapped_extension(w: WalkSpec, face_list: Sequence[Face] | None = None,
                                    tol: float = 1e-10) -> list[tuple[complex, np.ndarray]]:
    """Face circulations that are eigenvectors of the unpercolated step.

    Each is returned with its eigenvalue; a circulation failing the check
    raises.  For the reflecting Grover walk the eigenvalue is +1, the A-type
    face states sit at -1.
    """
    u = step_operator(w, None)
    out = []
    for v in face_circulations(w.state_graph, face_list):
        x = v.astype(complex)
        y = u @ x
        lam = np.vdot(x, y) / np.vdot(x, x)
        lam = complex(np.round(lam.real, 12), np.round(lam.imag, 12))
        if np.max(np.abs(y - lam * x)) > tol or abs(abs(lam) - 1) > tol:
            raise NumericalInstabilityError("face circulation is not an eigenvector of the step")
        out.append((lam, v))
    return out


def nonpercolated_sr_basis(w: WalkSpec, trapped: Sequence[np.ndarray], sink: Sink) -> list[np.ndarray]:
    """sr-trapped states of the unpercolated walk: trapped states plus face
    circulations, each eigenvalue group filtered separately."""
    sg = w.state_graph
    out = sr_trapped_basis(trapped, sink, sg)
    groups: dict[complex, list[np.ndarray]] = {}
    for lam, v in nonpercolated_trapped_extension(w):
        groups.setdefault(lam, []).append(v)
    for lam in sorted(groups, key=lambda z: (z.real, z.imag)):
        out += sr_trapped_basis(groups[lam], sink, sg)
    return out


# ---------------------------------------------------------------- oracle

def dark_subspace(unitaries: Sequence[np.ndarray], sink: Sink, sg: StateGraph) -> np.ndarray:
    """Largest subspace outside the sink mapped into itself by every unitary.

    Orthonormal columns.  Population there is never absorbed, and every
    other component eventually is, so it checks the sr-trapped construction
    independently.
    """
    n = sg.dim
    t = sink.projector(sg)
    basis = nullspace(t)
    while basis.shape[1]:
        outside = np.eye(n) - basis @ basis.conj().T
        stacked = np.vstack([outside @ u @ basis for u in unitaries])
        keep = nullspace(stacked)
        if keep.shape[1] == basis.shape[1]:
            break
        basis = basis @ keep
    return basis


# ---------------------------------------------------------------- report

def is_reflecting_grover(w: WalkSpec) -> bool:
    sg = w.state_graph
    if sg.structure.max_degree > 3 or any(sg.degree(v) != 3 for v in range(sg.vertex_count)):
        return False
    from .walk import grover_coin
    return all(w.permutation.kind(v) == "identity" for v in range(sg.vertex_count)) and all(
        np.allclose(b, grover_coin(3), atol=1e-12) for b in w.coin.blocks)


def sr_states(w: WalkSpec, sink: Sink, nonpercolated: bool = False,
              scheme: PercolationScheme | None = None) -> tuple[str, list[np.ndarray]]:
    """Sink-resistant states: analytic for the reflecting Grover walk on an
    embedded graph, the dark-subspace oracle otherwise."""
    from .grover3 import trapped_basis
    sg = w.state_graph
    if is_reflecting_grover(w) and (sg.structure.has_embedding or sg.structure.edge_count == 0):
        trapped = [t.vector for t in trapped_basis(sg)]
        if nonpercolated:
            sr = nonpercolated_sr_basis(w.with_variant("U3"), trapped, sink)
        else:
            sr = sr_trapped_basis(trapped, sink, sg)
        if w.variant == "U1":
            sr = [w.C.conj().T @ v for v in sr]
        return "analytic", sr
    if nonpercolated:
        unitaries = [step_operator(w, None)]
    else:
        from .percolation import oracle_scheme
        sch = scheme or oracle_scheme(sg.structure)
        unitaries = [step_operator(w, k) for k, _ in sch.configurations(sg.structure)]
    d = dark_subspace(unitaries, sink, sg)
    return "dark-subspace", [d[:, k] for k in range(d.shape[1])]


def transport_report(w: WalkSpec, sink: Sink, source: int = 0, scheme: PercolationScheme | None = None,
                     steps: int = 500, nonpercolated: bool = False, threads: int = 1) -> dict:
    """Analytic and simulated efficiencies for states starting on ``source``."""
    sg = w.state_graph
    if not 0 <= source < sg.vertex_count:
        raise GraphError(f"source vertex {source} is not in the graph")
    sim_scheme = PercolationScheme.unpercolated() if nonpercolated else (scheme or PercolationScheme.full(0.5))
    uniform = np.zeros(sg.dim, dtype=complex)
    uniform[list(sg.out[source])] = 1.0 / np.sqrt(sg.degree(source))
    report = {"source": source, "sink": sorted(sink.vertices), "scheme": sim_scheme.to_dict(),
              "steps": steps, "nonpercolated": nonpercolated}
    if not sink.vertices:
        report.update(method="none", sr_dimension=0, q_uniform=0.0, q_min=0.0, q_max=0.0,
                      q_min_orthogonal=0.0, q_max_orthogonal=0.0,
                      simulated={"uniform": 0.0, "minimal": 0.0})
        return report
    method, sr = sr_states(w, sink, nonpercolated, scheme)
    ext = extremal_states(sr, sg, source)
    report.update(method=method, sr_dimension=len(orthonormalize(sr)),
                  q_uniform=transfer_efficiency(uniform, sr),
                  q_min=ext[0][0], q_max=ext[-1][0])
    if sg.degree(source) > 1:
        lo, hi = efficiency_range(sr, sg, source, [uniform])
        report.update(q_min_orthogonal=lo, q_max_orthogonal=hi)
    simulated = {}
    for name, psi in (("uniform", uniform), ("minimal", ext[0][1])):
        p, _ = evolve_with_sink(np.outer(psi, psi.conj()), w, sim_scheme, sink, steps, threads=threads)
        simulated[name] = float(1.0 - p[-1])
    report["simulated"] = simulated
    return report
