"""Attractor spaces of percolated walks.

An attractor ``X`` with eigenvalue ``lam`` (``|lam| = 1``) satisfies
``U_K X U_K^dagger = lam X`` for every configuration ``K`` of the scheme.
Together they fix the long-time behaviour of the channel:

    rho(t) -> sum_{lam, i} lam^t Tr(rho0 X_i^dagger) X_i

for an orthonormal (Hilbert-Schmidt) basis ``{X_i}``.  Two routes are
provided: an analytic one through common eigenstates (p-attractors, plus the
identity) and a brute-force one that intersects nullspaces of the vectorized
conjugation maps ``U_K (x) conj(U_K) - lam``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._numerics import cluster_unit, nullspace, snap, span_residual
from .graphs import StateGraph
from .percolation import PercolationScheme, SchemeError, equivalent_to_full, oracle_scheme
from .walk import NumericalInstabilityError, WalkSpec, step_operator

EIG_TOL = 1e-10
ATTRACTOR_TOL = 1e-9
GRAM_TOL = 1e-8
UNIT_FLOOR = 1 - 1e-8


@dataclass(frozen=True)
class CommonEigenstate:
    eigenvalue: complex
    vector: np.ndarray = field(repr=False)


@dataclass
class Attractor:
    eigenvalue: complex
    matrix: np.ndarray = field(repr=False)
    is_p: bool = False
    residual: float = float("nan")


@dataclass
class AttractorBasis:
    """Hilbert-Schmidt orthonormal list of attractors."""

    items: list[Attractor]

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def dimension(self) -> int:
        return len(self.items)

    def eigenvalues(self) -> list[complex]:
        return cluster_unit([a.eigenvalue for a in self.items])

    def counts(self) -> list[tuple[complex, int, int]]:
        """``(lam, total, p-count)`` per distinct eigenvalue."""
        out = []
        for lam in self.eigenvalues():
            group = [a for a in self.items if abs(a.eigenvalue - lam) < 1e-6]
            out.append((lam, len(group), sum(a.is_p for a in group)))
        return out

    def vectors(self) -> np.ndarray:
        """Row-major vectorized matrices as columns."""
        if not self.items:
            return np.zeros((0, 0), dtype=complex)
        return np.stack([a.matrix.reshape(-1) for a in self.items], axis=1)

    def gram_defect(self) -> float:
        v = self.vectors()
        if v.size == 0:
            return 0.0
        return float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))


# ---------------------------------------------------------------- eigenstates

def _shift_rows(sg: StateGraph) -> np.ndarray:
    rows = []
    for e in sg.edges:
        if not e.is_loop and e.index < e.partner:
            r = np.zeros(sg.dim, dtype=complex)
            r[e.index] = 1.0
            r[e.partner] = -1.0
            rows.append(r)
    return np.array(rows).reshape(len(rows), sg.dim)


def common_eigenstates(w: WalkSpec) -> list[CommonEigenstate]:
    """Orthonormal common eigenstates of every ``U_K``, grouped by eigenvalue.

    Solves ``C P phi = alpha phi`` together with ``phi_i = phi_partner(i)``.
    For variant U1 the states are mapped by ``C^dagger``.
    """
    sg = w.state_graph
    cp = w.C @ w.P
    shift = _shift_rows(sg)
    out = []
    for alpha in cluster_unit(np.linalg.eigvals(cp)) if sg.dim else []:
        alpha = snap(alpha)
        a = np.vstack([cp - alpha * np.eye(sg.dim), shift])
        basis = nullspace(a, EIG_TOL)
        for k in range(basis.shape[1]):
            phi = basis[:, k]
            if w.variant == "U1":
                phi = w.C.conj().T @ phi
            out.append(CommonEigenstate(alpha, phi))
    return out


def group_by_eigenvalue(states: Sequence[CommonEigenstate]) -> dict[complex, list[np.ndarray]]:
    groups: dict[complex, list[np.ndarray]] = {}
    for s in states:
        for lam in groups:
            if abs(lam - s.eigenvalue) < 1e-8:
                groups[lam].append(s.vector)
                break
        else:
            groups[s.eigenvalue] = [s.vector]
    return groups


def p_attractors(states: Sequence[CommonEigenstate]) -> list[Attractor]:
    """All ``|phi_a><phi_b|`` with eigenvalue ``alpha_a conj(alpha_b)``."""
    out = []
    for a in states:
        for b in states:
            lam = snap(a.eigenvalue * np.conj(b.eigenvalue))
            out.append(Attractor(lam, np.outer(a.vector, b.vector.conj()), True))
    return out


def is_p_attractor(x: np.ndarray | Attractor, sg: StateGraph, tol: float = EIG_TOL) -> bool:
    """Necessary p-attractor test: ``X[i, i] == X[i, partner(i)]`` on every paired edge."""
    m = x.matrix if isinstance(x, Attractor) else np.asarray(x)
    for e in sg.edges:
        if not e.is_loop and abs(m[e.index, e.index] - m[e.index, e.partner]) > tol:
            return False
    return True


# ---------------------------------------------------------------- residuals

def attractor_residual(x: np.ndarray, lam: complex, unitaries: Iterable[np.ndarray]) -> float:
    worst = 0.0
    for u in unitaries:
        worst = max(worst, float(np.max(np.abs(u @ x @ u.conj().T - lam * x))))
    return worst


def scheme_unitaries(w: WalkSpec, scheme: PercolationScheme) -> list[np.ndarray]:
    return [step_operator(w, k) for k, _ in scheme.configurations(w.structure)]


# ---------------------------------------------------------------- brute force

def brute_force_attractors(w: WalkSpec, scheme: PercolationScheme | None = None,
                           require_equivalent: bool = True) -> AttractorBasis:
    """Attractor space by direct linear algebra over an explicit scheme.

    Candidate eigenvalues come from the unit-modulus spectrum of the channel
    superoperator; for each one the nullspaces of ``U_K (x) conj(U_K) - lam``
    are intersected over all configurations.  By default the scheme is the
    single-closed family plus the empty configuration.
    """
    g = w.structure
    scheme = scheme if scheme is not None else oracle_scheme(g)
    if require_equivalent and not equivalent_to_full(scheme, g):
        raise SchemeError("scheme is not certified equivalent to full percolation")
    table = scheme.configurations(g)
    n = w.dim
    ops = [step_operator(w, k) for k, _ in table]
    kron = [np.kron(u, u.conj()) for u in ops]
    superop = sum(pk * m for (_, pk), m in zip(table, kron))
    try:
        spectrum = np.linalg.eigvals(superop)
    except np.linalg.LinAlgError as exc:
        raise NumericalInstabilityError(f"eigen-solver failed: {exc}") from exc
    candidates = [snap(z) for z in cluster_unit(spectrum[np.abs(spectrum) >= UNIT_FLOOR])]
    items = []
    eye = np.eye(n * n)
    for lam in candidates:
        basis = np.eye(n * n, dtype=complex)
        for m in kron:
            if basis.shape[1] == 0:
                break
            basis = basis @ nullspace((m - lam * eye) @ basis, EIG_TOL)
        for k in range(basis.shape[1]):
            x = basis[:, k].reshape(n, n)
            items.append(Attractor(lam, x, False, attractor_residual(x, lam, ops)))
    for a in items:
        a.is_p = is_p_attractor(a.matrix, w.state_graph)
    return AttractorBasis(items)


# ---------------------------------------------------------------- orthonormalization

def orthonormalize(xs: Sequence[np.ndarray], tol: float = EIG_TOL) -> list[np.ndarray]:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Works on vectors or matrices (inner product ``Tr(A^dagger B)``).  Inputs
    whose residual falls below ``tol`` relative to their norm are dropped.
    """
    out: list[np.ndarray] = []
    for x in xs:
        v = np.array(x, dtype=complex)
        n0 = np.linalg.norm(v)
        if n0 == 0:
            continue
        for _ in range(2):
            for q in out:
                v = v - np.vdot(q, v) * q
        nv = np.linalg.norm(v)
        if nv < tol * max(1.0, n0):
            continue
        out.append(v / nv)
    return out


def orthonormal_attractors(attractors: Sequence[Attractor], unitaries=None) -> AttractorBasis:
    """Orthonormalize within each eigenvalue group (different groups are orthogonal)."""
    items = []
    for lam in cluster_unit([a.eigenvalue for a in attractors]):
        lam = snap(lam)
        group = [a for a in attractors if abs(a.eigenvalue - lam) < 1e-6]
        for x in orthonormalize([a.matrix for a in group]):
            res = attractor_residual(x, lam, unitaries) if unitaries is not None else float("nan")
            items.append(Attractor(lam, x, all(a.is_p for a in group), res))
    return AttractorBasis(items)


def attractor_basis(w: WalkSpec, with_identity: bool = True, scheme: PercolationScheme | None = None) -> AttractorBasis:
    """p-attractors from common eigenstates, plus the identity (the non-p completion)."""
    xs = p_attractors(common_eigenstates(w))
    if with_identity:
        xs.append(Attractor(1.0 + 0j, np.eye(w.dim, dtype=complex), False))
    unitaries = scheme_unitaries(w, scheme or oracle_scheme(w.structure))
    return orthonormal_attractors(xs, unitaries)


def subspace_residual(a: AttractorBasis | np.ndarray, b: AttractorBasis | np.ndarray) -> float:
    """Mutual projection residual of two orthonormal bases (vectorized columns)."""
    va = a.vectors() if isinstance(a, AttractorBasis) else a
    vb = b.vectors() if isinstance(b, AttractorBasis) else b
    return max(span_residual(va, vb), span_residual(vb, va))


# ---------------------------------------------------------------- asymptotics

def asymptotic_state(rho0: np.ndarray, basis: AttractorBasis, t: int) -> np.ndarray:
    """``sum lam^t Tr(rho0 X^dagger) X`` over an orthonormal basis."""
    defect = basis.gram_defect()
    if defect > GRAM_TOL:
        raise ValueError(f"attractor basis is not orthonormal (Gram defect {defect:.2e})")
    rho0 = np.asarray(rho0, dtype=complex)
    out = np.zeros_like(rho0)
    for a in basis:
        coeff = np.vdot(a.matrix, rho0)  # Tr(X^dagger rho0) = Tr(rho0 X^dagger)
        out += a.eigenvalue ** t * coeff * a.matrix
    return out


def convert_variant(x: np.ndarray, lam: complex, w: WalkSpec, to: str = "U3") -> np.ndarray:
    """Carry an attractor between the two operator orders.

    U1 -> U3 is ``C X C^dagger``; U3 -> U1 is ``C^dagger X C``.  The
    equivalent route through ``P`` (``lam P^dagger X P`` resp.
    ``conj(lam) P X P^dagger``) is checked on the way.
    """
    c, p = w.C, w.P
    if to == "U3":
        out = c @ x @ c.conj().T
        alt = lam * p.conj().T @ x @ p
    elif to == "U1":
        out = c.conj().T @ x @ c
        alt = np.conj(lam) * p @ x @ p.conj().T
    else:
        raise ValueError(f"unknown variant {to!r}")
    if np.max(np.abs(out - alt), initial=0.0) > 1e-8:
        raise NumericalInstabilityError("coin and permutation routes disagree; input is not an attractor")
    return out


# ---------------------------------------------------------------- JSON

def _mat_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def basis_to_dict(basis: AttractorBasis) -> dict:
    return {
        "dimension": basis.dimension,
        "summary": [{"eigenvalue": [lam.real, lam.imag], "count": n, "p_count": np_}
                    for lam, n, np_ in basis.counts()],
        "attractors": [{"eigenvalue": [float(a.eigenvalue.real), float(a.eigenvalue.imag)],
                        "p": bool(a.is_p), "residual": float(a.residual),
                        "matrix": _mat_to_json(a.matrix)} for a in basis],
    }


def basis_from_dict(data: dict) -> AttractorBasis:
    items = []
    for d in data["attractors"]:
        m = np.array([[complex(re, im) for re, im in row] for row in d["matrix"]], dtype=complex)
        items.append(Attractor(complex(*d["eigenvalue"]), m, bool(d.get("p", False)),
                               float(d.get("residual", float("nan")))))
    return AttractorBasis(items)


def dump_basis(basis: AttractorBasis, path: str | Path) -> None:
    Path(path).write_text(json.dumps(basis_to_dict(basis)), encoding="utf-8")


def load_basis(path: str | Path) -> AttractorBasis:
    return basis_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def verify_basis(basis: AttractorBasis, w: WalkSpec, scheme: PercolationScheme | None = None) -> float:
    """Largest attractor-equation residual over the scheme's configurations."""
    unitaries = scheme_unitaries(w, scheme or oracle_scheme(w.structure))
    worst = 0.0
    for a in basis:
        a.residual = attractor_residual(a.matrix, a.eigenvalue, unitaries)
        worst = max(worst, a.residual)
    return worst
