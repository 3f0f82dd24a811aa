"""Small dense linear-algebra helpers shared by the spectral modules."""

from __future__ import annotations

import numpy as np

NULL_RTOL = 1e-10
NULL_ATOL = 1e-10


def nullspace(a: np.ndarray, rtol: float = NULL_RTOL, atol: float = NULL_ATOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the right nullspace of ``a``.

    Singular values below ``rtol`` times the largest one count as zero, and so
    do all values below ``atol`` (a matrix made of rounding noise has full
    numerical rank under a purely relative rule).
    """
    a = np.atleast_2d(np.asarray(a))
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    if s.size == 0:
        return np.eye(n, dtype=complex)
    rank = int(np.sum(s > max(rtol * s[0], atol)))
    return vh[rank:].conj().T


def rank(a: np.ndarray, rtol: float = NULL_RTOL, atol: float = NULL_ATOL) -> int:
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > max(rtol * s[0], atol)))


def cluster_unit(values, tol: float = 1e-6) -> list[complex]:
    """Group nearly equal complex numbers; return cluster means projected to |z| = 1.

    Output is sorted by phase in (-pi, pi] for reproducibility.
    """
    reps: list[list[complex]] = []
    for z in values:
        for group in reps:
            if abs(group[0] - z) < tol:
                group.append(z)
                break
        else:
            reps.append([z])
    out = []
    for group in reps:
        m = complex(np.mean(group))
        out.append(m / abs(m) if abs(m) > 0 else m)
    return sorted(out, key=lambda z: (round(np.angle(z), 9), z.real))


def snap(z: complex, tol: float = 1e-9) -> complex:
    """Round real and imaginary parts that sit within ``tol`` of 0, +-1, +-1/2."""
    def _r(x: float) -> float:
        for c in (0.0, 1.0, -1.0, 0.5, -0.5):
            if abs(x - c) < tol:
                return c
        return x
    return complex(_r(z.real), _r(z.imag))


def span_residual(a: np.ndarray, b: np.ndarray) -> float:
    """Largest residual of projecting the columns of ``a`` onto the column span of ``b``.

    Both inputs hold vectors as columns; ``b`` must be orthonormal.
    """
    if a.shape[1] == 0:
        return 0.0
    if b.shape[1] == 0:
        return float(np.max(np.linalg.norm(a, axis=0)))
    r = a - b @ (b.conj().T @ a)
    return float(np.max(np.linalg.norm(r, axis=0)))
