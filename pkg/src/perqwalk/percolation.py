"""Percolation schemes and the random-unitary channel they induce.

One step maps ``rho -> sum_K pi_K U_K rho U_K^dagger`` where a fresh
configuration ``K`` of open edges is drawn every step.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .graphs import StructureGraph
from .walk import NumericalInstabilityError, WalkError, WalkSpec, step_operator

DEFAULT_CAP = 2 ** 20
PROB_TOL = 1e-12
SUPEROP_MAX_DIM = 48

KINDS = ("full", "single_open", "single_closed", "closed_vertex", "none", "explicit")


class SchemeError(ValueError):
    pass


class ConfigurationCapError(SchemeError):
    pass


@dataclass(frozen=True)
class PercolationScheme:
    """Distribution over configurations (sets of open structure-edge labels).

    ``full`` keeps only ``p`` and enumerates on demand; ``none`` is the
    unpercolated walk (every edge open with certainty).
    """

    kind: str
    p: float | None = None
    entries: tuple[tuple[frozenset[str], float], ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemeError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "full":
            if self.p is None or not 0.0 < self.p < 1.0:
                raise SchemeError("full percolation needs 0 < p < 1")
        if self.kind == "explicit":
            entries = tuple((frozenset(k), float(pk)) for k, pk in self.entries)
            if not entries:
                raise SchemeError("explicit scheme needs at least one configuration")
            if any(pk <= 0 for _, pk in entries):
                raise SchemeError("probabilities must be positive")
            total = sum(pk for _, pk in entries)
            if abs(total - 1.0) > PROB_TOL:
                raise SchemeError(f"probabilities sum to {total!r}, not 1")
            object.__setattr__(self, "entries", entries)

    @classmethod
    def full(cls, p: float = 0.5):
        return cls("full", p=p)

    @classmethod
    def single_open(cls):
        return cls("single_open")

    @classmethod
    def single_closed(cls):
        return cls("single_closed")

    @classmethod
    def closed_vertex(cls):
        return cls("closed_vertex")

    @classmethod
    def unpercolated(cls):
        return cls("none")

    @classmethod
    def explicit(cls, entries: Sequence[tuple[Sequence[str], float]]):
        return cls("explicit", entries=tuple((frozenset(k), p) for k, p in entries))

    # -- enumeration

    def count(self, g: StructureGraph) -> int:
        m = g.edge_count
        if self.kind == "full":
            return 2 ** m
        if self.kind in ("single_open", "single_closed"):
            return max(m, 1)
        if self.kind == "closed_vertex":
            return g.vertex_count
        if self.kind == "none":
            return 1
        return len(self.entries)

    def iter_configurations(self, g: StructureGraph) -> Iterator[tuple[frozenset[str], float]]:
        labels = g.labels
        m = len(labels)
        everything = frozenset(labels)
        if self.kind == "full":
            p = self.p
            for mask in range(2 ** m):
                k = frozenset(labels[i] for i in range(m) if mask >> i & 1)
                yield k, p ** len(k) * (1 - p) ** (m - len(k))
        elif self.kind == "single_open":
            if m == 0:
                yield frozenset(), 1.0
            for lab in labels:
                yield frozenset([lab]), 1.0 / m
        elif self.kind == "single_closed":
            if m == 0:
                yield frozenset(), 1.0
            for lab in labels:
                yield everything - {lab}, 1.0 / m
        elif self.kind == "closed_vertex":
            n = g.vertex_count
            for v in range(n):
                yield everything - set(g.incident(v)), 1.0 / n
        elif self.kind == "none":
            yield everything, 1.0
        else:
            for k, pk in self.entries:
                unknown = k - everything
                if unknown:
                    raise SchemeError(f"configuration names unknown edges {sorted(unknown)}")
                yield k, pk

    def configurations(self, g: StructureGraph, cap: int = DEFAULT_CAP) -> list[tuple[frozenset[str], float]]:
        n = self.count(g)
        if n > cap:
            raise ConfigurationCapError(
                f"{n} configurations exceed the cap of {cap}; use an equivalent restricted "
                "scheme or Monte Carlo sampling")
        return list(self.iter_configurations(g))

    def support(self, g: StructureGraph) -> set[frozenset[str]]:
        return {k for k, _ in self.iter_configurations(g)}

    def sample(self, g: StructureGraph, rng: np.random.Generator,
               table: list | None = None) -> frozenset[str]:
        """Draw one configuration; ``table`` caches the enumerated list."""
        if self.kind == "full":
            mask = rng.random(g.edge_count) < self.p
            return frozenset(lab for lab, on in zip(g.labels, mask) if on)
        table = table if table is not None else self.configurations(g)
        probs = np.array([pk for _, pk in table])
        return table[int(rng.choice(len(table), p=probs / probs.sum()))][0]

    # -- serialization

    def to_dict(self) -> dict:
        if self.kind == "full":
            return {"kind": "full", "p": self.p}
        if self.kind == "explicit":
            return {"kind": "explicit",
                    "configurations": [{"open": sorted(k), "p": pk} for k, pk in self.entries]}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, data: Mapping):
        kind = data.get("kind")
        if kind == "full":
            return cls.full(float(data.get("p", 0.5)))
        if kind == "explicit":
            return cls.explicit([(c["open"], float(c["p"])) for c in data["configurations"]])
        return cls(kind)

    @classmethod
    def parse(cls, text: str):
        """``single_closed``, ``full:0.3``, inline JSON or a JSON file path."""
        text = text.strip()
        if text.startswith("{"):
            return cls.from_dict(json.loads(text))
        path = Path(text)
        if path.suffix == ".json" and path.is_file():
            return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        name, _, arg = text.partition(":")
        if name == "full":
            return cls.full(float(arg) if arg else 0.5)
        if name in ("none", "unpercolated"):
            return cls.unpercolated()
        return cls(name)


def oracle_scheme(g: StructureGraph) -> PercolationScheme:
    """Single-closed configurations plus the empty one, uniform weights.

    Equivalent to full percolation for every graph with at least one edge and
    only ``#E + 1`` configurations long.
    """
    entries = {frozenset(): 1.0}
    for k, _ in PercolationScheme.single_closed().iter_configurations(g):
        entries[k] = 1.0
    n = len(entries)
    return PercolationScheme.explicit([(k, 1.0 / n) for k in entries])


def equivalent_to_full(scheme: PercolationScheme, g: StructureGraph) -> bool:
    """Whether ``scheme`` has the same attractors as full percolation.

    Every pair of edges must show at least three of the four joint
    open/closed patterns in the support, and every edge must be seen both
    open and closed (this covers graphs with a single edge).
    """
    support = list(scheme.support(g))
    labels = g.labels
    for lab in labels:
        if len({lab in k for k in support}) < 2:
            return False
    for a, b in itertools.combinations(labels, 2):
        if len({(a in k, b in k) for k in support}) < 3:
            return False
    return True


# ---------------------------------------------------------------- channel

class RandomUnitaryChannel:
    """``rho -> sum_K pi_K A_K rho A_K^dagger`` with cached ``A_K``.

    ``A_K = U_K`` for plain percolation; ``post`` (e.g. ``I - T`` for a sink)
    is applied after every ``U_K``.
    """

    def __init__(self, w: WalkSpec, scheme: PercolationScheme, post: np.ndarray | None = None,
                 cap: int = DEFAULT_CAP, threads: int = 1):
        self.walk = w
        self.scheme = scheme
        self.table = scheme.configurations(w.structure, cap)
        self.probs = np.array([pk for _, pk in self.table])
        ops = np.array([step_operator(w, k) for k, _ in self.table])
        if post is not None:
            ops = post[None, :, :] @ ops
        self.ops = ops
        self.threads = max(1, int(threads))
        self._superop = None

    def __len__(self):
        return len(self.table)

    def _partial(self, sl: slice, rho: np.ndarray) -> np.ndarray:
        a = self.ops[sl]
        terms = a @ rho @ a.conj().transpose(0, 2, 1)
        return np.tensordot(self.probs[sl], terms, axes=1)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        n = len(self.table)
        if self.threads == 1 or n < 2 * self.threads:
            return self._partial(slice(0, n), rho)
        bounds = np.linspace(0, n, self.threads + 1).astype(int)
        chunks = [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(self.threads) as pool:
            parts = list(pool.map(lambda s: self._partial(s, rho), chunks))
        out = parts[0]
        for part in parts[1:]:
            out = out + part
        return out

    def superoperator(self) -> np.ndarray:
        """Matrix acting on row-major ``vec(rho)``: ``sum_K pi_K A_K (x) conj(A_K)``."""
        if self._superop is None:
            n = self.walk.dim
            flat = self.ops.reshape(len(self.table), n * n)
            m = (flat.T * self.probs) @ flat.conj()
            self._superop = m.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
        return self._superop

    def evolve(self, rho0: np.ndarray, steps: int) -> list[np.ndarray]:
        n = self.walk.dim
        out = [np.asarray(rho0, dtype=complex)]
        if steps <= 0:
            return out
        if n <= SUPEROP_MAX_DIM and steps * len(self.table) > n * n:
            s = self.superoperator()
            x = out[0].reshape(-1)
            for _ in range(steps):
                x = s @ x
                out.append(x.reshape(n, n))
        else:
            rho = out[0]
            for _ in range(steps):
                rho = self.apply(rho)
                out.append(rho)
        return out


def _check_density(rho: np.ndarray, tol: float = 1e-10) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise WalkError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise WalkError("density matrix is not Hermitian")


def channel_step(rho: np.ndarray, w: WalkSpec, scheme: PercolationScheme,
                 cap: int = DEFAULT_CAP, threads: int = 1) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    _check_density(rho)
    return RandomUnitaryChannel(w, scheme, cap=cap, threads=threads).apply(rho)


def evolve(rho0: np.ndarray, w: WalkSpec, scheme: PercolationScheme, steps: int,
           cap: int = DEFAULT_CAP, threads: int = 1) -> list[np.ndarray]:
    """``[rho(0), ..., rho(steps)]``."""
    rho0 = np.asarray(rho0, dtype=complex)
    _check_density(rho0)
    return RandomUnitaryChannel(w, scheme, cap=cap, threads=threads).evolve(rho0, steps)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho, rho)))


# ---------------------------------------------------------------- Monte Carlo

def trajectory_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; each trajectory gets its own stream."""
    ss = np.random.SeedSequence(entropy=int(seed) % 2 ** 64, spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def _fast_step(w: WalkSpec):
    """Returns ``f(psi, open_labels)`` applying ``U_K`` without building it."""
    sg = w.state_graph
    cp = w.C @ w.P
    partner = np.array(sg.partner)
    label = [e.label for e in sg.edges]
    ident = np.arange(sg.dim)

    def kmap(k):
        m = ident.copy()
        for i, lab in enumerate(label):
            if lab is not None and lab in k:
                m[i] = partner[i]
        return m

    if w.variant == "U3":
        return lambda psi, k: cp @ psi[kmap(k)]
    return lambda psi, k: w.P @ (w.C @ psi)[kmap(k)]


def sample_trajectory(psi0: np.ndarray, w: WalkSpec, scheme: PercolationScheme, steps: int,
                      seed: int, stream: int = 0) -> np.ndarray:
    """One quantum trajectory: draw ``K`` by ``pi_K`` each step and apply ``U_K``."""
    psi = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
        raise WalkError("initial state must be normalized")
    g = w.structure
    rng = trajectory_rng(seed, stream)
    table = None if scheme.kind == "full" else scheme.configurations(g)
    step = _fast_step(w)
    for _ in range(steps):
        psi = step(psi, scheme.sample(g, rng, table))
    if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
        raise NumericalInstabilityError("trajectory lost normalization")
    return psi


def monte_carlo_series(psi0: np.ndarray, w: WalkSpec, scheme: PercolationScheme, steps: int,
                       trajectories: int, seed: int) -> list[np.ndarray]:
    """Trajectory-averaged ``rho(t)`` for ``t = 0..steps``."""
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-8:
        raise WalkError("initial state must be normalized")
    g = w.structure
    n = w.dim
    step = _fast_step(w)
    table = None if scheme.kind == "full" else scheme.configurations(g)
    acc = [np.zeros((n, n), dtype=complex) for _ in range(steps + 1)]
    for i in range(trajectories):
        rng = trajectory_rng(seed, i)
        psi = psi0
        acc[0] += np.outer(psi, psi.conj())
        for t in range(1, steps + 1):
            psi = step(psi, scheme.sample(g, rng, table))
            acc[t] += np.outer(psi, psi.conj())
    return [a / trajectories for a in acc]


def monte_carlo_density(psi0: np.ndarray, w: WalkSpec, scheme: PercolationScheme, steps: int,
                        trajectories: int, seed: int, threads: int = 1) -> np.ndarray:
    """Average of ``|psi><psi|`` over independent trajectories (stream = trajectory index)."""
    def one(i):
        psi = sample_trajectory(psi0, w, scheme, steps, seed, stream=i)
        return np.outer(psi, psi.conj())

    n = w.dim
    acc = np.zeros((n, n), dtype=complex)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            for m in pool.map(one, range(trajectories)):
                acc += m
    else:
        for i in range(trajectories):
            acc += one(i)
    return acc / trajectories
