"""Coins, local permutations, reflecting shifts and step operators.

All operators are dense complex matrices over the directed-edge basis of a
:class:`~perqwalk.graphs.StateGraph`.  A configuration is the set of open
structure-edge labels; ``None`` means every edge is open.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graphs import GraphError, StateGraph, StructureGraph, build_state_graph, is_bipartite

UNITARY_TOL = 1e-12
NORM_TOL = 1e-8

Configuration = frozenset


class WalkError(ValueError):
    pass


class NumericalInstabilityError(ArithmeticError):
    pass


# ---------------------------------------------------------------- coins

def grover_coin(d: int) -> np.ndarray:
    """``2|u><u| - I`` for the uniform vector ``u`` in dimension ``d``."""
    if d < 1:
        raise WalkError("Grover coin needs d >= 1")
    return np.full((d, d), 2.0 / d, dtype=complex) - np.eye(d, dtype=complex)


def hadamard_coin() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def relabel(block: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Conjugate ``block`` by the slot permutation ``Q|i> = |order[i]>``.

    Use this to carry a coin written for one slot labeling over to another,
    e.g. ``relabel(H, [1, 0])`` is ``sigma_x H sigma_x``.
    """
    q = permutation_block(order)
    return q @ block @ q.T


def unitarity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))) if m.size else 0.0


_COIN_PRESETS = {
    "grover": grover_coin,
    "identity": lambda d: np.eye(d, dtype=complex),
}


def _coin_preset(name: str, d: int) -> np.ndarray:
    if name == "hadamard":
        if d != 2:
            raise WalkError(f"Hadamard coin needs degree 2, got {d}")
        return hadamard_coin()
    try:
        return _COIN_PRESETS[name](d)
    except KeyError:
        raise WalkError(f"unknown coin preset {name!r}") from None


@dataclass(frozen=True)
class CoinSpec:
    """One unitary block per vertex, in the vertex's slot order."""

    blocks: tuple[np.ndarray, ...]

    @classmethod
    def preset(cls, sg: StateGraph, name: str = "grover", overrides: Mapping[int, object] | None = None):
        blocks = []
        for v in range(sg.vertex_count):
            spec = (overrides or {}).get(v, name)
            if isinstance(spec, str):
                blocks.append(_coin_preset(spec, sg.degree(v)))
            else:
                blocks.append(np.asarray(spec, dtype=complex))
        return cls(tuple(blocks))

    def matrix(self, sg: StateGraph) -> np.ndarray:
        c = np.zeros((sg.dim, sg.dim), dtype=complex)
        for v, block in enumerate(self.blocks):
            idx = np.array(sg.out[v], dtype=int)
            if idx.size:
                c[np.ix_(idx, idx)] = block
        return c


# ---------------------------------------------------------------- permutations

def permutation_block(order: Sequence[int]) -> np.ndarray:
    """Matrix sending slot ``i`` to slot ``order[i]``."""
    d = len(order)
    if sorted(order) != list(range(d)):
        raise WalkError(f"{list(order)} is not a permutation")
    p = np.zeros((d, d), dtype=complex)
    for i, j in enumerate(order):
        p[j, i] = 1.0
    return p


def _cyclic(d: int, step: int) -> tuple[int, ...]:
    return tuple((i + step) % d for i in range(d)) if d else ()


@dataclass(frozen=True)
class PermutationSpec:
    """Per-vertex slot permutations; ``targets[v][i]`` is where slot ``i`` goes."""

    targets: tuple[tuple[int, ...], ...]

    @classmethod
    def preset(cls, sg: StateGraph, name: str | Sequence[str] = "identity"):
        """Presets: ``identity``, ``cw``, ``ccw``, ``swap`` (alias of ``cw``),
        ``transporting`` (``cw`` on the bipartition class of vertex 0, ``ccw``
        on the other), or one of those names per vertex."""
        n = sg.vertex_count
        if isinstance(name, str):
            if name == "transporting":
                ok, parts = is_bipartite(sg.structure)
                if not ok:
                    raise WalkError("transporting shift needs a bipartite structure graph")
                names = ["cw" if v in parts[0] else "ccw" for v in range(n)]
            else:
                names = [name] * n
        else:
            names = list(name)
            if len(names) != n:
                raise WalkError("need one permutation per vertex")
        targets = []
        for v, nm in enumerate(names):
            d = sg.degree(v)
            if isinstance(nm, str):
                if nm == "identity":
                    targets.append(_cyclic(d, 0))
                elif nm in ("cw", "swap"):
                    targets.append(_cyclic(d, 1))
                elif nm == "ccw":
                    targets.append(_cyclic(d, -1))
                else:
                    raise WalkError(f"unknown permutation preset {nm!r}")
            else:
                order = tuple(int(x) for x in nm)
                if sorted(order) != list(range(d)):
                    raise WalkError(f"vertex {v}: {list(order)} is not a permutation of {d} slots")
                targets.append(order)
        return cls(tuple(targets))

    def kind(self, v: int) -> str | None:
        """'identity', 'cw' or 'ccw' when the block is one of those, else None."""
        t = self.targets[v]
        d = len(t)
        if t == _cyclic(d, 0):
            return "identity"
        if t == _cyclic(d, 1):
            return "cw"
        if t == _cyclic(d, -1):
            return "ccw"
        return None

    def matrix(self, sg: StateGraph) -> np.ndarray:
        p = np.zeros((sg.dim, sg.dim), dtype=complex)
        for v, order in enumerate(self.targets):
            idx = sg.out[v]
            for i, j in enumerate(order):
                p[idx[j], idx[i]] = 1.0
        return p


# ---------------------------------------------------------------- walk

@dataclass(frozen=True)
class WalkSpec:
    state_graph: StateGraph
    coin: CoinSpec
    permutation: PermutationSpec
    variant: str = "U3"
    validate: bool = True
    C: np.ndarray = field(init=False, repr=False, compare=False)
    P: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sg = self.state_graph
        if self.variant not in ("U1", "U3"):
            raise WalkError(f"variant must be 'U1' or 'U3', got {self.variant!r}")
        if len(self.coin.blocks) != sg.vertex_count or len(self.permutation.targets) != sg.vertex_count:
            raise WalkError("coin and permutation need one block per vertex")
        for v in range(sg.vertex_count):
            d = sg.degree(v)
            if self.coin.blocks[v].shape != (d, d):
                raise WalkError(f"coin block at vertex {v} has shape {self.coin.blocks[v].shape}, degree is {d}")
            if len(self.permutation.targets[v]) != d:
                raise WalkError(f"permutation at vertex {v} has wrong size")
            if self.validate and unitarity_defect(self.coin.blocks[v]) > UNITARY_TOL:
                raise WalkError(f"coin block at vertex {v} is not unitary")
        object.__setattr__(self, "C", self.coin.matrix(sg))
        object.__setattr__(self, "P", self.permutation.matrix(sg))

    @property
    def structure(self) -> StructureGraph:
        return self.state_graph.structure

    @property
    def dim(self) -> int:
        return self.state_graph.dim

    def with_variant(self, variant: str) -> "WalkSpec":
        return WalkSpec(self.state_graph, self.coin, self.permutation, variant, self.validate)

    def step(self, k: Iterable[str] | None = None) -> np.ndarray:
        return step_operator(self, k)


def grover_walk(g: StructureGraph, shift: str | Sequence[str] = "identity",
                variant: str = "U3", target_degree: int | None = 3) -> WalkSpec:
    """Grover coin everywhere on the loop-padded state graph, with a permutation preset."""
    sg = build_state_graph(g, target_degree)
    return WalkSpec(sg, CoinSpec.preset(sg, "grover"), PermutationSpec.preset(sg, shift), variant)


def all_open(g: StructureGraph) -> frozenset[str]:
    return frozenset(g.labels)


def reflecting_shift(sg: StateGraph, k: Iterable[str] | None = None) -> np.ndarray:
    """``R_K``: swap partners over open edges, fix closed edges and loops."""
    if k is None:
        open_ = all_open(sg.structure)
    else:
        open_ = frozenset(k)
        unknown = open_ - set(sg.structure.labels)
        if unknown:
            raise GraphError(f"configuration names unknown edges {sorted(unknown)}")
    r = np.zeros((sg.dim, sg.dim), dtype=complex)
    for e in sg.edges:
        j = e.partner if (e.label is not None and e.label in open_) else e.index
        r[j, e.index] = 1.0
    return r


def step_operator(w: WalkSpec, k: Iterable[str] | None = None) -> np.ndarray:
    """``U_K = P R_K C`` (variant U1) or ``C P R_K`` (variant U3)."""
    r = reflecting_shift(w.state_graph, k)
    if w.variant == "U1":
        return w.P @ r @ w.C
    return w.C @ w.P @ r


def apply_fixed(psi: np.ndarray, w: WalkSpec, k: Iterable[str] | None, t: int) -> np.ndarray:
    """``U_K^t psi`` for a fixed configuration."""
    psi = np.asarray(psi, dtype=complex)
    n0 = np.linalg.norm(psi)
    if abs(n0 - 1.0) > NORM_TOL:
        raise WalkError(f"initial state has norm {n0}")
    u = step_operator(w, k)
    out = psi.copy()
    for _ in range(t):
        out = u @ out
    if abs(np.linalg.norm(out) - n0) > NORM_TOL:
        raise NumericalInstabilityError("norm drifted during evolution")
    return out


# ---------------------------------------------------------------- JSON

def _block_from_json(x) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in x], dtype=complex)


def _block_to_json(b: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in b]


def walk_from_dict(data: Mapping, g: StructureGraph, validate: bool = True) -> WalkSpec:
    """Build a walk from its JSON form.

    ``coin`` is a preset name or ``{"default": name, "vertices": {v: name or
    [[[re, im], ...], ...]}}``; ``permutation`` is a preset name, a list with
    one preset per vertex, or ``{"default": name, "vertices": {v: name or
    target list}}``.
    """
    sg = build_state_graph(g, data.get("target_degree"))
    coin = data.get("coin", "grover")
    if isinstance(coin, str):
        coin_spec = CoinSpec.preset(sg, coin)
    else:
        overrides = {}
        for v, x in (coin.get("vertices") or {}).items():
            overrides[int(v)] = x if isinstance(x, str) else _block_from_json(x)
        coin_spec = CoinSpec.preset(sg, coin.get("default", "grover"), overrides)
    perm = data.get("permutation", "identity")
    if isinstance(perm, Mapping):
        names = [perm.get("default", "identity")] * sg.vertex_count
        for v, x in (perm.get("vertices") or {}).items():
            names[int(v)] = x
        perm_spec = PermutationSpec.preset(sg, names)
    else:
        perm_spec = PermutationSpec.preset(sg, perm)
    return WalkSpec(sg, coin_spec, perm_spec, data.get("variant", "U3"), validate)


def walk_to_dict(w: WalkSpec, target_degree: int | None = None) -> dict:
    sg = w.state_graph
    return {
        "target_degree": target_degree,
        "coin": {"default": "identity",
                 "vertices": {str(v): _block_to_json(b) for v, b in enumerate(w.coin.blocks)}},
        "permutation": {"default": "identity",
                        "vertices": {str(v): list(w.permutation.targets[v]) for v in range(sg.vertex_count)}},
        "variant": w.variant,
    }


def load_walk(source: str | Path, g: StructureGraph, validate: bool = True) -> WalkSpec:
    """Walk spec from a JSON file, inline JSON, or a bundled preset name."""
    text = None
    path = Path(source)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    elif str(source).lstrip().startswith("{"):
        text = str(source)
    else:
        from importlib import resources
        name = path.name if path.name.endswith(".json") else path.name + ".json"
        res = resources.files("perqwalk") / "corpus" / name
        if str(source) == path.name and res.is_file():
            text = res.read_text(encoding="utf-8")
    if text is None:
        raise FileNotFoundError(f"walk spec not found: {source}")
    return walk_from_dict(json.loads(text), g, validate)
