"""Coined quantum walks on graphs under dynamical percolation."""

from .graphs import (StateGraph, StructureGraph, build_state_graph, corpus_graph, faces,
                     is_bipartite, load_graph, parse_graph)
from .percolation import PercolationScheme, equivalent_to_full, evolve, oracle_scheme
from .walk import CoinSpec, PermutationSpec, WalkSpec, grover_coin, grover_walk, step_operator

__version__ = "0.1.0"

__all__ = [
    "CoinSpec", "PercolationScheme", "PermutationSpec", "StateGraph", "StructureGraph", "WalkSpec",
    "build_state_graph", "corpus_graph", "equivalent_to_full", "evolve", "faces", "grover_coin",
    "grover_walk", "is_bipartite", "load_graph", "oracle_scheme", "parse_graph", "step_operator",
]
