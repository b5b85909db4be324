"""Toolkit for link-level expressiveness benchmarking on small graphs.

Generates the synthetic twin-block benchmark, computes exact and
WL-approximated graph-symmetry scores, evaluates deterministic
link-representation models for their ability to tell non-automorphic links
apart, and runs the reliability-checked paired Hotelling-T^2 comparison on
externally supplied embeddings.
"""

__version__ = "0.1.0"

from .graphs import (
    UNREACHABLE,
    DistanceVector,
    Graph,
    Permutation,
    apply_permutation,
    bfs_distances,
    exact_ring,
    joint_neighborhood,
    load_graph,
    load_graph_file,
)
from .symmetry import (
    AutomorphismSet,
    Coloring,
    OrbitPartition,
    are_links_automorphic,
    enumerate_automorphisms,
    orbits,
    symmetry_exact,
    symmetry_wl,
    wl_colors_at_depth,
    wl_refine,
)

__all__ = [
    "UNREACHABLE",
    "DistanceVector",
    "Graph",
    "Permutation",
    "apply_permutation",
    "bfs_distances",
    "exact_ring",
    "joint_neighborhood",
    "load_graph",
    "load_graph_file",
    "AutomorphismSet",
    "Coloring",
    "OrbitPartition",
    "are_links_automorphic",
    "enumerate_automorphisms",
    "orbits",
    "symmetry_exact",
    "symmetry_wl",
    "wl_colors_at_depth",
    "wl_refine",
    "__version__",
]
