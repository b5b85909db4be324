"""1-WL color refinement, exact automorphism enumeration, orbits, and the
two graph-symmetry scores.

Color ids are canonical: at every round a node's signature is its previous
color plus the sorted multiset of neighbor colors, and signatures are mapped
to dense new ids in sorted signature order. This makes colorings
implementation-independent and permutation-equivariant.

Automorphism search is exhaustive backtracking restricted to stable WL color
classes with incremental adjacency consistency (label-preserving by
construction, since initial colors encode labels). Search is refused when the
graph exceeds the node cap or when the group provably or actually exceeds the
group-size cap; at benchmark scale (<= 34 nodes, non-degenerate edge
probabilities) refusals are rare.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ExactSearchRefused, ValidationError
from .graphs import Graph, NodePair, Permutation, _normalize_edge

DEFAULT_NODE_CAP = 40
DEFAULT_GROUP_CAP = 100_000


@dataclass(frozen=True)
class Coloring:
    """Stable (or depth-truncated) WL coloring with dense color ids."""

    colors: Tuple[int, ...]
    class_count: int
    iterations: int


def _initial_colors(g: Graph) -> List[int]:
    if g.labels is None:
        return [0] * g.n
    ranks = {lab: i for i, lab in enumerate(sorted(set(g.labels)))}
    return [ranks[lab] for lab in g.labels]


def _refine_once(g: Graph, colors: Sequence[int]) -> List[int]:
    signatures = [
        (colors[v], tuple(sorted(colors[w] for w in g.adj[v]))) for v in range(g.n)
    ]
    ids = {sig: i for i, sig in enumerate(sorted(set(signatures)))}
    return [ids[sig] for sig in signatures]


def wl_refine(g: Graph, max_rounds: Optional[int] = None) -> Coloring:
    """Run 1-WL to the stable partition (or at most ``max_rounds`` rounds).

    ``iterations`` counts the rounds that actually changed the partition;
    regular unlabeled graphs report 0.
    """
    colors = _initial_colors(g)
    # densify the initial assignment so ids are 0..k-1
    colors = [
        {c: i for i, c in enumerate(sorted(set(colors)))}[c] for c in colors
    ] if colors else []
    rounds = 0
    limit = g.n if max_rounds is None else min(max_rounds, g.n)
    while rounds < limit:
        nxt = _refine_once(g, colors)
        if nxt == colors:
            break
        colors = nxt
        rounds += 1
    class_count = len(set(colors)) if colors else 0
    return Coloring(colors=tuple(colors), class_count=class_count, iterations=rounds)


def wl_colors_at_depth(g: Graph, depth: int) -> Tuple[int, ...]:
    """Dense canonical colors after ``depth`` refinement rounds.

    Refinement stops early once stable; with canonical ids the result is then
    identical to running the remaining rounds.
    """
    if depth < 0:
        raise ValidationError(f"depth must be non-negative, got {depth}")
    return wl_refine(g, max_rounds=depth).colors


class AutomorphismSet:
    """Explicit list of all label-preserving automorphisms of one graph.

    Mappings are stored as a (order, n) integer array; ``perms()`` yields
    them as :class:`Permutation` objects on demand.
    """

    def __init__(self, mappings: np.ndarray):
        if mappings.ndim != 2:
            raise ValidationError("mappings must be a 2-D array")
        self.mappings = mappings

    @property
    def order(self) -> int:
        return self.mappings.shape[0]

    @property
    def n(self) -> int:
        return self.mappings.shape[1]

    def perms(self) -> Iterator[Permutation]:
        for row in self.mappings:
            yield Permutation(tuple(int(x) for x in row))

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"AutomorphismSet(order={self.order}, n={self.n})"


@dataclass(frozen=True)
class OrbitPartition:
    """Node partition under the automorphism group action."""

    orbit_id: Tuple[int, ...]
    orbit_count: int


def _twin_group_lower_bound(g: Graph, adj_masks: List[int]) -> int:
    """Cheap lower bound on |Aut| from twin classes.

    Nodes with identical open neighborhoods (false twins) or identical closed
    neighborhoods (true twins) and equal labels are freely interchangeable, so
    each twin class of size k contributes a factor k!.
    """
    labels = g.labels if g.labels is not None else (0,) * g.n
    best = 1
    for closed in (False, True):
        groups: Dict[Tuple[int, int], int] = {}
        for v in range(g.n):
            key_mask = adj_masks[v] | (1 << v) if closed else adj_masks[v]
            key = (key_mask, labels[v])
            groups[key] = groups.get(key, 0) + 1
        bound = 1
        for size in groups.values():
            for k in range(2, size + 1):
                bound *= k
        best = max(best, bound)
    return best


def enumerate_automorphisms(
    g: Graph,
    node_cap: int = DEFAULT_NODE_CAP,
    group_cap: int = DEFAULT_GROUP_CAP,
) -> AutomorphismSet:
    """Exhaustively list all label-preserving automorphisms.

    Backtracking assigns images in a fixed node order, restricting candidates
    to the node's stable WL color class and checking adjacency against the
    already-assigned prefix in O(1) via bitmasks. Raises
    :class:`ExactSearchRefused` when ``n`` exceeds ``node_cap`` or the group
    exceeds ``group_cap`` (detected up front via the twin-class lower bound
    where possible, otherwise during the search).
    """
    n = g.n
    if n > node_cap:
        raise ExactSearchRefused(
            f"exact search refused: {n} nodes exceeds cap {node_cap}"
        )
    if n == 0:
        return AutomorphismSet(np.zeros((1, 0), dtype=np.int16))

    adj_masks = [0] * n
    for u, v in g.edges:
        adj_masks[u] |= 1 << v
        adj_masks[v] |= 1 << u

    if _twin_group_lower_bound(g, adj_masks) > group_cap:
        raise ExactSearchRefused(
            f"exact search refused: automorphism count exceeds cap {group_cap}"
        )

    colors = wl_refine(g).colors
    class_members: Dict[int, List[int]] = {}
    for v, c in enumerate(colors):
        class_members.setdefault(c, []).append(v)
    class_mask = {c: sum(1 << v for v in vs) for c, vs in class_members.items()}
    # assign most-constrained color classes first; ties broken by node id
    order = sorted(range(n), key=lambda v: (len(class_members[colors[v]]), colors[v], v))
    cand0 = [class_mask[colors[v]] for v in order]
    adj_of = [g.adj[v] for v in order]

    found: List[List[int]] = []
    mapping = [-1] * n
    # req_imgs[v]: bitmask of images of v's already-assigned neighbors
    req_imgs = [0] * n
    used = 0

    def recurse(i: int) -> None:
        nonlocal used
        if i == n:
            found.append(mapping.copy())
            if len(found) > group_cap:
                raise ExactSearchRefused(
                    f"exact search refused: automorphism count exceeds cap {group_cap}"
                )
            return
        v = order[i]
        need = req_imgs[v]
        avail = cand0[i] & ~used
        while avail:
            wbit = avail & -avail
            avail ^= wbit
            w = wbit.bit_length() - 1
            if (adj_masks[w] & used) != need:
                continue
            mapping[v] = w
            used |= wbit
            touched = []
            for x in adj_of[i]:
                if mapping[x] < 0:
                    req_imgs[x] |= wbit
                    touched.append(x)
            recurse(i + 1)
            for x in touched:
                req_imgs[x] &= ~wbit
            used ^= wbit
            mapping[v] = -1

    recurse(0)
    dtype = np.int16 if n < 2 ** 15 else np.int32
    return AutomorphismSet(np.array(found, dtype=dtype))


def orbits(
    g: Graph,
    node_cap: int = DEFAULT_NODE_CAP,
    group_cap: int = DEFAULT_GROUP_CAP,
    auts: Optional[AutomorphismSet] = None,
) -> OrbitPartition:
    """Node orbits under the full automorphism group.

    Since the enumerated list is the whole group (closed under composition),
    each node's orbit is exactly the set of its images, so the minimum image
    is a canonical orbit representative.
    """
    if auts is None:
        auts = enumerate_automorphisms(g, node_cap=node_cap, group_cap=group_cap)
    if g.n == 0:
        return OrbitPartition(orbit_id=(), orbit_count=0)
    reps = auts.mappings.min(axis=0)
    ids: Dict[int, int] = {}
    orbit_id = []
    for v in range(g.n):
        r = int(reps[v])
        if r not in ids:
            ids[r] = len(ids)
        orbit_id.append(ids[r])
    return OrbitPartition(orbit_id=tuple(orbit_id), orbit_count=len(ids))


def _pair_codes(auts: AutomorphismSet, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Orbit codes min over the group of sorted image pairs, vectorized.

    Returns, for each input pair, ``min_sigma(lo * n + hi)`` where
    ``(lo, hi)`` is the sorted image of the pair under sigma. Equal codes are
    equivalent to membership in the same pair orbit because the list is the
    full group.
    """
    n = auts.n
    m = auts.mappings.astype(np.int64, copy=False)
    k = m.shape[0]
    best = np.full(us.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
    chunk = max(1, min(k, 2_000_000 // max(1, us.shape[0])))
    for start in range(0, k, chunk):
        block = m[start : start + chunk]
        iu = block[:, us]
        iv = block[:, vs]
        lo = np.minimum(iu, iv)
        hi = np.maximum(iu, iv)
        codes = lo * n + hi
        best = np.minimum(best, codes.min(axis=0))
    return best


def pair_orbit_codes(
    auts: AutomorphismSet, pairs: Sequence[NodePair]
) -> np.ndarray:
    """Canonical pair-orbit code for each unordered node pair."""
    us = np.array([p[0] for p in pairs], dtype=np.int64)
    vs = np.array([p[1] for p in pairs], dtype=np.int64)
    return _pair_codes(auts, us, vs)


def are_links_automorphic(
    g: Graph,
    pair_a: NodePair,
    pair_b: NodePair,
    auts: Optional[AutomorphismSet] = None,
) -> bool:
    """True iff some automorphism maps {u,v} onto {u',v'} as sets."""
    for v in (*pair_a, *pair_b):
        g.check_node(v)
    if auts is None:
        auts = enumerate_automorphisms(g)
    a = _normalize_edge(*pair_a)
    b = _normalize_edge(*pair_b)
    codes = pair_orbit_codes(auts, [a, b])
    return bool(codes[0] == codes[1])


def symmetry_exact(
    g: Graph,
    node_cap: int = DEFAULT_NODE_CAP,
    group_cap: int = DEFAULT_GROUP_CAP,
) -> float:
    """Orbit-based symmetry score ``1 - (#orbits - 1)/(n - 1)``.

    Single-node graphs score 1.0 by convention (the ratio is degenerate);
    empty graphs are rejected.
    """
    if g.n < 1:
        raise ValidationError("symmetry measure undefined for an empty graph")
    if g.n == 1:
        return 1.0
    part = orbits(g, node_cap=node_cap, group_cap=group_cap)
    return float(1 - Fraction(part.orbit_count - 1, g.n - 1))


def symmetry_wl(g: Graph) -> float:
    """WL-class approximation ``1 - (#classes - 1)/(n - 1)`` of the score."""
    if g.n < 1:
        raise ValidationError("symmetry measure undefined for an empty graph")
    if g.n == 1:
        return 1.0
    coloring = wl_refine(g)
    return float(1 - Fraction(coloring.class_count - 1, g.n - 1))
