"""Immutable simple undirected graphs and traversal primitives.

Graphs are frozen after construction and safe to share across workers.
Node features are categorical integer labels (optional); distances use a
distinct ``UNREACHABLE`` sentinel (``None``) so any accidental arithmetic on
an unreachable entry raises instead of silently corrupting counts.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .errors import ParseError, ValidationError

UNREACHABLE = None

Edge = Tuple[int, int]
NodePair = Tuple[int, int]


def _normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Simple undirected graph on nodes ``{0..n-1}``.

    Edges are stored as sorted unordered pairs; adjacency lists are derived
    once at construction and kept sorted ascending. Instances are immutable
    by convention (no mutating API) and hashable.
    """

    __slots__ = ("n", "edges", "labels", "adj", "_edge_set")

    def __init__(
        self,
        n: int,
        edges: Iterable[Edge],
        labels: Optional[Sequence[int]] = None,
    ):
        if n < 0:
            raise ValidationError(f"node count must be non-negative, got {n}")
        normalized = set()
        for u, v in edges:
            if u == v:
                raise ValidationError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u}, {v}) has endpoint outside 0..{n - 1}")
            normalized.add(_normalize_edge(u, v))
        if labels is not None:
            labels = tuple(int(x) for x in labels)
            if len(labels) != n:
                raise ValidationError(
                    f"label block has {len(labels)} entries for {n} nodes"
                )
            if any(x < 0 for x in labels):
                raise ValidationError("node labels must be non-negative")
        adj: List[List[int]] = [[] for _ in range(n)]
        for u, v in normalized:
            adj[u].append(v)
            adj[v].append(u)
        self.n = n
        self.edges = tuple(sorted(normalized))
        self.labels = labels
        self.adj = tuple(tuple(sorted(nbrs)) for nbrs in adj)
        self._edge_set = frozenset(normalized)

    def has_edge(self, u: int, v: int) -> bool:
        return _normalize_edge(u, v) in self._edge_set

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def check_node(self, v: int) -> None:
        if not (0 <= v < self.n):
            raise ValidationError(f"node {v} out of range 0..{self.n - 1}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self._edge_set == other._edge_set
            and self.labels == other.labels
        )

    def __hash__(self) -> int:
        return hash((self.n, self._edge_set, self.labels))

    def __repr__(self) -> str:
        lab = "" if self.labels is None else ", labeled"
        return f"Graph(n={self.n}, edges={len(self.edges)}{lab})"


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``{0..n-1}``, stored as the image sequence."""

    mapping: Tuple[int, ...]

    def __post_init__(self):
        n = len(self.mapping)
        seen = [False] * n
        for x in self.mapping:
            if not (0 <= x < n) or seen[x]:
                raise ValidationError("mapping is not a bijection on 0..n-1")
            seen[x] = True

    def __len__(self) -> int:
        return len(self.mapping)

    def __call__(self, v: int) -> int:
        return self.mapping[v]

    def apply_pair(self, pair: NodePair) -> NodePair:
        return _normalize_edge(self.mapping[pair[0]], self.mapping[pair[1]])

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for i, x in enumerate(self.mapping):
            inv[x] = i
        return Permutation(tuple(inv))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))


@dataclass(frozen=True)
class DistanceVector:
    """Hop counts from ``source``; unreachable entries are ``UNREACHABLE``."""

    source: int
    dist: Tuple[Optional[int], ...]


def load_graph(text: str) -> Graph:
    """Parse the edge-list text format.

    Format: a header line ``n=<int>``, then one edge per line ``u v``
    (whitespace-separated decimals), optionally a trailing line
    ``labels: l0 l1 ... l(n-1)``. Lines starting with ``#`` and blank lines
    are ignored. Duplicate edges and both orientations collapse to one edge.
    """
    n: Optional[int] = None
    edges: List[Edge] = []
    labels: Optional[Tuple[int, ...]] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            if not line.startswith("n="):
                raise ParseError("expected header 'n=<int>' before any edge", lineno)
            try:
                n = int(line[2:])
            except ValueError:
                raise ParseError(f"bad node count {line[2:]!r}", lineno) from None
            if n < 0:
                raise ParseError("node count must be non-negative", lineno)
            continue
        if line.startswith("labels:"):
            if labels is not None:
                raise ParseError("duplicate label block", lineno)
            parts = line[len("labels:"):].split()
            try:
                labels = tuple(int(p) for p in parts)
            except ValueError:
                raise ParseError("label block must contain integers", lineno) from None
            if len(labels) != n:
                raise ParseError(
                    f"label block has {len(labels)} entries for {n} nodes", lineno
                )
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"malformed edge line {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"malformed edge line {line!r}", lineno) from None
        if u == v:
            raise ParseError(f"self-loop at node {u}", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"endpoint out of range in edge ({u}, {v})", lineno)
        edges.append((u, v))
    if n is None:
        raise ParseError("empty document: missing 'n=<int>' header")
    return Graph(n, edges, labels)


def load_graph_file(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return load_graph(fh.read())


def dump_graph(g: Graph) -> str:
    """Serialize to the edge-list text format (inverse of :func:`load_graph`)."""
    lines = [f"n={g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    if g.labels is not None:
        lines.append("labels: " + " ".join(str(x) for x in g.labels))
    return "\n".join(lines) + "\n"


def bfs_distances(g: Graph, source: int) -> DistanceVector:
    """Shortest-path hop counts from ``source`` (UNREACHABLE where none)."""
    g.check_node(source)
    dist: List[Optional[int]] = [UNREACHABLE] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        dv = dist[v]
        for w in g.adj[v]:
            if dist[w] is UNREACHABLE:
                dist[w] = dv + 1
                queue.append(w)
    return DistanceVector(source=source, dist=tuple(dist))


def exact_ring(g: Graph, v: int, m: int) -> frozenset:
    """Nodes at shortest-path distance exactly ``m`` from ``v``."""
    if m < 0:
        raise ValidationError(f"hop radius must be non-negative, got {m}")
    dist = bfs_distances(g, v).dist
    return frozenset(w for w in range(g.n) if dist[w] == m)


def joint_neighborhood(
    g: Graph, u: int, v: int, m: int, cumulative: bool = False
) -> frozenset:
    """Union of the two endpoints' exact-distance rings at radius ``m``.

    With ``cumulative=True`` returns the union over all radii 0..m, i.e. all
    nodes within ``m`` hops of either endpoint.
    """
    if m < 0:
        raise ValidationError(f"hop radius must be non-negative, got {m}")
    g.check_node(u)
    g.check_node(v)
    du = bfs_distances(g, u).dist
    dv = bfs_distances(g, v).dist
    if cumulative:
        return frozenset(
            w
            for w in range(g.n)
            if (du[w] is not UNREACHABLE and du[w] <= m)
            or (dv[w] is not UNREACHABLE and dv[w] <= m)
        )
    return frozenset(w for w in range(g.n) if du[w] == m or dv[w] == m)


def apply_permutation(g: Graph, p: Permutation) -> Graph:
    """Relabel nodes: edge {a,b} becomes {p(a),p(b)}; labels travel with nodes."""
    if len(p) != g.n:
        raise ValidationError(
            f"permutation size {len(p)} does not match node count {g.n}"
        )
    edges = [p.apply_pair(e) for e in g.edges]
    labels = None
    if g.labels is not None:
        relabeled = [0] * g.n
        for v, lab in enumerate(g.labels):
            relabeled[p(v)] = lab
        labels = tuple(relabeled)
    return Graph(g.n, edges, labels)
