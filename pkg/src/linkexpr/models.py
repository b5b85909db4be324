"""Deterministic link-representation models and exact distinguishability.

Each model is the maximal deterministic realization of its message-passing
template: node encoders are truncated WL colors (the ceiling of what any
1-WL-bounded encoder can separate) and aggregations are canonical multisets
(the injective ideal of sum/Hadamard aggregators). Equality of the resulting
canonical forms therefore upper-bounds what any trained instance of the same
architecture family can distinguish.

Canonicalization: a model's output is serialized for both endpoint orders and
the lexicographically smaller string is kept. That preserves the binding
between an endpoint and its side of asymmetric structures (distance tables,
hop-power vectors) while making representations exactly symmetric in the
unordered link.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .benchgen import Dataset
from .errors import FingerprintCollisionError, ValidationError
from .graphs import (
    UNREACHABLE,
    Graph,
    NodePair,
    bfs_distances,
    joint_neighborhood,
)
from .symmetry import wl_colors_at_depth


class ModelKind(str, Enum):
    PURE = "pure"
    NCN = "ncn"
    ELPH = "elph"
    NEOGNN = "neognn"
    SEAL = "seal"


DRNL_VARIANTS = ("min", "pair")


@dataclass(frozen=True)
class ModelConfig:
    """Model selection plus the shared radius/depth knobs.

    ``m`` is the link-neighborhood radius and ``l`` the encoder depth (both
    default 3). ``beta`` only affects Neo-GNN's hop weighting and never
    equality verdicts (hop contributions are stored per power). ``h_hops`` is
    the enclosing-subgraph radius for SEAL; when unset it falls back to ``m``.
    """

    kind: ModelKind
    m: int = 3
    l: int = 3
    beta: float = 0.5
    h_hops: Optional[int] = None
    drnl_variant: str = "min"

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.m < 0 or self.l < 0:
            raise ValidationError("m and l must be non-negative")
        if self.kind is ModelKind.ELPH and self.m < 1:
            raise ValidationError("ELPH requires m >= 1")
        if self.kind is ModelKind.NEOGNN and not (0.0 < self.beta < 1.0):
            raise ValidationError("Neo-GNN requires beta in (0, 1)")
        if self.kind is ModelKind.SEAL:
            if self.effective_h < 1:
                raise ValidationError("SEAL requires a subgraph radius >= 1")
            if self.drnl_variant not in DRNL_VARIANTS:
                raise ValidationError(
                    f"drnl_variant must be one of {DRNL_VARIANTS}"
                )
        if self.h_hops is not None and self.h_hops < 1:
            raise ValidationError("h_hops must be >= 1 when given")

    @property
    def effective_h(self) -> int:
        if self.h_hops is not None:
            return self.h_hops
        return max(self.m, 1)


def _digest(form: str) -> str:
    return hashlib.blake2b(form.encode("utf-8"), digest_size=16).hexdigest()


@dataclass(frozen=True, eq=False)
class LinkRepresentation:
    """Canonical serialized model output with a 128-bit fingerprint.

    Equality compares digests; when both canonical forms are present and the
    digests collide on different forms, a hard error is raised instead of a
    silently wrong verdict.
    """

    canonical_form: str
    digest: str

    @classmethod
    def from_form(cls, form: str) -> "LinkRepresentation":
        return cls(canonical_form=form, digest=_digest(form))

    def __eq__(self, other):
        if not isinstance(other, LinkRepresentation):
            return NotImplemented
        if self.digest != other.digest:
            return False
        if self.canonical_form != other.canonical_form:
            raise FingerprintCollisionError(
                "128-bit fingerprint collision between distinct canonical forms"
            )
        return True

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self.digest)


@dataclass(frozen=True)
class ElphCounts:
    """Exact distance-profile tables for one link.

    ``a[du-1][dv-1]`` counts nodes at distance exactly du from u and dv from
    v (both in 1..m); ``b_u[d-1]`` counts nodes at distance d from u and
    strictly farther than d (or unreachable) from v, and symmetrically for
    ``b_v``.
    """

    m: int
    a: Tuple[Tuple[int, ...], ...]
    b_u: Tuple[int, ...]
    b_v: Tuple[int, ...]


def _check_pair(g: Graph, pair: NodePair) -> NodePair:
    u, v = pair
    g.check_node(u)
    g.check_node(v)
    if u == v:
        raise ValidationError(f"link endpoints must differ, got ({u}, {v})")
    return u, v


def _canonical(oriented) -> LinkRepresentation:
    """Lexicographic minimum over the two endpoint orientations."""
    form = min(repr(o) for o in oriented)
    return LinkRepresentation.from_form(form)


def pure_rep(g: Graph, pair: NodePair, l: int) -> LinkRepresentation:
    """Endpoint-only model: unordered pair of depth-l WL colors."""
    u, v = _check_pair(g, pair)
    colors = wl_colors_at_depth(g, l)
    return _canonical(
        (("pure", l, colors[u], colors[v]), ("pure", l, colors[v], colors[u]))
    )


def ncn_rep(g: Graph, pair: NodePair, l: int) -> LinkRepresentation:
    """Endpoint colors plus the multiset of common-neighbor colors."""
    u, v = _check_pair(g, pair)
    colors = wl_colors_at_depth(g, l)
    common = sorted(colors[w] for w in set(g.adj[u]) & set(g.adj[v]))
    common_t = tuple(common)
    return _canonical(
        (
            ("ncn", l, colors[u], colors[v], common_t),
            ("ncn", l, colors[v], colors[u], common_t),
        )
    )


def elph_counts(g: Graph, pair: NodePair, m: int) -> ElphCounts:
    """Exact count tables from two BFS runs (no sketching)."""
    if m < 1:
        raise ValidationError("ELPH counts require m >= 1")
    u, v = _check_pair(g, pair)
    du = bfs_distances(g, u).dist
    dv = bfs_distances(g, v).dist
    a = [[0] * m for _ in range(m)]
    b_u = [0] * m
    b_v = [0] * m
    for i in range(g.n):
        xu, xv = du[i], dv[i]
        if xu is not UNREACHABLE and 1 <= xu <= m:
            if xv is not UNREACHABLE and 1 <= xv <= m:
                a[xu - 1][xv - 1] += 1
            if xv is UNREACHABLE or xv > xu:
                b_u[xu - 1] += 1
        if xv is not UNREACHABLE and 1 <= xv <= m:
            if xu is UNREACHABLE or xu > xv:
                b_v[xv - 1] += 1
    return ElphCounts(
        m=m,
        a=tuple(tuple(row) for row in a),
        b_u=tuple(b_u),
        b_v=tuple(b_v),
    )


def _transpose(a: Tuple[Tuple[int, ...], ...]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(row[i] for row in a) for i in range(len(a)))


def elph_rep(g: Graph, pair: NodePair, m: int, l: int) -> LinkRepresentation:
    """Endpoint colors plus the flattened exact count tables."""
    u, v = _check_pair(g, pair)
    colors = wl_colors_at_depth(g, l)
    counts = elph_counts(g, (u, v), m)
    return _canonical(
        (
            ("elph", m, l, colors[u], colors[v], counts.a, counts.b_u, counts.b_v),
            (
                "elph",
                m,
                l,
                colors[v],
                colors[u],
                _transpose(counts.a),
                counts.b_v,
                counts.b_u,
            ),
        )
    )


def _walk_count_rows(g: Graph, source: int, m: int) -> List[List[int]]:
    """rows[r-1][i] = number of walks of length r from source to i (exact)."""
    x = [0] * g.n
    x[source] = 1
    rows: List[List[int]] = []
    for _ in range(m):
        nxt = [0] * g.n
        for i in range(g.n):
            xi = x[i]
            if xi:
                for j in g.adj[i]:
                    nxt[j] += xi
        rows.append(nxt)
        x = nxt
    return rows


def neognn_rep(
    g: Graph, pair: NodePair, m: int, l: int, beta: float = 0.5
) -> LinkRepresentation:
    """Structural hop-power model with degree features, in exact integers.

    Per endpoint, the hop-r structural term sum_i walks_r(endpoint, i)*deg(i)
    is stored as a vector over r = 1..m rather than the beta-weighted sum, so
    equality verdicts are exact and independent of beta. The pairwise part
    aggregates (b_i, color_i) over the cumulative m-neighborhood, where
    b_i = (sum_r walks_r(u, i)) * (sum_d walks_d(v, i)) — the double sum over
    hop pairs factorizes exactly.
    """
    if not (0.0 < beta < 1.0):
        raise ValidationError("beta must be in (0, 1)")
    u, v = _check_pair(g, pair)
    colors = wl_colors_at_depth(g, l)
    deg = [g.degree(i) for i in range(g.n)]
    rows_u = _walk_count_rows(g, u, m)
    rows_v = _walk_count_rows(g, v, m)
    z_u = tuple(sum(row[i] * deg[i] for i in range(g.n)) for row in rows_u)
    z_v = tuple(sum(row[i] * deg[i] for i in range(g.n)) for row in rows_v)
    s_u = [sum(rows_u[r][i] for r in range(m)) for i in range(g.n)]
    s_v = [sum(rows_v[r][i] for r in range(m)) for i in range(g.n)]
    hood = sorted(joint_neighborhood(g, u, v, m, cumulative=True))
    pairwise = tuple(sorted((s_u[i] * s_v[i], colors[i]) for i in hood))
    return _canonical(
        (
            ("neognn", m, l, colors[u], colors[v], z_u, z_v, pairwise),
            ("neognn", m, l, colors[v], colors[u], z_v, z_u, pairwise),
        )
    )


def enclosing_subgraph(
    g: Graph, pair: NodePair, h: int
) -> Tuple[Graph, Dict[int, int]]:
    """Induced subgraph on all nodes within h hops of either endpoint.

    Returns the subgraph (nodes renumbered in ascending original id) and the
    old-to-new node map.
    """
    if h < 1:
        raise ValidationError("subgraph radius h must be >= 1")
    u, v = _check_pair(g, pair)
    nodes = sorted(joint_neighborhood(g, u, v, h, cumulative=True))
    idx = {old: new for new, old in enumerate(nodes)}
    edges = [
        (idx[a], idx[b]) for a, b in g.edges if a in idx and b in idx
    ]
    labels = None
    if g.labels is not None:
        labels = tuple(g.labels[old] for old in nodes)
    return Graph(len(nodes), edges, labels), idx


def drnl_labels(sub: Graph, pair: NodePair, variant: str = "min"):
    """Distance-based node labels inside an enclosing subgraph.

    ``min`` assigns ``min(d(i,u), d(i,v)) + 1`` over the reachable endpoint
    distances (0 if neither endpoint is reachable, which cannot happen for
    subgraphs built by :func:`enclosing_subgraph`). ``pair`` keeps the sorted
    distance pair itself, encoding unreachable as the marker pair (1, 0).
    """
    if variant not in DRNL_VARIANTS:
        raise ValidationError(f"drnl variant must be one of {DRNL_VARIANTS}")
    u, v = _check_pair(sub, pair)
    du = bfs_distances(sub, u).dist
    dv = bfs_distances(sub, v).dist
    if variant == "min":
        out: List[int] = []
        for i in range(sub.n):
            finite = [d for d in (du[i], dv[i]) if d is not UNREACHABLE]
            out.append(min(finite) + 1 if finite else 0)
        return tuple(out)
    enc = lambda d: (1, 0) if d is UNREACHABLE else (0, d)
    return tuple(
        tuple(sorted((enc(du[i]), enc(dv[i])))) for i in range(sub.n)
    )


def _structural_colors(g: Graph, init_tokens: Sequence, rounds: int) -> List[str]:
    """WL colors as structural digests, comparable across different graphs.

    Each color is a 128-bit digest of the node's rooted unfolding to the
    current depth, so two nodes in different graphs share a color exactly
    when their depth-limited neighborhood trees (with initial tokens) agree.
    """
    colors = [_digest(repr(("init", tok))) for tok in init_tokens]
    for _ in range(rounds):
        colors = [
            _digest(repr((colors[v], tuple(sorted(colors[w] for w in g.adj[v])))))
            for v in range(g.n)
        ]
    return colors


def seal_rep(
    g: Graph, pair: NodePair, h: int, l: int, variant: str = "min"
) -> LinkRepresentation:
    """Subgraph model: WL over the distance-labeled enclosing subgraph.

    The multiset of depth-l structural colors of all subgraph nodes plus the
    two endpoint colors; initial node tokens concatenate the original label
    with the distance label, realizing the label-augmented WL boost.
    """
    u, v = _check_pair(g, pair)
    sub, idx = enclosing_subgraph(g, (u, v), h)
    su, sv = idx[u], idx[v]
    dl = drnl_labels(sub, (su, sv), variant)
    orig = sub.labels if sub.labels is not None else (0,) * sub.n
    tokens = [(orig[i], dl[i]) for i in range(sub.n)]
    colors = _structural_colors(sub, tokens, l)
    all_colors = tuple(sorted(colors))
    return _canonical(
        (
            ("seal", h, l, variant, colors[su], colors[sv], all_colors),
            ("seal", h, l, variant, colors[sv], colors[su], all_colors),
        )
    )


def represent(g: Graph, pair: NodePair, cfg: ModelConfig) -> LinkRepresentation:
    """Dispatch to the configured model's canonical representation."""
    if cfg.kind is ModelKind.PURE:
        return pure_rep(g, pair, cfg.l)
    if cfg.kind is ModelKind.NCN:
        return ncn_rep(g, pair, cfg.l)
    if cfg.kind is ModelKind.ELPH:
        return elph_rep(g, pair, cfg.m, cfg.l)
    if cfg.kind is ModelKind.NEOGNN:
        return neognn_rep(g, pair, cfg.m, cfg.l, cfg.beta)
    if cfg.kind is ModelKind.SEAL:
        return seal_rep(g, pair, cfg.effective_h, cfg.l, cfg.drnl_variant)
    raise ValidationError(f"unknown model kind {cfg.kind!r}")


@dataclass(frozen=True)
class InstanceVerdict:
    """Exact-equality outcome for one mined instance."""

    instance_id: int
    graph_id: int
    pair_a: NodePair
    pair_b: NodePair
    digest_a: str
    digest_b: str
    distinguished: bool


def evaluate_instances(
    ds: Dataset, cfg: ModelConfig, split: str = "all"
) -> List[InstanceVerdict]:
    """Represent both links of every instance in the split; exact verdicts."""
    ids = set(ds.graph_ids_for_split(split))
    verdicts: List[InstanceVerdict] = []
    for idx, inst in enumerate(ds.instances):
        if inst.graph_id not in ids:
            continue
        g = ds.graphs[inst.graph_id]
        ra = represent(g, inst.pair_a, cfg)
        rb = represent(g, inst.pair_b, cfg)
        verdicts.append(
            InstanceVerdict(
                instance_id=idx,
                graph_id=inst.graph_id,
                pair_a=inst.pair_a,
                pair_b=inst.pair_b,
                digest_a=ra.digest,
                digest_b=rb.digest,
                distinguished=(ra != rb),
            )
        )
    if not verdicts:
        raise ValidationError(f"split {split!r} contains no instances")
    return verdicts


def exact_precision(ds: Dataset, cfg: ModelConfig, split: str = "all") -> float:
    """Fraction of the split's instances whose two links get unequal forms."""
    verdicts = evaluate_instances(ds, cfg, split)
    return sum(v.distinguished for v in verdicts) / len(verdicts)
