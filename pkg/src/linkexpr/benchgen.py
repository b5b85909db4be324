"""Synthetic benchmark generation: twin-block graphs, pair mining, datasets.

Each benchmark graph is built in two steps: sample an Erdős–Rényi block
G(n, p) with p ~ U(0,1), then duplicate it and add each of the n^2 cross-block
pairs independently with probability p' ~ U(0,1). The duplication plants rich
near-symmetries, which makes pairs of distinct links that share WL colors
common. Test items are unordered pairs of node pairs that are WL-matched at
the stable coloring yet provably non-automorphic.

Randomness: one splitmix64 stream per sampled graph, derived from the dataset
seed and the attempt index (label ``graph:<k>``). Draw order within a graph is
fixed: block size n, then p, then one draw per intra-block pair (u < v in
lexicographic order), then p', then one draw per cross pair (i, n + j) for
i, j in lexicographic order. Identical seeds therefore reproduce identical
datasets byte for byte.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .errors import ExactSearchRefused, ParseError, PartialDatasetError, ValidationError
from .graphs import Graph, NodePair
from .rng import SplitMix64, derive_seed
from .symmetry import (
    AutomorphismSet,
    enumerate_automorphisms,
    pair_orbit_codes,
    wl_refine,
)

DATASET_VERSION = "linkexpr-dataset-1"
DEFAULT_PAIR_CAP = 32
SPLIT_NAMES = ("train", "validation", "test")


@dataclass(frozen=True)
class GenParams:
    """Generation parameters; defaults match the benchmark's block sizes."""

    seed: int = 0
    target_graph_count: int = 1
    n_min: int = 5
    n_max: int = 17
    max_attempts_per_graph: int = 50

    def __post_init__(self):
        if not (2 <= self.n_min <= self.n_max):
            raise ValidationError(
                f"need 2 <= n_min <= n_max, got ({self.n_min}, {self.n_max})"
            )
        if self.target_graph_count < 1:
            raise ValidationError("target_graph_count must be >= 1")
        if self.max_attempts_per_graph < 1:
            raise ValidationError("max_attempts_per_graph must be >= 1")


@dataclass(frozen=True)
class LinkPairInstance:
    """One mined test item: two WL-matched, non-automorphic links."""

    graph_id: int
    pair_a: NodePair
    pair_b: NodePair
    wl_matched: bool = True
    non_automorphic: bool = True


@dataclass
class Dataset:
    graphs: List[Graph]
    instances: List[LinkPairInstance]
    splits: Dict[str, Tuple[int, ...]]
    provenance: Dict[str, object]
    truncated: Tuple[bool, ...] = ()

    @property
    def any_truncated(self) -> bool:
        return any(self.truncated)

    def graph_ids_for_split(self, split: str) -> Tuple[int, ...]:
        if split == "all":
            return tuple(range(len(self.graphs)))
        if split not in self.splits:
            raise ValidationError(f"unknown split {split!r}")
        return self.splits[split]


def _mirrored_intra_edges(n: int, p: float, rng: SplitMix64) -> List[Tuple[int, int]]:
    edges: List[Tuple[int, int]] = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v))
                edges.append((u + n, v + n))
    return edges


def _cross_edges(n: int, p_cross: float, rng: SplitMix64) -> List[Tuple[int, int]]:
    edges: List[Tuple[int, int]] = []
    for i in range(n):
        for j in range(n):
            if rng.random() < p_cross:
                edges.append((i, n + j))
    return edges


def twin_block_graph(n: int, p: float, p_cross: float, rng: SplitMix64) -> Graph:
    """Duplicated ER block with random cross edges; 2n nodes total.

    Nodes 0..n-1 and n..2n-1 carry identical intra-block edge sets; each of
    the n^2 cross pairs (i, n+j) is added independently with probability
    ``p_cross``. One uniform draw is consumed per candidate pair whether or
    not the edge is added, so forced probabilities keep the stream aligned.
    """
    edges = _mirrored_intra_edges(n, p, rng)
    edges += _cross_edges(n, p_cross, rng)
    return Graph(2 * n, edges)


def sample_twin_er_graph(rng: SplitMix64, params: GenParams) -> Graph:
    """One benchmark graph: n ~ U{n_min..n_max}, p, p' ~ U(0,1), then blocks."""
    n = rng.randint(params.n_min, params.n_max)
    p = rng.random()
    edges = _mirrored_intra_edges(n, p, rng)
    p_cross = rng.random()
    edges += _cross_edges(n, p_cross, rng)
    return Graph(2 * n, edges)


def mine_test_pairs(
    g: Graph,
    cap: int = DEFAULT_PAIR_CAP,
    graph_id: int = 0,
    auts: Optional[AutomorphismSet] = None,
) -> Tuple[List[LinkPairInstance], bool]:
    """Mine qualifying link pairs: WL-matched endpoints, non-automorphic.

    Candidates are all unordered node pairs (edges and non-edges alike).
    Qualifying combinations are kept in lexicographic order of
    ``(pair_a, pair_b)`` and truncated at ``cap``; the second return value
    reports whether truncation occurred. Raises
    :class:`~linkexpr.errors.ExactSearchRefused` when the exact automorphism
    search is infeasible for ``g``.
    """
    if cap < 1:
        raise ValidationError("pair cap must be >= 1")
    if auts is None:
        auts = enumerate_automorphisms(g)
    n = g.n
    colors = wl_refine(g).colors
    pairs: List[NodePair] = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if not pairs:
        return [], False
    codes = pair_orbit_codes(auts, pairs)

    buckets: Dict[Tuple[int, int], List[int]] = {}
    for idx, (u, v) in enumerate(pairs):
        cu, cv = colors[u], colors[v]
        key = (cu, cv) if cu <= cv else (cv, cu)
        buckets.setdefault(key, []).append(idx)

    # count qualifying combos per bucket without enumerating them
    def bucket_qualifying(members: List[int]) -> int:
        size = len(members)
        total = size * (size - 1) // 2
        per_code: Dict[int, int] = {}
        for idx in members:
            c = int(codes[idx])
            per_code[c] = per_code.get(c, 0) + 1
        same = sum(k * (k - 1) // 2 for k in per_code.values())
        return total - same

    bucket_of: Dict[int, Tuple[int, int]] = {}
    active: Dict[Tuple[int, int], List[int]] = {}
    for key, members in buckets.items():
        if bucket_qualifying(members) > 0:
            active[key] = members
            for idx in members:
                bucket_of[idx] = key
    if not active:
        return [], False

    instances: List[LinkPairInstance] = []
    truncated = False
    for idx_a in range(len(pairs)):
        key = bucket_of.get(idx_a)
        if key is None:
            continue
        members = active[key]
        start = bisect_right(members, idx_a)
        code_a = codes[idx_a]
        for idx_b in members[start:]:
            if codes[idx_b] != code_a:
                if len(instances) == cap:
                    truncated = True
                    break
                instances.append(
                    LinkPairInstance(
                        graph_id=graph_id,
                        pair_a=pairs[idx_a],
                        pair_b=pairs[idx_b],
                    )
                )
        if truncated:
            break
    return instances, truncated


def _split_sizes(count: int, ratios: Sequence[float]) -> List[int]:
    """Floor each fraction, then hand remainders to train, validation, test."""
    sizes = [int(count * r) for r in ratios]
    leftover = count - sum(sizes)
    i = 0
    while leftover > 0:
        sizes[i % len(sizes)] += 1
        leftover -= 1
        i += 1
    return sizes


def _ordered_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def build_dataset(
    params: GenParams,
    split_ratios: Sequence[float] = (0.8, 0.1, 0.1),
    pair_cap: int = DEFAULT_PAIR_CAP,
    threads: int = 1,
) -> Dataset:
    """Sample graphs until ``target_graph_count`` of them carry >= 1 instance.

    Attempt k uses its own derived stream (``graph:<k>``); graphs whose exact
    automorphism search is refused count as failed attempts. Parallel workers
    evaluate attempts in blocks and results are accepted in attempt order, so
    the output is a pure function of (seed, params).
    """
    ratios = tuple(float(r) for r in split_ratios)
    if len(ratios) != len(SPLIT_NAMES):
        raise ValidationError(f"expected {len(SPLIT_NAMES)} split fractions")
    if any(r <= 0 for r in ratios):
        raise ValidationError("split fractions must be positive")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"split fractions must sum to 1, got {sum(ratios)}")

    budget = params.target_graph_count * params.max_attempts_per_graph

    def attempt(k: int):
        rng = SplitMix64(derive_seed(params.seed, f"graph:{k}"))
        g = sample_twin_er_graph(rng, params)
        try:
            mined, truncated = mine_test_pairs(g, cap=pair_cap)
        except ExactSearchRefused:
            return ("refused", g, [], False)
        if not mined:
            return ("empty", g, [], False)
        return ("ok", g, mined, truncated)

    graphs: List[Graph] = []
    instances: List[LinkPairInstance] = []
    truncated_flags: List[bool] = []
    refused = 0
    attempts_used = 0
    block = 1 if threads <= 1 else threads * 4
    next_attempt = 0
    while len(graphs) < params.target_graph_count and next_attempt < budget:
        ks = list(range(next_attempt, min(next_attempt + block, budget)))
        next_attempt = ks[-1] + 1
        for status, g, mined, truncated in _ordered_map(attempt, ks, threads):
            if len(graphs) >= params.target_graph_count:
                break
            attempts_used += 1
            if status == "refused":
                refused += 1
                continue
            if status == "empty":
                continue
            gid = len(graphs)
            graphs.append(g)
            truncated_flags.append(truncated)
            for inst in mined:
                instances.append(
                    LinkPairInstance(
                        graph_id=gid, pair_a=inst.pair_a, pair_b=inst.pair_b
                    )
                )
    if len(graphs) < params.target_graph_count:
        raise PartialDatasetError(
            f"attempts exhausted: {len(graphs)}/{params.target_graph_count} graphs "
            f"after {attempts_used} attempts",
            achieved=len(graphs),
        )

    ids = list(range(len(graphs)))
    SplitMix64(derive_seed(params.seed, "split")).shuffle(ids)
    sizes = _split_sizes(len(ids), ratios)
    splits: Dict[str, Tuple[int, ...]] = {}
    pos = 0
    for name, size in zip(SPLIT_NAMES, sizes):
        splits[name] = tuple(sorted(ids[pos : pos + size]))
        pos += size

    provenance: Dict[str, object] = {
        "seed": params.seed,
        "target_graph_count": params.target_graph_count,
        "n_min": params.n_min,
        "n_max": params.n_max,
        "max_attempts_per_graph": params.max_attempts_per_graph,
        "pair_cap": pair_cap,
        "split_ratios": list(ratios),
        "generator": f"linkexpr/{__version__}",
        "attempts_used": attempts_used,
        "refused_graphs": refused,
    }
    return Dataset(
        graphs=graphs,
        instances=instances,
        splits=splits,
        provenance=provenance,
        truncated=tuple(truncated_flags),
    )


def dataset_to_json(ds: Dataset) -> str:
    doc = {
        "version": DATASET_VERSION,
        "provenance": ds.provenance,
        "graphs": [
            {
                "id": i,
                "n": g.n,
                "edges": [[u, v] for u, v in g.edges],
                "labels": list(g.labels) if g.labels is not None else None,
                "truncated_mining": bool(ds.truncated[i]) if i < len(ds.truncated) else False,
            }
            for i, g in enumerate(ds.graphs)
        ],
        "instances": [
            {
                "graph_id": inst.graph_id,
                "pair_a": list(inst.pair_a),
                "pair_b": list(inst.pair_b),
                "wl_matched": inst.wl_matched,
                "non_automorphic": inst.non_automorphic,
            }
            for inst in ds.instances
        ],
        "splits": {name: list(ids) for name, ids in ds.splits.items()},
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_dataset(ds: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dataset_to_json(ds))


def dataset_from_json(text: str) -> Dataset:
    if not text.strip():
        raise ParseError("empty document")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("dataset document must be a JSON object")
    version = doc.get("version")
    if version != DATASET_VERSION:
        raise ValidationError(
            f"unsupported dataset version {version!r}, expected {DATASET_VERSION!r}"
        )
    try:
        graph_entries = sorted(doc["graphs"], key=lambda e: e["id"])
        if [e["id"] for e in graph_entries] != list(range(len(graph_entries))):
            raise ValidationError("graph ids must be exactly 0..G-1")
        graphs = [
            Graph(e["n"], [tuple(edge) for edge in e["edges"]], e.get("labels"))
            for e in graph_entries
        ]
        truncated = tuple(bool(e.get("truncated_mining", False)) for e in graph_entries)
        instances = [
            LinkPairInstance(
                graph_id=int(rec["graph_id"]),
                pair_a=tuple(rec["pair_a"]),
                pair_b=tuple(rec["pair_b"]),
                wl_matched=bool(rec.get("wl_matched", True)),
                non_automorphic=bool(rec.get("non_automorphic", True)),
            )
            for rec in doc["instances"]
        ]
        splits = {
            name: tuple(int(x) for x in ids) for name, ids in doc["splits"].items()
        }
        provenance = dict(doc.get("provenance", {}))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed dataset document: {exc}") from None
    ds = Dataset(
        graphs=graphs,
        instances=instances,
        splits=splits,
        provenance=provenance,
        truncated=truncated,
    )
    validate_dataset_structure(ds)
    return ds


def read_dataset(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return dataset_from_json(fh.read())


def validate_dataset_structure(ds: Dataset) -> None:
    """Check the structural invariants every dataset must satisfy."""
    n_graphs = len(ds.graphs)
    with_instance = set()
    for inst in ds.instances:
        if not (0 <= inst.graph_id < n_graphs):
            raise ValidationError(
                f"instance references missing graph_id {inst.graph_id}"
            )
        g = ds.graphs[inst.graph_id]
        for v in (*inst.pair_a, *inst.pair_b):
            if not (0 <= v < g.n):
                raise ValidationError(
                    f"instance on graph {inst.graph_id} has node {v} out of range"
                )
        a = tuple(sorted(inst.pair_a))
        b = tuple(sorted(inst.pair_b))
        if a == b:
            raise ValidationError("instance pairs must differ")
        if a[0] == a[1] or b[0] == b[1]:
            raise ValidationError("instance pairs must have distinct endpoints")
        if not (inst.wl_matched and inst.non_automorphic):
            raise ValidationError("stored instances must be WL-matched and non-automorphic")
        with_instance.add(inst.graph_id)
    if set(ds.splits.keys()) != set(SPLIT_NAMES):
        raise ValidationError(f"splits must be exactly {SPLIT_NAMES}")
    seen: List[int] = []
    for ids in ds.splits.values():
        seen.extend(ids)
    if sorted(seen) != list(range(n_graphs)):
        raise ValidationError("splits must partition the graph ids")
    if with_instance != set(range(n_graphs)):
        missing = sorted(set(range(n_graphs)) - with_instance)
        raise ValidationError(f"graphs without instances: {missing}")


def verify_instances(ds: Dataset) -> None:
    """Re-establish the mined flags with the symmetry machinery.

    Recomputes, for every stored instance, that the endpoint stable-WL color
    multisets match and that no automorphism maps one pair onto the other.
    """
    by_graph: Dict[int, List[LinkPairInstance]] = {}
    for inst in ds.instances:
        by_graph.setdefault(inst.graph_id, []).append(inst)
    for gid, insts in by_graph.items():
        g = ds.graphs[gid]
        colors = wl_refine(g).colors
        auts = enumerate_automorphisms(g)
        pairs: List[NodePair] = []
        for inst in insts:
            pairs.append(tuple(sorted(inst.pair_a)))
            pairs.append(tuple(sorted(inst.pair_b)))
        codes = pair_orbit_codes(auts, pairs)
        for i, inst in enumerate(insts):
            (u, v), (u2, v2) = pairs[2 * i], pairs[2 * i + 1]
            mult_a = tuple(sorted((colors[u], colors[v])))
            mult_b = tuple(sorted((colors[u2], colors[v2])))
            if mult_a != mult_b:
                raise ValidationError(
                    f"instance {inst} fails WL-match re-verification"
                )
            if codes[2 * i] == codes[2 * i + 1]:
                raise ValidationError(
                    f"instance {inst} fails non-automorphism re-verification"
                )


def instance_permutations(
    ds: Dataset, q: int, instance_index: int
) -> Tuple[List[Tuple[int, ...]], Tuple[int, ...]]:
    """The q copy permutations plus the extra reliability permutation.

    Drawn from one stream per instance (label ``perm:<index>`` under the
    dataset seed), q copies first, then the reliability permutation, so
    external trainers can align embeddings with the published copies.
    """
    if q < 1:
        raise ValidationError("q must be >= 1")
    seed = ds.provenance.get("seed")
    if not isinstance(seed, int):
        raise ValidationError("dataset provenance lacks an integer seed")
    inst = ds.instances[instance_index]
    n = ds.graphs[inst.graph_id].n
    rng = SplitMix64(derive_seed(seed, f"perm:{instance_index}"))
    perms = [rng.permutation(n) for _ in range(q)]
    pi = rng.permutation(n)
    return perms, pi


def write_instance_permutations(ds: Dataset, q: int, path) -> None:
    """JSONL, one record per instance: the q copy permutations and pi."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for idx, inst in enumerate(ds.instances):
            perms, pi = instance_permutations(ds, q, idx)
            rec = {
                "instance_id": idx,
                "graph_id": inst.graph_id,
                "pair_a": list(inst.pair_a),
                "pair_b": list(inst.pair_b),
                "q": q,
                "perms": [list(p) for p in perms],
                "pi": list(pi),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
