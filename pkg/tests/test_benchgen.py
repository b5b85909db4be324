import json

import pytest

from linkexpr.benchgen import (
    Dataset,
    GenParams,
    LinkPairInstance,
    build_dataset,
    dataset_from_json,
    dataset_to_json,
    mine_test_pairs,
    read_dataset,
    sample_twin_er_graph,
    twin_block_graph,
    verify_instances,
    write_dataset,
    write_instance_permutations,
    instance_permutations,
    _split_sizes,
)
from linkexpr.errors import (
    ExactSearchRefused,
    ParseError,
    PartialDatasetError,
    ValidationError,
)
from linkexpr.graphs import Graph
from linkexpr.rng import SplitMix64, derive_seed
from linkexpr.symmetry import are_links_automorphic, wl_refine

from oracles import complete, cycle, two_triangles


def small_params(**kw):
    defaults = dict(seed=7, target_graph_count=4, n_min=5, n_max=8,
                    max_attempts_per_graph=50)
    defaults.update(kw)
    return GenParams(**defaults)


# ---------------------------------------------------------------------------
# parameters and sampling

def test_params_validation():
    with pytest.raises(ValidationError):
        GenParams(seed=0, target_graph_count=0)
    with pytest.raises(ValidationError):
        GenParams(seed=0, target_graph_count=1, n_min=1, n_max=5)
    with pytest.raises(ValidationError):
        GenParams(seed=0, target_graph_count=1, n_min=9, n_max=5)


def test_twin_block_degenerate_probabilities():
    g = twin_block_graph(5, 0.0, 0.0, SplitMix64(1))
    assert g.n == 10 and g.edge_count == 0
    g = twin_block_graph(3, 1.0, 0.0, SplitMix64(2))
    assert g == two_triangles()
    g = twin_block_graph(5, 0.3, 0.4, SplitMix64(3))
    assert g.n == 10


def test_twin_blocks_are_mirrored():
    g = twin_block_graph(7, 0.5, 0.7, SplitMix64(11))
    block0 = {(u, v) for u, v in g.edges if u < 7 and v < 7}
    block1 = {(u - 7, v - 7) for u, v in g.edges if u >= 7 and v >= 7}
    assert block0 == block1


def test_duplication_symmetry_before_cross_edges():
    # the block-swap map i <-> i+n is an automorphism when p' = 0
    for seed in range(5):
        g = twin_block_graph(6, 0.5, 0.0, SplitMix64(seed))
        swap = list(range(6, 12)) + list(range(6))
        mapped = {tuple(sorted((swap[u], swap[v]))) for u, v in g.edges}
        assert mapped == set(g.edges)


def test_sampled_sizes_in_range():
    params = small_params()
    for k in range(30):
        g = sample_twin_er_graph(SplitMix64(derive_seed(3, f"graph:{k}")), params)
        assert 2 * params.n_min <= g.n <= 2 * params.n_max
        assert g.n % 2 == 0


# ---------------------------------------------------------------------------
# mining

def test_mine_two_triangles_contains_edge_vs_cross_pair():
    insts, truncated = mine_test_pairs(two_triangles(), cap=64)
    combos = {(i.pair_a, i.pair_b) for i in insts}
    assert ((0, 1), (0, 3)) in combos
    assert not truncated
    g = two_triangles()
    colors = wl_refine(g).colors
    for inst in insts:
        (u, v), (u2, v2) = inst.pair_a, inst.pair_b
        assert sorted((colors[u], colors[v])) == sorted((colors[u2], colors[v2]))
        assert not are_links_automorphic(g, inst.pair_a, inst.pair_b)


def test_mine_c4_has_no_qualifying_edge_pairs():
    insts, _ = mine_test_pairs(cycle(4), cap=64)
    g = cycle(4)
    assert all(
        not (g.has_edge(*i.pair_a) and g.has_edge(*i.pair_b)) for i in insts
    )


def test_mine_complete_graph_is_empty():
    assert mine_test_pairs(complete(4)) == ([], False)


def test_mine_lexicographic_truncation():
    full, truncated_full = mine_test_pairs(two_triangles(), cap=1000)
    assert not truncated_full
    head, truncated = mine_test_pairs(two_triangles(), cap=3)
    assert truncated
    assert [(i.pair_a, i.pair_b) for i in head] == [
        (i.pair_a, i.pair_b) for i in full[:3]
    ]
    combos = [(i.pair_a, i.pair_b) for i in full]
    assert combos == sorted(combos)


def test_mine_propagates_refusal():
    with pytest.raises(ExactSearchRefused):
        mine_test_pairs(Graph(12, []))


# ---------------------------------------------------------------------------
# dataset assembly

def test_split_sizes_floor_then_train_first():
    assert _split_sizes(10, (0.8, 0.1, 0.1)) == [8, 1, 1]
    assert _split_sizes(5, (0.8, 0.1, 0.1)) == [5, 0, 0]
    assert _split_sizes(7, (0.4, 0.3, 0.3)) == [3, 2, 2]


def test_build_dataset_single_graph():
    ds = build_dataset(small_params(target_graph_count=1))
    assert len(ds.graphs) == 1
    assert len(ds.instances) >= 1
    assert ds.instances[0].graph_id == 0


def test_build_dataset_deterministic_bytes():
    a = dataset_to_json(build_dataset(small_params()))
    b = dataset_to_json(build_dataset(small_params()))
    assert a == b


def test_build_dataset_threads_do_not_change_output():
    a = dataset_to_json(build_dataset(small_params()))
    b = dataset_to_json(build_dataset(small_params(), threads=4))
    assert a == b


def test_build_dataset_validates_ratios():
    with pytest.raises(ValidationError):
        build_dataset(small_params(), split_ratios=(0.5, 0.5, 0.5))
    with pytest.raises(ValidationError):
        build_dataset(small_params(), split_ratios=(1.0, 0.0, 0.0))


def test_build_dataset_attempts_exhausted():
    params = GenParams(seed=999, target_graph_count=50, n_min=5, n_max=8,
                       max_attempts_per_graph=1)
    with pytest.raises(PartialDatasetError) as exc:
        build_dataset(params)
    assert 0 <= exc.value.achieved < 50


def test_splits_partition_graph_ids():
    ds = build_dataset(small_params(target_graph_count=10))
    ids = sorted(i for split in ds.splits.values() for i in split)
    assert ids == list(range(10))
    assert [len(ds.splits[k]) for k in ("train", "validation", "test")] == [8, 1, 1]


# ---------------------------------------------------------------------------
# serialization

def test_round_trip_write_read(tmp_path):
    ds = build_dataset(small_params())
    path = tmp_path / "ds.json"
    write_dataset(ds, path)
    loaded = read_dataset(path)
    assert dataset_to_json(loaded) == dataset_to_json(ds)
    verify_instances(loaded)


def test_read_rejects_missing_graph_reference():
    ds = build_dataset(small_params(target_graph_count=1))
    doc = json.loads(dataset_to_json(ds))
    doc["instances"][0]["graph_id"] = 99
    with pytest.raises(ValidationError, match="missing graph_id"):
        dataset_from_json(json.dumps(doc))


def test_read_rejects_empty_and_garbage():
    with pytest.raises(ParseError):
        dataset_from_json("")
    with pytest.raises(ParseError):
        dataset_from_json("{not json")
    with pytest.raises(ValidationError, match="version"):
        dataset_from_json('{"version": "other", "graphs": []}')


def test_read_rejects_broken_splits():
    ds = build_dataset(small_params(target_graph_count=2))
    doc = json.loads(dataset_to_json(ds))
    doc["splits"]["train"] = [0, 0, 1]
    with pytest.raises(ValidationError, match="partition"):
        dataset_from_json(json.dumps(doc))


def test_read_rejects_graph_without_instances():
    ds = build_dataset(small_params(target_graph_count=2))
    doc = json.loads(dataset_to_json(ds))
    doc["instances"] = [r for r in doc["instances"] if r["graph_id"] != 1]
    with pytest.raises(ValidationError, match="without instances"):
        dataset_from_json(json.dumps(doc))


def test_verify_instances_catches_tampering():
    ds = build_dataset(small_params(target_graph_count=1))
    # swap in an automorphic pair: (pair_a, pair_a) is automorphic to itself
    bad = Dataset(
        graphs=ds.graphs,
        instances=[
            LinkPairInstance(
                graph_id=0,
                pair_a=ds.instances[0].pair_a,
                pair_b=ds.instances[0].pair_a,
            )
        ],
        splits=ds.splits,
        provenance=ds.provenance,
        truncated=ds.truncated,
    )
    with pytest.raises(ValidationError):
        verify_instances(bad)


# ---------------------------------------------------------------------------
# permutation emission

def test_instance_permutations_deterministic_and_valid(tmp_path):
    ds = build_dataset(small_params(target_graph_count=2))
    perms1, pi1 = instance_permutations(ds, 5, 0)
    perms2, pi2 = instance_permutations(ds, 5, 0)
    assert perms1 == perms2 and pi1 == pi2
    n = ds.graphs[ds.instances[0].graph_id].n
    for p in perms1 + [pi1]:
        assert sorted(p) == list(range(n))
    out = tmp_path / "perms.jsonl"
    write_instance_permutations(ds, 3, out)
    lines = out.read_text().splitlines()
    assert len(lines) == len(ds.instances)
    rec = json.loads(lines[0])
    assert rec["q"] == 3 and len(rec["perms"]) == 3
