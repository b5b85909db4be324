import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkexpr.errors import ParseError, ValidationError
from linkexpr.graphs import (
    UNREACHABLE,
    Graph,
    Permutation,
    apply_permutation,
    bfs_distances,
    dump_graph,
    exact_ring,
    joint_neighborhood,
    load_graph,
)
from linkexpr.rng import SplitMix64

from oracles import cycle, er_graph, minplus_distances, path


# ---------------------------------------------------------------------------
# construction and parsing

def test_construction_normalizes_and_validates():
    g = Graph(3, [(2, 0), (0, 2), (1, 0)])
    assert g.edges == ((0, 1), (0, 2))
    assert g.adj == ((1, 2), (0,), (0,))
    assert g.has_edge(2, 0) and not g.has_edge(1, 2)
    with pytest.raises(ValidationError):
        Graph(3, [(0, 0)])
    with pytest.raises(ValidationError):
        Graph(3, [(0, 3)])
    with pytest.raises(ValidationError):
        Graph(2, [], labels=[1])
    with pytest.raises(ValidationError):
        Graph(-1, [])


def test_load_graph_triangle():
    g = load_graph("n=3\n0 1\n1 2\n0 2\n")
    assert g.n == 3 and g.edge_count == 3


def test_load_graph_no_edges():
    g = load_graph("n=2\n")
    assert g.n == 2 and g.edge_count == 0


def test_load_graph_endpoint_out_of_range_names_line():
    with pytest.raises(ParseError, match="line 2"):
        load_graph("n=3\n0 3\n")


def test_load_graph_collapses_duplicates_and_orientations():
    g = load_graph("n=3\n0 1\n1 0\n0 1\n")
    assert g.edges == ((0, 1),)


def test_load_graph_comments_labels_and_errors():
    g = load_graph("# sample\nn=3\n0 1\nlabels: 5 5 7\n")
    assert g.labels == (5, 5, 7)
    with pytest.raises(ParseError, match="line 1"):
        load_graph("0 1\n")
    with pytest.raises(ParseError, match="line 2"):
        load_graph("n=3\n0 1 2\n")
    with pytest.raises(ParseError, match="line 2"):
        load_graph("n=3\n1 1\n")
    with pytest.raises(ParseError, match="label block has 2"):
        load_graph("n=3\n0 1\nlabels: 1 2\n")
    with pytest.raises(ParseError):
        load_graph("")


def test_dump_load_round_trip():
    g = Graph(4, [(0, 1), (2, 3)], labels=(1, 1, 2, 2))
    assert load_graph(dump_graph(g)) == g


# ---------------------------------------------------------------------------
# traversal

def test_bfs_path():
    assert bfs_distances(path(4), 0).dist == (0, 1, 2, 3)


def test_bfs_disconnected_uses_sentinel():
    g = Graph(4, [(0, 1), (2, 3)])
    assert bfs_distances(g, 0).dist == (0, 1, UNREACHABLE, UNREACHABLE)


def test_bfs_triangle_and_range_check():
    assert bfs_distances(cycle(3), 2).dist == (1, 1, 0)
    with pytest.raises(ValidationError):
        bfs_distances(cycle(3), 3)


def test_exact_ring_examples():
    assert exact_ring(path(4), 0, 2) == {2}
    assert exact_ring(cycle(3), 0, 1) == {1, 2}
    assert exact_ring(cycle(3), 0, 2) == frozenset()
    assert exact_ring(cycle(3), 0, 0) == {0}


def test_joint_neighborhood_examples():
    assert joint_neighborhood(path(4), 1, 2, 1) == {0, 1, 2, 3}
    assert joint_neighborhood(cycle(3), 0, 1, 1, cumulative=True) == {0, 1, 2}
    assert joint_neighborhood(Graph(4, [(0, 1), (2, 3)]), 0, 2, 1) == {1, 3}


def test_apply_permutation_examples():
    g = Graph(3, [(0, 2)])
    assert apply_permutation(g, Permutation((1, 0, 2))).edges == ((1, 2),)
    assert apply_permutation(g, Permutation.identity(3)) == g
    tri = cycle(3)
    assert apply_permutation(tri, Permutation((2, 0, 1))) == tri
    with pytest.raises(ValidationError):
        apply_permutation(g, Permutation((0, 1)))


def test_permutation_validation_and_inverse():
    with pytest.raises(ValidationError):
        Permutation((0, 0, 1))
    p = Permutation((2, 0, 1))
    assert p.inverse().mapping == (1, 2, 0)
    assert p.apply_pair((1, 2)) == (0, 1)


# ---------------------------------------------------------------------------
# properties

graph_keys = st.integers(min_value=0, max_value=2**62)


def _random_graph(key: int, max_n: int = 10) -> Graph:
    rng = SplitMix64(key)
    n = rng.randint(2, max_n)
    return er_graph(rng.spawn("edges"), n, rng.random())


@settings(max_examples=60, deadline=None)
@given(graph_keys)
def test_permutation_round_trip(key):
    g = _random_graph(key)
    p = Permutation(SplitMix64(key ^ 0xABCD).permutation(g.n))
    assert apply_permutation(apply_permutation(g, p), p.inverse()) == g


@settings(max_examples=40, deadline=None)
@given(graph_keys)
def test_rings_match_bfs_and_partition_component(key):
    g = _random_graph(key)
    for v in range(g.n):
        dist = bfs_distances(g, v).dist
        reachable = {w for w in range(g.n) if dist[w] is not UNREACHABLE}
        covered = set()
        for m in range(g.n + 1):
            ring = exact_ring(g, v, m)
            assert ring == {w for w in range(g.n) if dist[w] == m}
            assert ring.isdisjoint(covered)
            covered |= ring
        assert covered == reachable


@settings(max_examples=40, deadline=None)
@given(graph_keys)
def test_bfs_permutation_equivariance(key):
    g = _random_graph(key)
    p = Permutation(SplitMix64(key ^ 0x1234).permutation(g.n))
    pg = apply_permutation(g, p)
    for s in range(g.n):
        base = bfs_distances(g, s).dist
        mapped = bfs_distances(pg, p(s)).dist
        for w in range(g.n):
            assert mapped[p(w)] == base[w]


@settings(max_examples=40, deadline=None)
@given(graph_keys)
def test_bfs_agrees_with_minplus_oracle(key):
    g = _random_graph(key)
    oracle = minplus_distances(g)
    for s in range(g.n):
        dist = bfs_distances(g, s).dist
        for w in range(g.n):
            expected = oracle[s, w]
            if expected == float("inf"):
                assert dist[w] is UNREACHABLE
            else:
                assert dist[w] == int(expected)


@settings(max_examples=40, deadline=None)
@given(graph_keys)
def test_edge_distance_lipschitz(key):
    g = _random_graph(key)
    dist = bfs_distances(g, 0).dist
    for a, b in g.edges:
        if dist[a] is not UNREACHABLE and dist[b] is not UNREACHABLE:
            assert abs(dist[a] - dist[b]) <= 1


def test_unreachable_sentinel_rejects_arithmetic():
    g = Graph(4, [(0, 1), (2, 3)])
    d = bfs_distances(g, 0).dist[2]
    with pytest.raises(TypeError):
        _ = d + 1  # sentinel must never behave like a number
