import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkexpr.errors import ExactSearchRefused, ValidationError
from linkexpr.graphs import Graph, Permutation, apply_permutation
from linkexpr.rng import SplitMix64
from linkexpr.symmetry import (
    are_links_automorphic,
    enumerate_automorphisms,
    orbits,
    pair_orbit_codes,
    symmetry_exact,
    symmetry_wl,
    wl_colors_at_depth,
    wl_refine,
)

from oracles import (
    asymmetric6,
    brute_force_automorphisms,
    brute_force_orbits,
    brute_force_pair_automorphic,
    complete,
    cycle,
    er_graph,
    path,
    star,
    two_triangles,
)


# ---------------------------------------------------------------------------
# WL refinement

def test_wl_regular_graph_single_class():
    c = wl_refine(cycle(6))
    assert c.class_count == 1
    assert c.iterations == 0
    assert set(c.colors) == {0}


def test_wl_path4_two_classes():
    # hand-run: round 1 separates endpoints (one neighbor) from interior
    # (two neighbors); round 2 changes nothing
    c = wl_refine(path(4))
    assert c.class_count == 2
    assert c.colors[0] == c.colors[3] and c.colors[1] == c.colors[2]
    assert c.colors[0] != c.colors[1]
    assert c.iterations == 1


def test_wl_star_two_classes():
    assert wl_refine(star(3)).class_count == 2


def test_wl_initial_labels_never_merge():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)], labels=(0, 1, 1, 0))
    c = wl_refine(g)
    assert c.colors[0] != c.colors[1]
    g2 = Graph(2, [], labels=(3, 9))
    assert wl_refine(g2).class_count == 2


def test_wl_colors_at_depth_truncation():
    g = path(6)
    assert len(set(wl_colors_at_depth(g, 0))) == 1
    # depth 1 separates degree classes only
    assert len(set(wl_colors_at_depth(g, 1))) == 2
    stable = wl_refine(g)
    assert wl_colors_at_depth(g, 10) == stable.colors
    with pytest.raises(ValidationError):
        wl_colors_at_depth(g, -1)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**62))
def test_wl_permutation_equivariance(key):
    rng = SplitMix64(key)
    g = er_graph(rng.spawn("edges"), rng.randint(2, 10), rng.random())
    p = Permutation(rng.spawn("perm").permutation(g.n))
    a = wl_refine(g)
    b = wl_refine(apply_permutation(g, p))
    assert a.class_count == b.class_count
    # the stable partition must map through p
    for u in range(g.n):
        for v in range(g.n):
            assert (a.colors[u] == a.colors[v]) == (b.colors[p(u)] == b.colors[p(v)])


# ---------------------------------------------------------------------------
# automorphism enumeration

def test_enumerate_small_groups():
    assert enumerate_automorphisms(cycle(3)).order == 6
    assert enumerate_automorphisms(path(3)).order == 2
    assert enumerate_automorphisms(cycle(4)).order == 8


def test_enumerate_respects_labels():
    tri = Graph(3, [(0, 1), (1, 2), (0, 2)], labels=(0, 0, 1))
    assert enumerate_automorphisms(tri).order == 2


def test_enumerate_node_cap_refusal():
    g = path(5)
    with pytest.raises(ExactSearchRefused, match="exceeds cap"):
        enumerate_automorphisms(g, node_cap=4)


def test_enumerate_group_cap_refusal_via_twin_bound():
    empty = Graph(12, [])
    with pytest.raises(ExactSearchRefused, match="count exceeds cap"):
        enumerate_automorphisms(empty)
    with pytest.raises(ExactSearchRefused):
        enumerate_automorphisms(complete(12))


def test_enumerate_group_cap_refusal_during_search():
    # C3 x 4 disjoint triangles: |Aut| = 6^4 * 4! = 31104; twin bound misses it
    edges = []
    for b in range(4):
        o = 3 * b
        edges += [(o, o + 1), (o + 1, o + 2), (o, o + 2)]
    g = Graph(12, edges)
    assert enumerate_automorphisms(g).order == 31104
    with pytest.raises(ExactSearchRefused):
        enumerate_automorphisms(g, group_cap=1000)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**62))
def test_enumeration_matches_brute_force(key):
    rng = SplitMix64(key)
    n = rng.randint(2, 7)
    g = er_graph(rng.spawn("edges"), n, rng.random())
    ours = {tuple(int(x) for x in row) for row in enumerate_automorphisms(g).mappings}
    brute = {tuple(int(x) for x in row) for row in brute_force_automorphisms(g)}
    assert ours == brute


def test_identity_always_present():
    g = asymmetric6()
    auts = enumerate_automorphisms(g)
    assert auts.order == 1
    assert tuple(auts.mappings[0]) == tuple(range(6))


# ---------------------------------------------------------------------------
# orbits

def test_orbit_examples():
    assert orbits(path(3)).orbit_id == (0, 1, 0)
    assert orbits(path(3)).orbit_count == 2
    assert orbits(cycle(5)).orbit_count == 1
    two = two_triangles()
    assert orbits(two).orbit_count == 1
    assert brute_force_orbits(two) == [0] * 6


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**62))
def test_orbits_match_brute_force(key):
    rng = SplitMix64(key)
    g = er_graph(rng.spawn("edges"), rng.randint(2, 7), rng.random())
    assert list(orbits(g).orbit_id) == brute_force_orbits(g)


# ---------------------------------------------------------------------------
# automorphic links

def test_links_automorphic_examples():
    c4 = cycle(4)
    assert are_links_automorphic(c4, (0, 1), (2, 3)) is True
    assert are_links_automorphic(c4, (0, 1), (0, 2)) is False
    assert are_links_automorphic(two_triangles(), (0, 1), (0, 3)) is False
    assert brute_force_pair_automorphic(two_triangles(), (0, 1), (0, 3)) is False


def test_links_automorphic_symmetric_and_reflexive():
    g = two_triangles()
    auts = enumerate_automorphisms(g)
    pairs = [(0, 1), (0, 3), (1, 2), (2, 5)]
    for a in pairs:
        assert are_links_automorphic(g, a, a, auts=auts)
        for b in pairs:
            ab = are_links_automorphic(g, a, b, auts=auts)
            ba = are_links_automorphic(g, b, a, auts=auts)
            assert ab == ba
    with pytest.raises(ValidationError):
        are_links_automorphic(g, (0, 6), (0, 1))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**62))
def test_pair_codes_match_brute_force(key):
    rng = SplitMix64(key)
    g = er_graph(rng.spawn("edges"), rng.randint(3, 6), rng.random())
    auts = enumerate_automorphisms(g)
    pairs = [(u, v) for u in range(g.n) for v in range(u + 1, g.n)]
    codes = pair_orbit_codes(auts, pairs)
    for i, a in enumerate(pairs):
        for j, b in enumerate(pairs):
            assert (codes[i] == codes[j]) == brute_force_pair_automorphic(g, a, b)


# ---------------------------------------------------------------------------
# symmetry measures

def test_symmetry_exact_examples():
    assert symmetry_exact(cycle(5)) == 1.0
    assert symmetry_exact(path(3)) == 0.5
    g = asymmetric6()
    assert brute_force_automorphisms(g).shape[0] == 1
    assert symmetry_exact(g) == 0.0


def test_symmetry_wl_examples():
    assert symmetry_wl(cycle(5)) == 1.0
    assert symmetry_wl(path(3)) == 0.5
    assert symmetry_wl(complete(4)) == 1.0


def test_symmetry_degenerate_sizes():
    single = Graph(1, [])
    assert symmetry_exact(single) == 1.0
    assert symmetry_wl(single) == 1.0
    with pytest.raises(ValidationError):
        symmetry_exact(Graph(0, []))
    with pytest.raises(ValidationError):
        symmetry_wl(Graph(0, []))


def test_symmetry_range_and_vertex_transitivity():
    for g, transitive in [(cycle(7), True), (path(4), False), (star(4), False)]:
        r = symmetry_exact(g)
        assert 0.0 <= r <= 1.0
        assert (r == 1.0) == transitive


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**62))
def test_wl_never_splits_orbits(key):
    rng = SplitMix64(key)
    g = er_graph(rng.spawn("edges"), rng.randint(2, 8), rng.random())
    part = orbits(g)
    colors = wl_refine(g).colors
    for u in range(g.n):
        for v in range(g.n):
            if part.orbit_id[u] == part.orbit_id[v]:
                assert colors[u] == colors[v]
    assert wl_refine(g).class_count <= part.orbit_count
    assert symmetry_wl(g) >= symmetry_exact(g)
