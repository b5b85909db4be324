import pytest

from linkexpr.rng import SplitMix64, derive_seed, fnv1a64, mix64


def test_matches_published_reference_stream():
    # first outputs of splitmix64 seeded with 0, per the reference listing
    r = SplitMix64(0)
    assert [r.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_streams_are_reproducible():
    a = SplitMix64(123456789)
    b = SplitMix64(123456789)
    assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]


def test_random_unit_interval():
    r = SplitMix64(42)
    xs = [r.random() for _ in range(2000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    assert 0.4 < sum(xs) / len(xs) < 0.6


def test_randint_bounds_and_coverage():
    r = SplitMix64(7)
    seen = {r.randint(3, 6) for _ in range(500)}
    assert seen == {3, 4, 5, 6}
    assert r.randint(5, 5) == 5
    with pytest.raises(ValueError):
        r.randint(4, 3)


def test_shuffle_and_permutation_are_bijections():
    r = SplitMix64(9)
    perm = r.permutation(40)
    assert sorted(perm) == list(range(40))
    items = list(range(10))
    r.shuffle(items)
    assert sorted(items) == list(range(10))


def test_spawn_ignores_parent_consumption():
    fresh = SplitMix64(5).spawn("stage").next_u64()
    used = SplitMix64(5)
    for _ in range(17):
        used.next_u64()
    assert used.spawn("stage").next_u64() == fresh


def test_derive_seed_separates_labels():
    seeds = {derive_seed(1, f"graph:{k}") for k in range(100)}
    assert len(seeds) == 100
    assert derive_seed(1, "a") != derive_seed(2, "a")


def test_fnv_and_mix_are_stable():
    # frozen so the documented sub-seed rule cannot drift silently
    assert fnv1a64("") == 0xCBF29CE484222325
    assert fnv1a64("graph:0") == fnv1a64("graph:0")
    assert mix64(0) == 0
    assert derive_seed(7, "split") == mix64(7 ^ fnv1a64("split"))
