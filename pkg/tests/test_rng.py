from hypothesis import given
from hypothesis import strategies as st

from actguard.rng import MASK64, RandomStream, derive_run_seed, mix64

seeds = st.integers(min_value=0, max_value=MASK64)


def test_splitmix_reference_sequence():
    # first outputs of SplitMix64 seeded with 0, as published with the algorithm
    rng = RandomStream(0)
    assert [rng.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


@given(seeds, st.integers(min_value=0, max_value=10**6))
def test_run_seed_is_deterministic_and_distinct_per_index(seed, i):
    assert derive_run_seed(seed, i) == derive_run_seed(seed, i)
    assert derive_run_seed(seed, i) != derive_run_seed(seed, i + 1)


def test_run_seeds_are_distinct_over_many_indices():
    assert len({derive_run_seed(42, i) for i in range(100_000)}) == 100_000


def test_negative_run_index_rejected():
    import pytest

    with pytest.raises(ValueError):
        derive_run_seed(1, -1)


@given(seeds)
def test_mix64_stays_in_range(z):
    assert 0 <= mix64(z) <= MASK64


@given(seeds, st.floats(-10, 10), st.floats(0.1, 10))
def test_uniform_stays_in_half_open_interval(seed, lo, width):
    rng = RandomStream(seed)
    for _ in range(20):
        u = rng.uniform(lo, lo + width)
        assert lo <= u <= lo + width


@given(seeds, st.integers(1, 64), st.data())
def test_sample_draws_distinct_values(seed, population, data):
    count = data.draw(st.integers(0, population))
    got = RandomStream(seed).sample(population, count)
    assert len(got) == count == len(set(got))
    assert all(0 <= v < population for v in got)


def test_randbelow_covers_range_roughly_uniformly():
    rng = RandomStream(9)
    counts = [0] * 8
    for _ in range(80_000):
        counts[rng.randbelow(8)] += 1
    assert min(counts) > 9_000 and max(counts) < 11_000
