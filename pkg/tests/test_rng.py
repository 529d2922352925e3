from __future__ import annotations

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from proca_lab.rng import MASK, MULTIPLIER, Xorshift64Star

seeds = st.integers(0, 2**64 - 1)


def reference_stream(seed: int, n: int) -> list[int]:
    """Plain restatement of the update rule with Python integers."""
    x = seed or 0x9E3779B97F4A7C15
    out = []
    for _ in range(n):
        x ^= x >> 12
        x = (x ^ (x << 25)) % 2**64
        x ^= x >> 27
        out.append((x * MULTIPLIER) % 2**64)
    return out


@given(seeds)
def test_matches_reference_rule(seed):
    g = Xorshift64Star(seed)
    assert [g.next_u64() for _ in range(5)] == reference_stream(seed, 5)


@given(seeds)
def test_reproducible(seed):
    a, b = Xorshift64Star(seed), Xorshift64Star(seed)
    np.testing.assert_array_equal(a.standard_normal(10), b.standard_normal(10))


@given(seeds)
def test_uniform_range(seed):
    g = Xorshift64Star(seed)
    vals = [g.uniform() for _ in range(50)]
    assert all(0.0 <= v < 1.0 for v in vals)


@given(seeds, st.integers(1, 1000))
def test_integers_range(seed, high):
    g = Xorshift64Star(seed)
    assert all(0 <= g.integers(high) < high for _ in range(20))


@given(seeds)
def test_outputs_fit_in_64_bits(seed):
    g = Xorshift64Star(seed)
    assert all(0 <= g.next_u64() <= MASK for _ in range(10))


def test_zero_seed_is_not_stuck():
    g = Xorshift64Star(0)
    assert len({g.next_u64() for _ in range(10)}) == 10


def test_spawned_streams_differ():
    parent = Xorshift64Star(2024)
    a, b = parent.spawn(1), parent.spawn(2)
    assert a.next_u64() != b.next_u64()
    again = Xorshift64Star(2024).spawn(1)
    assert Xorshift64Star(2024).spawn(1).next_u64() == again.next_u64()


def test_normal_moments():
    x = Xorshift64Star(12345).standard_normal(20000)
    assert abs(x.mean()) < 0.03
    assert abs(x.std() - 1.0) < 0.03
