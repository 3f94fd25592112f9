from fractions import Fraction
from math import isqrt

import numpy as np
from hypothesis import given, strategies as st

from ccmis import _kernels as K
from ccmis.rng import (as_tm1, draw1, draw2, stream_key, sub_seed, threshold_inv_sqrt,
                       threshold_prob, threshold_ratio)

u64 = st.integers(0, (1 << 64) - 1)
ids = st.integers(0, 1 << 40)


@given(u64, ids)
def test_compiled_draw_matches_reference(key, x):
    assert int(K.draw1(np.uint64(key), np.int64(x))) == draw1(key, x)


@given(u64, ids, ids)
def test_compiled_pair_draw_matches_reference(key, x, y):
    assert int(K.draw2(np.uint64(key), np.int64(x), np.int64(y))) == draw2(key, x, y)


@given(st.integers(1, 10 ** 12), st.integers(1, 10 ** 12))
def test_ratio_threshold_is_floor_of_scaled_probability(num, den):
    t = threshold_ratio(num, den)
    if num >= den:
        assert t == 1 << 64
    else:
        assert t == (num << 64) // den
        assert Fraction(t, 1 << 64) <= Fraction(num, den) < Fraction(t + 1, 1 << 64)


@given(st.integers(1, 10 ** 12), st.integers(1, 10 ** 6))
def test_inverse_sqrt_threshold_brackets_true_value(num, den):
    t = threshold_inv_sqrt(num, den)
    if num <= den:
        assert t == 1 << 64
    else:
        # t^2 <= 2^128 den / num < (t+1)^2
        assert t * t * num <= den << 128
        assert (t + 1) * (t + 1) * num > (den << 128) - num


def test_threshold_edge_cases():
    assert threshold_ratio(0, 5) == 0
    assert threshold_inv_sqrt(4) == 1 << 63
    assert threshold_prob(threshold_inv_sqrt(16)) == 0.25
    assert int(as_tm1(1 << 64)) == (1 << 64) - 1
    assert int(as_tm1(0)) == 0


def test_acceptance_frequency_matches_probability():
    key = np.uint64(stream_key(3, 1, 0))
    labels = np.arange(200_000, dtype=np.int64)
    hit = K.sample_uniform(key, labels, as_tm1(threshold_ratio(1, 10)))
    assert abs(hit.mean() - 0.1) < 0.005


def test_streams_are_distinct():
    keys = {stream_key(s, t, k) for s in range(4) for t in range(1, 9) for k in range(4)}
    assert len(keys) == 4 * 8 * 4
    assert sub_seed(1, 2) != sub_seed(1, 3)
    assert 0 <= sub_seed(5) < 1 << 63


def test_partition_assignment_is_balanced_and_in_range():
    key = np.uint64(stream_key(0, 3, 0))
    part = K.assign_parts(key, np.arange(100_000, dtype=np.int64), 7)
    assert part.min() == 0 and part.max() == 6
    counts = np.bincount(part)
    assert counts.min() > 0.9 * 100_000 / 7
