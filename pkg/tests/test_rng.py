import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from multitrace.rng import RngStream, raw_block, uniform_block


def test_same_key_same_sequence():
    a = RngStream(99, 5).uniforms(10)
    b = RngStream(99, 5).uniforms(10)
    assert np.array_equal(a, b)


def test_distinct_shots_and_streams_differ():
    base = RngStream(1, 0).uniforms(4)
    assert not np.array_equal(base, RngStream(1, 1).uniforms(4))
    assert not np.array_equal(base, RngStream(1, 0, stream=1).uniforms(4))
    assert not np.array_equal(base, RngStream(2, 0).uniforms(4))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), shot=st.integers(0, 2**63), stream=st.integers(0, 7),
       n=st.integers(1, 11))
def test_block_matches_generator(seed, shot, stream, n):
    ref = RngStream(seed, shot, stream).uniforms(n)
    got = uniform_block(seed, [shot], n, stream)[0]
    assert np.array_equal(ref, got)


def test_block_is_order_independent():
    shots = np.array([7, 3, 11, 0], dtype=np.uint64)
    whole = uniform_block(5, shots, 6)
    parts = np.vstack([uniform_block(5, shots[i:i + 1], 6) for i in range(4)])
    assert np.array_equal(whole, parts)
    assert np.array_equal(uniform_block(5, shots[::-1], 6), whole[::-1])


def test_raw_words_match_bit_generator():
    ref = np.random.Philox(key=[17, 0], counter=[0, 4, 0, 0]).random_raw(6)
    assert np.array_equal(raw_block(17, [4], 6)[0], ref)


def test_uniform_range():
    u = uniform_block(0, np.arange(2000), 8)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.01


def test_draw_counter():
    r = RngStream(0)
    r.uniform()
    r.uniforms(3)
    assert r.draws == 4
