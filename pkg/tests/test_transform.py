import numpy as np
import pytest

from polarmux.transform import (
    ARIKAN_KERNEL,
    CompoundSpec,
    arikan_matrix,
    bit_reversal_perm,
    compound_encode,
    compound_transform,
    default_assignment,
    flat_to_streams,
    kronecker_power,
    polar_encode,
    spec_from_text,
    spec_to_text,
    streams_to_flat,
    validate_g0,
)


def all_words(n_bits):
    return ((np.arange(1 << n_bits)[:, None] >> np.arange(n_bits)[None, :]) & 1).astype(np.uint8)


def test_kronecker_powers():
    assert np.array_equal(kronecker_power(ARIKAN_KERNEL, 0), np.eye(1, dtype=np.uint8))
    assert np.array_equal(kronecker_power(ARIKAN_KERNEL, 1), ARIKAN_KERNEL)
    expected = np.array(
        [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0], [1, 1, 1, 1]], dtype=np.uint8
    )
    assert np.array_equal(kronecker_power(ARIKAN_KERNEL, 2), expected)
    with pytest.raises(ValueError):
        kronecker_power(np.ones((2, 3), dtype=np.uint8), 1)


def test_bit_reversal():
    assert np.array_equal(bit_reversal_perm(2), [0, 1])
    assert np.array_equal(bit_reversal_perm(4), [0, 2, 1, 3])
    assert np.array_equal(bit_reversal_perm(8), [0, 4, 2, 6, 1, 5, 3, 7])
    with pytest.raises(ValueError):
        bit_reversal_perm(6)


def test_encode_small_blocks():
    assert np.array_equal(polar_encode(np.array([1, 0], dtype=np.uint8), 1), [1, 0])
    assert np.array_equal(polar_encode(np.array([1, 1], dtype=np.uint8), 1), [0, 1])
    e1 = np.array([1, 0, 0, 0], dtype=np.uint8)
    assert np.array_equal(polar_encode(e1, 2), arikan_matrix(2)[0])
    with pytest.raises(ValueError):
        polar_encode(np.zeros(6, dtype=np.uint8))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_butterfly_matches_matrix(n):
    mat = arikan_matrix(n)
    words = all_words(1 << n) if n <= 3 else all_words(1 << n)[::7]
    assert np.array_equal(polar_encode(words, n), (words @ mat) % 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_transform_matrix_is_involution(n):
    mat = arikan_matrix(n)
    assert np.array_equal((mat @ mat) % 2, np.eye(1 << n, dtype=np.uint8))


def test_encode_self_inverse_and_linear():
    rng = np.random.default_rng(0)
    for n in range(1, 11):
        u = rng.integers(0, 2, (8, 1 << n), dtype=np.uint8)
        v = rng.integers(0, 2, (8, 1 << n), dtype=np.uint8)
        assert np.array_equal(polar_encode(polar_encode(u, n), n), u)
        assert np.array_equal(
            polar_encode(u ^ v, n), polar_encode(u, n) ^ polar_encode(v, n)
        )


def test_building_block():
    spec = CompoundSpec.make(l=2, n=0)
    streams = compound_encode(np.array([1, 0], dtype=np.uint8), spec)
    assert streams[0].tolist() == [1]  # u1 xor u2
    assert streams[1].tolist() == [0]  # u2
    streams = compound_encode(np.array([1, 1], dtype=np.uint8), spec)
    assert streams[0].tolist() == [0]
    assert streams[1].tolist() == [1]


def test_two_channel_length4_wiring():
    # Hand expansion of the two-block transform: lanes (u1,u2) and (u3,u4)
    # butterfly individually, then each output pair goes through the kernel.
    spec = CompoundSpec.make(l=2, n=1)
    for u in all_words(4):
        x = compound_transform(u, spec)
        expected = np.array(
            [u[0] ^ u[1] ^ u[2] ^ u[3], u[2] ^ u[3], u[1] ^ u[3], u[3]],
            dtype=np.uint8,
        )
        assert np.array_equal(x, expected)
        streams = compound_encode(u, spec)
        assert np.array_equal(streams[0], expected[0::2])
        assert np.array_equal(streams[1], expected[1::2])


def test_zero_maps_to_zero():
    spec = CompoundSpec.make(l=2, n=1)
    streams = compound_encode(np.zeros(4, dtype=np.uint8), spec)
    assert all(not s.any() for s in streams)


def test_single_channel_reduction():
    spec = CompoundSpec.make(l=1, n=5)
    rng = np.random.default_rng(1)
    u = rng.integers(0, 2, (20, 32), dtype=np.uint8)
    assert np.array_equal(compound_transform(u, spec), polar_encode(u, 5))


@pytest.mark.parametrize("l,n", [(2, 1), (2, 3), (4, 1), (4, 2), (8, 1)])
def test_power_of_two_collapses_to_one_butterfly(l, n):
    spec = CompoundSpec.make(l=l, n=n)
    rng = np.random.default_rng(2)
    u = rng.integers(0, 2, (64, spec.block_length), dtype=np.uint8)
    depth = n + (l.bit_length() - 1)
    assert np.array_equal(compound_transform(u, spec), polar_encode(u, depth))


@pytest.mark.parametrize("l,n", [(2, 2), (4, 2), (8, 1)])
def test_generic_route_matches_collapsed_butterfly(l, n):
    from polarmux.transform import _lane_transform

    spec = CompoundSpec.make(l=l, n=n)
    rng = np.random.default_rng(3)
    u = rng.integers(0, 2, (32, spec.block_length), dtype=np.uint8)
    assert np.array_equal(_lane_transform(u, spec), compound_transform(u, spec))


def test_default_assignment_examples():
    a = default_assignment(2, 2)
    assert a.tolist() == [0, 1]
    a = default_assignment(8, 2)
    assert (a[0::2] < 4).all() and (a[1::2] >= 4).all()  # evens ride channel 0
    a = default_assignment(8, 4)
    spec = CompoundSpec.make(l=4, n=1)
    assert spec.channel_of(np.arange(8)).tolist() == [0, 1, 2, 3, 0, 1, 2, 3]
    with pytest.raises(ValueError):
        default_assignment(9, 2)


def test_assignment_is_bijection():
    for size, l in ((16, 2), (16, 4), (24, 3)):
        a = default_assignment(size, l)
        assert np.array_equal(np.sort(a), np.arange(size))


def test_stream_routing_round_trip():
    spec = CompoundSpec.make(l=2, n=3)
    rng = np.random.default_rng(4)
    x = rng.integers(0, 2, (5, 16), dtype=np.uint8)
    streams = flat_to_streams(x, spec)
    assert all(s.shape == (5, 8) for s in streams)
    assert np.array_equal(streams_to_flat(streams, spec), x)


def test_validate_g0():
    assert validate_g0(ARIKAN_KERNEL)
    assert not validate_g0(np.eye(2, dtype=np.uint8))
    assert not validate_g0(np.array([[1, 1], [0, 1]], dtype=np.uint8))
    assert not validate_g0(np.array([[1, 1], [1, 1]], dtype=np.uint8))
    assert validate_g0(np.array([[1]], dtype=np.uint8))
    assert not validate_g0(np.array([[0]], dtype=np.uint8))


def test_spec_validation():
    with pytest.raises(ValueError):
        CompoundSpec.make(l=3, n=1)  # needs an explicit base matrix
    with pytest.raises(ValueError):
        CompoundSpec(
            l=2, g0=np.eye(2, dtype=np.uint8), n=1,
            frozen=np.array([], dtype=np.int64), assignment=default_assignment(4, 2),
        )
    with pytest.raises(ValueError):
        CompoundSpec(
            l=2, g0=ARIKAN_KERNEL, n=1,
            frozen=np.array([9], dtype=np.int64), assignment=default_assignment(4, 2),
        )
    with pytest.raises(ValueError):
        CompoundSpec(
            l=2, g0=ARIKAN_KERNEL, n=1,
            frozen=np.array([], dtype=np.int64),
            assignment=np.zeros(4, dtype=np.int64),
        )


def test_spec_text_round_trip():
    spec = CompoundSpec.make(l=2, n=3, frozen=[0, 1, 2, 5])
    back = spec_from_text(spec_to_text(spec))
    assert back.l == spec.l and back.n == spec.n
    assert np.array_equal(back.g0, spec.g0)
    assert np.array_equal(back.frozen, spec.frozen)
    assert np.array_equal(back.assignment, spec.assignment)
    g0 = np.array([[1, 0, 0], [1, 1, 0], [1, 0, 1]], dtype=np.uint8)
    spec3 = CompoundSpec(l=3, g0=g0, n=1, frozen=np.array([0], dtype=np.int64),
                         assignment=default_assignment(6, 3))
    back3 = spec_from_text(spec_to_text(spec3))
    assert np.array_equal(back3.g0, g0)
    with pytest.raises(ValueError):
        spec_from_text("l 2\nn 1\nbogus 3\n")
