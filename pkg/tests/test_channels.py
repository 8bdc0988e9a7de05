import numpy as np
import pytest

from polarmux.channels import (
    Dmc,
    bhattacharyya,
    box_star,
    channel_stats,
    circle_star,
    dmc_from_text,
    dmc_to_text,
    is_symmetric,
    make_bec,
    make_bsc,
    random_symmetric_dmc,
    symmetric_capacity,
)


def h2(p):
    return -p * np.log2(p) - (1 - p) * np.log2(1 - p)


def test_bec_extremes():
    clean = make_bec(0.0)
    assert bhattacharyya(clean) == 0.0
    assert symmetric_capacity(clean) == pytest.approx(1.0, abs=1e-12)
    dead = make_bec(1.0)
    assert bhattacharyya(dead) == 1.0
    assert symmetric_capacity(dead) == pytest.approx(0.0, abs=1e-12)


def test_bec_half():
    w = make_bec(0.5)
    assert bhattacharyya(w) == pytest.approx(0.5, abs=1e-15)
    assert symmetric_capacity(w) == pytest.approx(0.5, abs=1e-15)


def test_bsc_closed_forms():
    assert bhattacharyya(make_bsc(0.0)) == 0.0
    assert symmetric_capacity(make_bsc(0.0)) == pytest.approx(1.0)
    assert bhattacharyya(make_bsc(0.5)) == pytest.approx(1.0)
    assert symmetric_capacity(make_bsc(0.5)) == pytest.approx(0.0, abs=1e-12)
    w = make_bsc(0.1)
    assert bhattacharyya(w) == pytest.approx(2 * np.sqrt(0.09), abs=1e-12)
    assert symmetric_capacity(w) == pytest.approx(1 - h2(0.1), abs=1e-12)


def test_parameter_validation():
    with pytest.raises(ValueError):
        make_bec(-0.1)
    with pytest.raises(ValueError):
        make_bec(1.5)
    with pytest.raises(ValueError):
        make_bsc(0.6)
    with pytest.raises(ValueError):
        Dmc(np.array([[0.5, 0.4], [0.5, 0.5]]))  # row does not sum to 1
    with pytest.raises(ValueError):
        Dmc(np.ones((3, 2)) / 2)  # not binary input


def test_capacity_examples():
    assert symmetric_capacity(make_bec(0.25)) == pytest.approx(0.75, abs=1e-12)
    assert symmetric_capacity(make_bec(0.3)) == pytest.approx(0.7, abs=1e-12)


def test_box_star_erasure_algebra():
    w = box_star(make_bec(0.2), make_bec(0.3))
    assert w.probs.sum(axis=1) == pytest.approx([1.0, 1.0], abs=1e-12)
    assert bhattacharyya(w) == pytest.approx(0.2 + 0.3 - 0.06, abs=1e-12)


def test_box_star_noiseless_pair():
    w = box_star(make_bec(0.0), make_bec(0.0))
    assert symmetric_capacity(w) == pytest.approx(1.0, abs=1e-12)


def test_circle_star_erasure_algebra():
    w = circle_star(make_bec(0.2), make_bec(0.3))
    assert w.num_outputs == 18
    assert bhattacharyya(w) == pytest.approx(0.06, abs=1e-12)


def test_circle_star_noiseless_helper():
    w = circle_star(make_bsc(0.3), make_bec(0.0))
    assert symmetric_capacity(w) == pytest.approx(1.0, abs=1e-12)


def test_circle_star_bhattacharyya_product():
    rng = np.random.default_rng(7)
    for _ in range(25):
        w1 = random_symmetric_dmc(rng)
        w2 = random_symmetric_dmc(rng)
        got = bhattacharyya(circle_star(w1, w2))
        assert got == pytest.approx(bhattacharyya(w1) * bhattacharyya(w2), abs=1e-12)


def test_sum_capacity_conservation():
    rng = np.random.default_rng(11)
    for _ in range(50):
        w1 = random_symmetric_dmc(rng)
        w2 = random_symmetric_dmc(rng)
        lhs = symmetric_capacity(box_star(w1, w2)) + symmetric_capacity(circle_star(w1, w2))
        rhs = symmetric_capacity(w1) + symmetric_capacity(w2)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_combining_preserves_symmetry():
    rng = np.random.default_rng(3)
    for _ in range(10):
        w1 = random_symmetric_dmc(rng)
        w2 = random_symmetric_dmc(rng)
        assert is_symmetric(box_star(w1, w2))
        assert is_symmetric(circle_star(w1, w2))


def test_is_symmetric_cases():
    assert is_symmetric(make_bsc(0.1))
    assert is_symmetric(make_bec(0.4))
    assert not is_symmetric(Dmc(np.array([[0.7, 0.3], [0.6, 0.4]])))


def test_z_capacity_bounds_everywhere():
    rng = np.random.default_rng(5)
    channels = [make_bec(0.3), make_bsc(0.2), box_star(make_bec(0.4), make_bsc(0.1)),
                circle_star(make_bsc(0.05), make_bec(0.6))]
    for _ in range(100):
        m = int(rng.integers(2, 7))
        table = rng.random((2, m)) + 1e-3
        table /= table.sum(axis=1, keepdims=True)
        channels.append(Dmc(table))
    for w in channels:
        z = bhattacharyya(w)
        cap = symmetric_capacity(w)
        assert 1 - cap <= z + 1e-9
        assert z <= np.sqrt(max(1 - cap * cap, 0.0)) + 1e-9


def test_channel_stats_bundle():
    st = channel_stats(make_bec(0.3))
    assert st.z == pytest.approx(0.3)
    assert st.capacity == pytest.approx(0.7)


def test_alphabet_cap():
    table = np.full((2, 70), 1 / 70)
    big = Dmc(table)
    with pytest.raises(ValueError):
        box_star(big, big)  # 4900 outputs
    with pytest.raises(ValueError):
        circle_star(big, big)


def test_text_round_trip():
    w = box_star(make_bec(0.37), make_bsc(0.21))
    back = dmc_from_text(dmc_to_text(w))
    assert np.array_equal(back.probs, w.probs)
    with pytest.raises(ValueError):
        dmc_from_text("2\n0.5 0.5\n")
    with pytest.raises(ValueError):
        dmc_from_text("3\n0.5 0.5\n0.5 0.5\n")
