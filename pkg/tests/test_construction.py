import numpy as np
import pytest

from polarmux.channels import (
    bhattacharyya,
    box_star,
    circle_star,
    make_bec,
    make_bsc,
    symmetric_capacity,
)
from polarmux.construction import (
    ReliabilityProfile,
    allocate_separated_rates,
    bec_genie_sampler,
    bec_z_profile,
    brute_force_bit_channel,
    mc_genie_estimate,
    profile_from_csv,
    profile_to_csv,
    select_information_set,
    threshold_good_set,
    union_bound,
)
from polarmux.transform import CompoundSpec


def test_brute_force_single_channel_pair():
    spec = CompoundSpec.make(l=1, n=1)
    chans = [make_bec(0.5), make_bec(0.5)]
    z0 = bhattacharyya(brute_force_bit_channel(chans, spec, 0))
    z1 = bhattacharyya(brute_force_bit_channel(chans, spec, 1))
    assert z0 == pytest.approx(0.75, abs=1e-12)
    assert z1 == pytest.approx(0.25, abs=1e-12)


def test_brute_force_base_stage_matches_combining_ops():
    spec = CompoundSpec.make(l=2, n=0)
    w1, w2 = make_bec(0.3), make_bsc(0.1)
    first = brute_force_bit_channel([w1, w2], spec, 0)
    second = brute_force_bit_channel([w1, w2], spec, 1)
    for got, want in ((first, box_star(w1, w2)), (second, circle_star(w1, w2))):
        assert bhattacharyya(got) == pytest.approx(bhattacharyya(want), abs=1e-12)
        assert symmetric_capacity(got) == pytest.approx(symmetric_capacity(want), abs=1e-12)


def test_brute_force_equal_channels_reproduce_polarisation_step():
    spec = CompoundSpec.make(l=1, n=1)
    w = make_bsc(0.1)
    minus = brute_force_bit_channel([w, w], spec, 0)
    plus = brute_force_bit_channel([w, w], spec, 1)
    assert bhattacharyya(minus) == pytest.approx(bhattacharyya(box_star(w, w)), abs=1e-12)
    assert bhattacharyya(plus) == pytest.approx(bhattacharyya(circle_star(w, w)), abs=1e-12)


def test_brute_force_guards():
    with pytest.raises(ValueError):
        brute_force_bit_channel([make_bec(0.5)] * 16, CompoundSpec.make(l=1, n=4), 0)
    with pytest.raises(ValueError):
        brute_force_bit_channel([make_bec(0.5)] * 2, CompoundSpec.make(l=1, n=1), 2)


def test_erasure_profile_examples():
    prof = bec_z_profile(0.5, CompoundSpec.make(l=1, n=2))
    assert prof.scores == pytest.approx([0.9375, 0.5625, 0.4375, 0.0625], abs=1e-15)
    prof = bec_z_profile([0.2, 0.3], CompoundSpec.make(l=2, n=0))
    assert prof.scores == pytest.approx([0.44, 0.06], abs=1e-15)
    prof = bec_z_profile(0.0, CompoundSpec.make(l=1, n=3))
    assert not prof.scores.any()


def test_erasure_profile_rejects_general_blocks():
    from polarmux.transform import default_assignment

    g0 = np.array([[1, 0, 0], [1, 1, 0], [1, 0, 1]], dtype=np.uint8)
    spec = CompoundSpec(l=3, g0=g0, n=1, frozen=np.array([], dtype=np.int64),
                        assignment=default_assignment(6, 3))
    with pytest.raises(ValueError):
        bec_z_profile(0.5, spec)


@pytest.mark.parametrize("l,n", [(1, 1), (1, 2), (1, 3), (2, 0), (2, 1), (2, 2)])
def test_erasure_profile_matches_brute_force(l, n):
    spec = CompoundSpec.make(l=l, n=n)
    eps = np.array([0.5]) if l == 1 else np.array([0.35, 0.55])
    chans = [make_bec(eps[spec.channel_of(p)]) for p in range(spec.block_length)]
    prof = bec_z_profile(eps, spec)
    for i in range(spec.block_length):
        z = bhattacharyya(brute_force_bit_channel(chans, spec, i))
        assert abs(z - prof.scores[i]) < 1e-12


def test_genie_estimate_is_reproducible():
    spec = CompoundSpec.make(l=1, n=4)
    sampler = bec_genie_sampler(spec, 0.5)
    a = mc_genie_estimate(sampler, 2000, seed=42)
    b = mc_genie_estimate(sampler, 2000, seed=42)
    assert np.array_equal(a.scores, b.scores)
    c = mc_genie_estimate(sampler, 2000, seed=43)
    assert not np.array_equal(a.scores, c.scores)


def test_genie_estimate_noiseless_channel():
    spec = CompoundSpec.make(l=1, n=3)
    prof = mc_genie_estimate(bec_genie_sampler(spec, 0.0), 500, seed=1)
    assert not prof.scores.any()


def test_genie_ranking_converges_to_exact_order():
    spec = CompoundSpec.make(l=1, n=2)
    exact = bec_z_profile(0.5, spec)
    est = mc_genie_estimate(bec_genie_sampler(spec, 0.5), 100_000, seed=9)
    assert np.array_equal(np.argsort(exact.scores), np.argsort(est.scores))


def test_select_information_set():
    prof = ReliabilityProfile(np.array([0.9375, 0.5625, 0.4375, 0.0625]), "exact_z")
    assert select_information_set(prof, 2).tolist() == [0, 1]
    assert select_information_set(prof, 0).tolist() == [0, 1, 2, 3]
    assert select_information_set(prof, 4).tolist() == []
    with pytest.raises(ValueError):
        select_information_set(prof, 5)


def test_selection_is_rank_invariant():
    rng = np.random.default_rng(2)
    scores = rng.random(32)
    prof = ReliabilityProfile(scores, "exact_z")
    squashed = ReliabilityProfile(scores**3, "exact_z")
    for k in (0, 7, 16, 32):
        assert np.array_equal(
            select_information_set(prof, k), select_information_set(squashed, k)
        )


def test_threshold_good_set():
    prof = bec_z_profile(0.5, CompoundSpec.make(l=1, n=2))
    assert threshold_good_set(prof, 0.45).tolist() == [3]
    allgood = ReliabilityProfile(np.zeros(8), "exact_z")
    assert threshold_good_set(allgood, 0.3).size == 8
    allbad = ReliabilityProfile(np.ones(8), "exact_z")
    assert threshold_good_set(allbad, 0.3).size == 0
    with pytest.raises(ValueError):
        threshold_good_set(prof, 0.5)
    with pytest.raises(ValueError):
        threshold_good_set(prof, 0.0)


def test_union_bound():
    prof = bec_z_profile(0.5, CompoundSpec.make(l=1, n=2))
    assert union_bound(prof, [3]) == pytest.approx(0.0625)
    assert union_bound(prof, []) == 0.0
    assert union_bound(prof, [0, 1, 2, 3]) == pytest.approx(prof.scores.sum())
    mc = ReliabilityProfile(np.zeros(4), "mc_error_rate")
    with pytest.raises(ValueError):
        union_bound(mc, [0])


def test_rate_allocation_symmetry_tie():
    rng = np.random.default_rng(3)
    scores = np.sort(rng.random(16))
    p = ReliabilityProfile(scores, "mc_error_rate")
    for total in (5, 8, 11):
        k1, k2 = allocate_separated_rates(p, p, total)
        assert k1 == -(-total // 2)  # ceil
        assert k1 + k2 == total


def test_rate_allocation_prefers_clean_channel():
    p1 = ReliabilityProfile(np.zeros(8), "mc_error_rate")
    p2 = ReliabilityProfile(np.full(8, 0.5), "mc_error_rate")
    assert allocate_separated_rates(p1, p2, 6) == (6, 0)
    assert allocate_separated_rates(p1, p2, 10) == (8, 2)
    with pytest.raises(ValueError):
        allocate_separated_rates(p1, p2, 17)


def test_profile_csv_round_trip():
    prof = bec_z_profile(0.37, CompoundSpec.make(l=1, n=3))
    back = profile_from_csv(profile_to_csv(prof))
    assert np.array_equal(back.scores, prof.scores)
    assert back.kind == prof.kind
    assert back.construction_point == prof.construction_point
    with pytest.raises(ValueError):
        profile_from_csv("nope\n1,2\n")
