"""Self-contained correctness checks runnable from the command line.

Each check returns (name, passed, detail). The fast level covers the exact
algebraic identities and small-block oracle equivalences in seconds; the
full level adds the N = 1024 16-QAM operating point, which takes minutes.
"""

from __future__ import annotations

import numpy as np

from . import channels as ch
from . import transform as tr
from .bicm import LinkConfig, Qam16Mapper, compound_frames, compound_genie_sampler
from .construction import (
    bec_frame_errors,
    bec_z_profile,
    brute_force_bit_channel,
    mc_genie_estimate,
    select_information_set,
    union_bound,
)
from .decoder import ScDecoder

VERIFY_SEED = 20240901


def _check_sum_capacity(rng):
    worst = 0.0
    for _ in range(50):
        w1 = ch.random_symmetric_dmc(rng)
        w2 = ch.random_symmetric_dmc(rng)
        lhs = ch.symmetric_capacity(ch.box_star(w1, w2)) + ch.symmetric_capacity(
            ch.circle_star(w1, w2)
        )
        rhs = ch.symmetric_capacity(w1) + ch.symmetric_capacity(w2)
        worst = max(worst, abs(lhs - rhs))
    return "capacity conservation under combining", worst < 1e-10, f"max dev {worst:.2e}"


def _check_z_product(rng):
    worst = 0.0
    for _ in range(50):
        w1 = ch.random_symmetric_dmc(rng)
        w2 = ch.random_symmetric_dmc(rng)
        got = ch.bhattacharyya(ch.circle_star(w1, w2))
        want = ch.bhattacharyya(w1) * ch.bhattacharyya(w2)
        worst = max(worst, abs(got - want))
    return "helped-channel Bhattacharyya product", worst < 1e-12, f"max dev {worst:.2e}"


def _check_z_capacity_bounds(rng):
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 7))
        table = rng.random((2, m)) + 1e-3
        table /= table.sum(axis=1, keepdims=True)
        w = ch.Dmc(table)
        z = ch.bhattacharyya(w)
        cap = ch.symmetric_capacity(w)
        worst = max(worst, (1.0 - cap) - z, z - np.sqrt(max(1.0 - cap * cap, 0.0)))
    return "Bhattacharyya vs capacity bounds", worst < 1e-9, f"max violation {worst:.2e}"


def _check_decomposition():
    w1 = ch.make_bec(0.35)
    w2 = ch.make_bsc(0.08)
    dot = ch.box_star(w1, w2)
    ddot = ch.circle_star(w1, w2)
    worst = 0.0
    for n in (1, 2):
        spec = tr.CompoundSpec.make(l=2, n=n)
        size = spec.block_length
        per_pos = [w1 if p % 2 == 0 else w2 for p in range(size)]
        half_spec = tr.CompoundSpec.make(l=1, n=n)
        for i in range(size):
            combined = brute_force_bit_channel(per_pos, spec, i)
            base = dot if i < size // 2 else ddot
            single = brute_force_bit_channel([base] * (size // 2), half_spec, i % (size // 2))
            worst = max(
                worst,
                abs(ch.bhattacharyya(combined) - ch.bhattacharyya(single)),
                abs(ch.symmetric_capacity(combined) - ch.symmetric_capacity(single)),
            )
    return "two-channel bit-channel decomposition", worst < 1e-10, f"max dev {worst:.2e}"


def _check_capacity_totals():
    w1 = ch.make_bec(0.4)
    w2 = ch.make_bsc(0.1)
    worst = 0.0
    for l, n in ((1, 2), (1, 3), (2, 1), (2, 2)):
        spec = tr.CompoundSpec.make(l=l, n=n)
        size = spec.block_length
        per_pos = [w1 if spec.channel_of(p) == 0 else w2 for p in range(size)]
        total = sum(
            ch.symmetric_capacity(brute_force_bit_channel(per_pos, spec, i))
            for i in range(size)
        )
        want = size * ch.symmetric_capacity(w1) if l == 1 else (size / 2) * (
            ch.symmetric_capacity(w1) + ch.symmetric_capacity(w2)
        )
        worst = max(worst, abs(total - want))
    return "mutual information conservation", worst < 1e-10, f"max dev {worst:.2e}"


def _check_erasure_recursion():
    worst = 0.0
    for l, n in ((1, 1), (1, 2), (1, 3), (2, 0), (2, 1), (2, 2)):
        spec = tr.CompoundSpec.make(l=l, n=n)
        size = spec.block_length
        eps = [0.5] if l == 1 else [0.35, 0.55]
        per_pos = [ch.make_bec(eps[spec.channel_of(p)]) for p in range(size)]
        prof = bec_z_profile(np.array(eps), spec)
        for i in range(size):
            z = ch.bhattacharyya(brute_force_bit_channel(per_pos, spec, i))
            worst = max(worst, abs(z - prof.scores[i]))
    return "erasure recursion vs brute force", worst < 1e-12, f"max dev {worst:.2e}"


def _check_encoder(rng):
    ok = True
    for n in (2, 3, 4):
        size = 1 << n
        mat = tr.arikan_matrix(n)
        u = rng.integers(0, 2, (64, size), dtype=np.uint8)
        ok &= np.array_equal(tr.polar_encode(u, n), (u @ mat) % 2)
        ok &= np.array_equal((mat @ mat) % 2, np.eye(size, dtype=np.uint8))
    for n in (6, 10):
        u = rng.integers(0, 2, (16, 1 << n), dtype=np.uint8)
        ok &= np.array_equal(tr.polar_encode(tr.polar_encode(u, n), n), u)
    return "butterfly matches matrix and is self-inverse", ok, ""


def _check_sc_bound(trials=30_000, n=6, keep=22):
    spec = tr.CompoundSpec.make(l=1, n=n)
    prof = bec_z_profile(0.5, spec)
    spec = spec.with_frozen(select_information_set(prof, keep))
    bound = union_bound(prof, spec.info_set)
    failures = bec_frame_errors(spec, 0.5, trials, seed=VERIFY_SEED)
    fer = failures / trials
    slack = 3.0 * np.sqrt(max(fer * (1 - fer), 1e-12) / trials)
    ok = fer <= bound + slack
    return (
        "SC error rate within union bound",
        bool(ok),
        f"fer {fer:.4f} vs bound {bound:.4f} (+3se {bound + slack:.4f})",
    )


def _check_paper_point():
    mapper = Qam16Mapper.build()
    link = LinkConfig(5.0, 0.5)
    open_spec = tr.CompoundSpec.make(l=2, n=9)
    profile = mc_genie_estimate(
        compound_genie_sampler(open_spec, link, mapper),
        trials=200_000,
        seed=VERIFY_SEED,
        construction_point=5.0,
    )
    code = open_spec.with_frozen(select_information_set(profile, 512))
    decoder = ScDecoder(code)
    trials, errors, done = 100_000, 0, 0
    while done < trials:
        n = min(256, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence((VERIFY_SEED, done)))
        u, u_hat, _ = compound_frames(code, link, mapper, n, rng, decoder=decoder)
        errors += int(np.any(u != u_hat, axis=1).sum())
        done += n
    bler = errors / trials
    ok = 0.0032 / 3 <= bler <= 0.0032 * 3
    return "16-QAM N=1024 operating point", bool(ok), f"bler {bler:.5f} vs 0.0032 (x3)"


def run_checks(level: str = "fast"):
    """Run the suite; returns a list of (name, passed, detail)."""
    rng = np.random.default_rng(VERIFY_SEED)
    results = [
        _check_sum_capacity(rng),
        _check_z_product(rng),
        _check_z_capacity_bounds(rng),
        _check_decomposition(),
        _check_capacity_totals(),
        _check_erasure_recursion(),
        _check_encoder(rng),
        _check_sc_bound(),
    ]
    if level == "full":
        results.append(_check_paper_point())
    return results
