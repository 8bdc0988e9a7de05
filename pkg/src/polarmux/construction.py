"""Bit-channel reliability estimation and frozen-set design.

Three routes of very different cost and exactness live here:

* ``brute_force_bit_channel`` synthesises a bit-channel as an explicit
  transition table by enumerating every input block. It is the ground truth
  everything else is checked against, and is deliberately capped at tiny
  block lengths.
* ``bec_z_profile`` is the exact O(N log N) erasure recursion, valid because
  erasure channels remain erasure channels under both combining steps.
* ``mc_genie_estimate`` is the Monte Carlo route used for channels with no
  closed form (the BICM sub-channels): count how often a genie-aided decoder
  gets each position wrong when all earlier decisions are corrected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Dmc
from .decoder import ScDecoder
from .transform import CompoundSpec, compound_transform

EXACT_Z = "exact_z"
MC_ERROR_RATE = "mc_error_rate"

# brute-force guard: product of output alphabet sizes times 2^N
BRUTE_FORCE_CAP = 10**7


@dataclass(frozen=True)
class ReliabilityProfile:
    """Per-bit-position quality scores, either exact Bhattacharyya values or
    estimated error rates, tagged with the operating point they were built at."""

    scores: np.ndarray
    kind: str
    construction_point: float = float("nan")

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1 or scores.size == 0:
            raise ValueError("scores must be a non-empty vector")
        if np.any(scores < 0) or np.any(scores > 1):
            raise ValueError("scores must lie in [0, 1]")
        if self.kind not in (EXACT_Z, MC_ERROR_RATE):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "scores", scores)

    def __len__(self):
        return self.scores.size


def brute_force_bit_channel(channels: list[Dmc], spec: CompoundSpec, i: int) -> Dmc:
    """Exact transition table of bit-channel i (0-based).

    ``channels[p]`` is the channel carrying coded position p (the routing is
    already baked in by the caller). Outputs are all (y_1..y_N, u_1..u_i-1)
    tuples; later inputs are marginalised with the uniform prior.
    """
    size = spec.block_length
    if size > 8:
        raise ValueError("brute force is capped at block length 8")
    if len(channels) != size:
        raise ValueError("need one channel per coded position")
    if not 0 <= i < size:
        raise ValueError(f"bit index {i} out of range")
    alphabet = 1
    for ch in channels:
        alphabet *= ch.num_outputs
    if alphabet * (1 << size) > BRUTE_FORCE_CAP:
        raise ValueError("output alphabet too large for brute force")

    inputs = ((np.arange(1 << size)[:, None] >> np.arange(size)[None, :]) & 1)
    inputs = inputs.astype(np.uint8)
    coded = compound_transform(inputs, spec)

    n_prefix = 1 << i
    table = np.zeros((2, n_prefix * alphabet))
    prefix_weight = 1 << np.arange(i)
    scale = 0.5 ** (size - 1)
    for row, x in zip(inputs, coded):
        joint = np.ones(1)
        for p in range(size):
            joint = np.outer(joint, channels[p].probs[x[p]]).ravel()
        prefix = int(row[:i] @ prefix_weight) if i else 0
        table[row[i], prefix * alphabet:(prefix + 1) * alphabet] += scale * joint
    return Dmc(table)


def _erasure_recursion(eps: np.ndarray) -> np.ndarray:
    """Exact per-bit erasure probabilities for one butterfly over per-position
    erasure rates.

    Bottom-up over sub-code sizes: row g of ``state`` holds the profile of
    the sub-code on positions [g * 2^k, (g+1) * 2^k); merging two sibling
    sub-codes interleaves za + zb - za zb (bit decided without help) with
    za zb (decided with the sibling known)."""
    state = eps.reshape(-1, 1)
    while state.shape[0] > 1:
        za, zb = state[0::2], state[1::2]
        merged = np.empty((state.shape[0] // 2, state.shape[1] * 2), dtype=eps.dtype)
        merged[:, 0::2] = za + zb - za * zb
        merged[:, 1::2] = za * zb
        state = merged
    return state[0]


def bec_z_profile(epsilons, spec: CompoundSpec) -> ReliabilityProfile:
    """Exact Bhattacharyya profile when every sub-channel is an erasure
    channel and the base block is the standard kernel.

    ``epsilons`` is either one rate per sub-channel (routed through the
    assignment) or one rate per coded position.
    """
    if not spec.uses_standard_kernel:
        raise ValueError("exact erasure recursion needs the standard kernel")
    eps = np.asarray(epsilons, dtype=np.float64)
    size = spec.block_length
    if eps.ndim == 0:
        per_position = np.full(size, float(eps))
    elif eps.size == spec.l:
        per_position = eps[spec.channel_of(np.arange(size))]
    elif eps.size == size:
        per_position = eps.copy()
    else:
        raise ValueError("epsilons must have length l or block length")
    if np.any(per_position < 0) or np.any(per_position > 1):
        raise ValueError("erasure rates must lie in [0, 1]")
    point = float(per_position[0]) if np.all(per_position == per_position[0]) else float("nan")
    return ReliabilityProfile(_erasure_recursion(per_position), EXACT_Z, point)


def mc_genie_estimate(scheme_trial, trials: int, seed: int,
                      block_length: int | None = None,
                      construction_point: float = float("nan"),
                      batch_size: int = 256) -> ReliabilityProfile:
    """Estimate per-position error rates with a genie-aided sampler.

    ``scheme_trial(n, rng)`` must run n end-to-end transmissions and return
    the (n, N) boolean matrix of positions the decoder got wrong when all
    earlier decisions were corrected. Trials are drawn in fixed-size batches
    whose RNG streams depend only on (seed, first trial index), so a profile
    is reproducible bit-for-bit for a given seed.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    counts = None
    done = 0
    while done < trials:
        n = min(batch_size, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence((seed, done)))
        errs = scheme_trial(n, rng)
        errs = np.asarray(errs)
        if counts is None:
            counts = np.zeros(errs.shape[1], dtype=np.int64)
        counts += errs.sum(axis=0)
        done += n
    if block_length is not None and counts.size != block_length:
        raise ValueError("sampler width does not match block length")
    return ReliabilityProfile(counts / trials, MC_ERROR_RATE, construction_point)


def select_information_set(profile: ReliabilityProfile, k: int) -> np.ndarray:
    """Frozen set left after keeping the k best positions.

    Best means smallest score; equal scores are won by the smaller index so
    the choice is deterministic and depends only on the ranking.
    """
    size = len(profile)
    if not 0 <= k <= size:
        raise ValueError(f"k must be in [0, {size}]")
    order = np.argsort(profile.scores, kind="stable")
    return np.sort(order[k:])


def threshold_good_set(profile: ReliabilityProfile, beta: float) -> np.ndarray:
    """Positions whose exact Bhattacharyya value clears 2^(-N^beta) / N."""
    if profile.kind != EXACT_Z:
        raise ValueError("threshold rule applies to exact profiles only")
    if not 0.0 < beta < 0.5:
        raise ValueError("beta must lie in (0, 1/2)")
    size = len(profile)
    threshold = 2.0 ** (-(size ** beta)) / size
    return np.nonzero(profile.scores < threshold)[0]


def union_bound(profile: ReliabilityProfile, info_set) -> float:
    """Sum of exact Bhattacharyya values over the unfrozen positions; an
    upper bound on the SC block error rate."""
    if profile.kind != EXACT_Z:
        raise ValueError("union bound needs an exact profile")
    info_set = np.asarray(info_set, dtype=np.int64)
    return float(profile.scores[info_set].sum())


def allocate_separated_rates(profile1: ReliabilityProfile,
                             profile2: ReliabilityProfile,
                             total_k: int) -> tuple[int, int]:
    """Split total_k information bits between two codes to minimise the sum
    of the selected positions' scores; ties go to the larger first share."""
    n1, n2 = len(profile1), len(profile2)
    if not 0 <= total_k <= n1 + n2:
        raise ValueError(f"total_k must be in [0, {n1 + n2}]")
    s1 = np.concatenate([[0.0], np.cumsum(np.sort(profile1.scores))])
    s2 = np.concatenate([[0.0], np.cumsum(np.sort(profile2.scores))])
    lo = max(0, total_k - n2)
    hi = min(total_k, n1)
    k1_range = np.arange(lo, hi + 1)
    cost = s1[k1_range] + s2[total_k - k1_range]
    k1 = int(k1_range[np.nonzero(cost <= cost.min())[0][-1]])
    return k1, total_k - k1


# ---------------------------------------------------------------------------
# Erasure-channel Monte Carlo helpers (test instrumentation and the SC
# error-bound experiments).

def bec_llr_words(codewords: np.ndarray, epsilons, spec: CompoundSpec,
                  rng: np.random.Generator) -> np.ndarray:
    """Channel LLRs for coded words sent over per-sub-channel erasure rates:
    +-inf where the bit survives, 0 where it is erased."""
    eps = np.asarray(epsilons, dtype=np.float64)
    if eps.ndim == 0:
        per_position = np.full(spec.block_length, float(eps))
    else:
        per_position = eps[spec.channel_of(np.arange(spec.block_length))]
    erased = rng.random(codewords.shape) < per_position
    llrs = np.where(codewords == 0, np.inf, -np.inf)
    llrs[erased] = 0.0
    return llrs


def bec_frame_errors(spec: CompoundSpec, epsilons, trials: int, seed: int,
                     batch_size: int = 1024) -> int:
    """Frame errors of plain SC with random messages over erasure channels."""
    decoder = ScDecoder(spec)
    info = spec.info_set
    failures = 0
    done = 0
    while done < trials:
        n = min(batch_size, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence((seed, done)))
        u = np.zeros((n, spec.block_length), dtype=np.uint8)
        u[:, info] = rng.integers(0, 2, (n, info.size), dtype=np.uint8)
        x = compound_transform(u, spec)
        llrs = bec_llr_words(x, epsilons, spec, rng)
        u_hat, _, _ = decoder.decode_batch(llrs)
        failures += int(np.any(u_hat != u, axis=1).sum())
        done += n
    return failures


def bec_genie_sampler(spec: CompoundSpec, epsilons):
    """Sampler for ``mc_genie_estimate`` over erasure sub-channels."""
    decoder = ScDecoder(spec)
    info = spec.info_set

    def sample(n: int, rng: np.random.Generator) -> np.ndarray:
        u = np.zeros((n, spec.block_length), dtype=np.uint8)
        u[:, info] = rng.integers(0, 2, (n, info.size), dtype=np.uint8)
        x = compound_transform(u, spec)
        llrs = bec_llr_words(x, epsilons, spec, rng)
        _, _, errors = decoder.decode_batch(llrs, true_u=u)
        return errors

    return sample


def profile_to_csv(profile: ReliabilityProfile) -> str:
    lines = ["index,score,kind,construction_point"]
    point = repr(float(profile.construction_point))
    for i, s in enumerate(profile.scores):
        lines.append(f"{i},{float(s)!r},{profile.kind},{point}")
    return "\n".join(lines) + "\n"


def profile_from_csv(text: str) -> ReliabilityProfile:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "index,score,kind,construction_point":
        raise ValueError("not a reliability profile CSV")
    scores, kind, point = [], None, float("nan")
    for ln in lines[1:]:
        idx, score, kind, point = ln.split(",")
        scores.append(float(score))
    return ReliabilityProfile(np.array(scores), kind, float(point))
