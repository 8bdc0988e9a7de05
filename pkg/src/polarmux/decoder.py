"""Successive cancellation decoding.

The decoder follows the same convention as the encoder (input bit reversal,
natural-order butterfly): input bits are decided in their natural order, and
the recursion pairs bit 2t with bit 2t+1 over the two half-codeword
sub-codes. It is implemented iteratively over scratch planes, one plane per
sub-code size, and is vectorised over a batch axis so Monte Carlo loops pay
numpy-call overhead once per (bit, stage) instead of once per frame.

For an arbitrary base block the first stage has no butterfly structure;
``sc_decode_general_l`` marginalises the up-to-2^l base-block input
combinations exhaustively in probability domain and runs the standard
recursion above it, one lane at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transform import CompoundSpec, lane_input_order, polar_encode, streams_to_flat


def f_llr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Check-node update 2 atanh(tanh(a/2) tanh(b/2)), in a stable form.

    Uses ln((1 + e^(a+b)) / (e^a + e^b)) rewritten as
    sign(a) sign(b) min(|a|, |b|) + log1p(e^-|a+b|) - log1p(e^-|a-b|),
    which is exact for finite inputs and obeys the limit rules at +-inf.
    """
    base = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore"):
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    # NaN here means an inf-inf cancellation: the correction vanishes there
    return base + np.where(np.isnan(corr), 0.0, corr)


def f_llr_minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min-sum approximation of the check-node update."""
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def g_llr(a: np.ndarray, b: np.ndarray, bit: np.ndarray) -> np.ndarray:
    """Variable-node update b + (1 - 2 u) a; conflicting infinities give 0."""
    with np.errstate(invalid="ignore"):
        out = b + (1.0 - 2.0 * bit) * a
    if np.isnan(out).any():
        out = np.where(np.isnan(out), 0.0, out)
    return out


@dataclass
class DecodeResult:
    """Decoder output for one block; ``first_error`` and ``errors`` are only
    populated by the genie-aided mode."""

    u_hat: np.ndarray
    info_bits: np.ndarray
    first_error: int | None = None
    errors: np.ndarray | None = None


def _interleave_bits(even: np.ndarray, odd: np.ndarray) -> np.ndarray:
    out = np.empty((even.shape[0], even.shape[1] * 2), dtype=np.uint8)
    out[:, 0::2] = even
    out[:, 1::2] = odd
    return out


def _sc_core(llrs: np.ndarray, frozen_mask: np.ndarray, true_u, rule: str):
    """Batched SC over one butterfly of depth log2(N).

    Returns (u_hat, x_hat, errors); ``errors`` is the per-position matrix of
    pre-correction mistakes when ``true_u`` is given (genie mode), else None.
    """
    f = f_llr if rule == "exact" else f_llr_minsum
    batch, size = llrs.shape
    depth = size.bit_length() - 1
    if np.isnan(llrs).any():
        raise ValueError("NaN in input LLRs")
    if size == 1:
        dec = np.where(frozen_mask[0], 0, (llrs[:, 0] < 0)).astype(np.uint8)
        errors = None
        if true_u is not None:
            errors = (dec != true_u[:, 0])[:, None]
            dec = true_u[:, 0].astype(np.uint8)
        return dec[:, None], dec[:, None].copy(), errors

    # pair[k] holds the child bit-LLR pairs feeding the level-k sub-codes
    # (even/odd strided views pick the two children); ev[k] the latest
    # even-position decision. Index k means sub-codes of length 2^k.
    pair = [None] * (depth + 1)
    pair[1] = llrs
    ev = [None] * (depth + 1)
    for k in range(1, depth + 1):
        ev[k] = np.zeros((batch, size >> k), dtype=np.uint8)

    u_hat = np.empty((batch, size), dtype=np.uint8)
    x_hat = np.empty((batch, size), dtype=np.uint8)
    errors = np.zeros((batch, size), dtype=bool) if true_u is not None else None

    for i in range(size):
        if i == 0:
            res = f(llrs[:, 0::2], llrs[:, 1::2])
            start = 2
        else:
            tz = (i & -i).bit_length() - 1
            k0 = depth - tz
            src = pair[k0]
            res = g_llr(src[:, 0::2], src[:, 1::2], ev[k0])
            start = k0 + 1
        for k in range(start, depth + 1):
            pair[k] = res
            res = f(res[:, 0::2], res[:, 1::2])
        bit_llr = res[:, 0]

        if frozen_mask[i]:
            dec = np.zeros(batch, dtype=np.uint8)
        else:
            dec = (bit_llr < 0).astype(np.uint8)
        if true_u is not None:
            errors[:, i] = dec != true_u[:, i]
            dec = true_u[:, i].astype(np.uint8)
        u_hat[:, i] = dec

        # push the decision down as partial sums
        vals = dec[:, None]
        k, t = depth, i
        while (t & 1) and k >= 1:
            vals = _interleave_bits(ev[k] ^ vals, vals)
            t >>= 1
            k -= 1
        if k >= 1:
            ev[k][:] = vals
        else:
            x_hat[:] = vals
    return u_hat, x_hat, errors


class ScDecoder:
    """SC decoder bound to one code geometry.

    Requires the base block to collapse into the butterfly (l = 1 or the
    standard kernel at power-of-two l), so the whole decode is a single
    depth-(n + log2 l) recursion. Instances hold no state between calls and
    may be used from one thread at a time each.
    """

    def __init__(self, spec: CompoundSpec, rule: str = "exact"):
        if not spec.uses_standard_kernel:
            raise ValueError(
                "butterfly decoder needs the standard kernel; "
                "use sc_decode_general_l for arbitrary base blocks"
            )
        if rule not in ("exact", "minsum"):
            raise ValueError(f"unknown update rule {rule!r}")
        self.spec = spec
        self.rule = rule
        self.frozen_mask = spec.frozen_mask

    def decode_batch(self, llrs: np.ndarray, true_u=None):
        llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
        if llrs.shape[1] != self.spec.block_length:
            raise ValueError("LLR length does not match block length")
        return _sc_core(llrs, self.frozen_mask, true_u, self.rule)


def _result_from_batch(spec, u_hat, errors) -> DecodeResult:
    u = u_hat[0]
    err = errors[0] if errors is not None else None
    first = None
    if err is not None:
        hits = np.nonzero(err)[0]
        first = int(hits[0]) if hits.size else None
    return DecodeResult(
        u_hat=u,
        info_bits=u[spec.info_set],
        first_error=first,
        errors=err,
    )


def sc_decode(llrs: np.ndarray, spec: CompoundSpec, rule: str = "exact") -> DecodeResult:
    """Decode one block of coded-position-ordered LLRs."""
    u_hat, _, _ = ScDecoder(spec, rule).decode_batch(np.asarray(llrs)[None, :])
    return _result_from_batch(spec, u_hat, None)


def genie_decode(llrs: np.ndarray, spec: CompoundSpec, true_u: np.ndarray,
                 rule: str = "exact") -> DecodeResult:
    """SC with each decision corrected to the true bit afterwards.

    Decisions made before the first mistake coincide with plain SC; the
    result records where the first mistake happened (None if clean).
    """
    true_u = np.asarray(true_u, dtype=np.uint8)[None, :]
    u_hat, _, errors = ScDecoder(spec, rule).decode_batch(
        np.asarray(llrs)[None, :], true_u=true_u
    )
    return _result_from_batch(spec, u_hat, errors)


def _llr_to_prob_pair(llr: np.ndarray):
    """Per-position (P[x=0|y], P[x=1|y]) from an LLR, stable for large |llr|."""
    p0 = np.empty_like(llr)
    pos = llr >= 0
    ez = np.exp(-np.abs(llr))
    p0[pos] = 1.0 / (1.0 + ez[pos])
    p0[~pos] = ez[~pos] / (1.0 + ez[~pos])
    return p0, 1.0 - p0


def sc_decode_general_l_batch(stream_llrs, spec: CompoundSpec, rule: str = "exact",
                              true_u=None):
    """Batched SC for an arbitrary valid base block (l <= 8).

    The base stage computes each lane's block-input likelihood by exhaustive
    marginalisation over the 2^l block input combinations, keeping only those
    consistent with already-decoded lanes; the per-lane codes above it use
    the standard recursions.
    """
    l, n = spec.l, spec.n
    if l > 8:
        raise ValueError("exhaustive base stage supports l <= 8")
    coded = streams_to_flat([np.atleast_2d(np.asarray(s, dtype=np.float64))
                             for s in stream_llrs], spec)
    if np.isnan(coded).any():
        raise ValueError("NaN in input LLRs")
    batch = coded.shape[0]
    copies = 1 << n
    grid = coded.reshape(batch, copies, l)

    combos = ((np.arange(1 << l)[:, None] >> np.arange(l)[None, :]) & 1).astype(np.uint8)
    outputs = (combos @ spec.g0) % 2

    p0, p1 = _llr_to_prob_pair(grid)
    pstack = np.stack([p0, p1], axis=-1)
    lik = np.ones((batch, copies, 1 << l))
    for out in range(l):
        lik = lik * pstack[:, :, out, outputs[:, out]]

    order = lane_input_order(l)
    frozen_lanes = spec.frozen_mask.reshape(l, copies)
    true_lanes = None
    if true_u is not None:
        true_lanes = np.asarray(true_u, dtype=np.uint8).reshape(batch, l, copies)

    valid = np.ones((batch, copies, 1 << l), dtype=bool)
    u_hat = np.empty((batch, l * copies), dtype=np.uint8)
    errors = np.zeros((batch, l * copies), dtype=bool) if true_u is not None else None
    for lane in range(l):
        col = int(order[lane])
        weights = lik * valid
        sel0 = combos[:, col] == 0
        pa = weights[..., sel0].sum(axis=-1)
        pb = weights[..., ~sel0].sum(axis=-1)
        with np.errstate(divide="ignore"):
            lane_llr = np.log(pa) - np.log(pb)
        lane_llr = np.where(np.isnan(lane_llr), 0.0, lane_llr)
        lane_true = true_lanes[:, lane, :] if true_lanes is not None else None
        lane_u, lane_x, lane_err = _sc_core(lane_llr, frozen_lanes[lane], lane_true, rule)
        u_hat[:, lane * copies:(lane + 1) * copies] = lane_u
        if errors is not None:
            errors[:, lane * copies:(lane + 1) * copies] = lane_err
        valid &= combos[:, col][None, None, :] == lane_x[:, :, None]
    return u_hat, errors


def sc_decode_general_l(stream_llrs, spec: CompoundSpec, rule: str = "exact") -> DecodeResult:
    """Decode one block given per-sub-channel LLR streams."""
    u_hat, _ = sc_decode_general_l_batch(stream_llrs, spec, rule)
    return _result_from_batch(spec, u_hat, None)
