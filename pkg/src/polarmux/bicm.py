"""16-QAM BICM physical layer and the two end-to-end coding schemes.

The square Gray constellation carries label bits (b1, b3) on the in-phase
axis and (b2, b4) on quadrature, so b1 and b2 are the two axis sign bits.
Sign bits see a cleaner binary channel than the inner/outer bits, which is
the whole point of the experiment: positions 1 and 2 of every symbol form
the strong sub-channel, positions 3 and 4 the weak one.

The unified scheme codes across both sub-channels with one code whose coded
positions alternate strong/weak; a per-symbol swap of the middle two bits
lines those up with the constellation. The separated baseline runs one
independent code per sub-channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoder import ScDecoder
from .transform import CompoundSpec, compound_transform, polar_encode

LLR_CLIP = 40.0

def _pam_gray(msb: np.ndarray, lsb: np.ndarray) -> np.ndarray:
    """Gray PAM-4: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3. The msb is the
    sign bit, the lsb picks outer versus inner level."""
    sign = 2.0 * msb - 1.0
    magnitude = np.where(lsb == 1, 1.0, 3.0)
    return sign * magnitude


@dataclass(frozen=True)
class Qam16Mapper:
    """Unit-energy Gray 16-QAM along with its bit-position metadata."""

    points: np.ndarray
    labels: np.ndarray
    strong_positions: tuple = (0, 1)
    weak_positions: tuple = (2, 3)

    @classmethod
    def build(cls) -> "Qam16Mapper":
        labels = ((np.arange(16)[:, None] >> np.arange(3, -1, -1)[None, :]) & 1)
        labels = labels.astype(np.uint8)
        i_axis = _pam_gray(labels[:, 0], labels[:, 2])
        q_axis = _pam_gray(labels[:, 1], labels[:, 3])
        points = (i_axis + 1j * q_axis) / np.sqrt(10.0)
        return cls(points=points, labels=labels)


def modulate(coded: np.ndarray, mapper: Qam16Mapper) -> np.ndarray:
    """Map groups of 4 consecutive bits onto constellation points."""
    coded = np.asarray(coded, dtype=np.uint8)
    if coded.shape[-1] % 4:
        raise ValueError("coded length must be divisible by 4")
    quads = coded.reshape(coded.shape[:-1] + (-1, 4))
    idx = (quads[..., 0] << 3) | (quads[..., 1] << 2) | (quads[..., 2] << 1) | quads[..., 3]
    return mapper.points[idx]


def awgn(symbols: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular Gaussian noise with the given per-dimension deviation."""
    if sigma < 0:
        raise ValueError("noise deviation must be nonnegative")
    if sigma == 0:
        return symbols.copy()
    noise = rng.standard_normal(symbols.shape) + 1j * rng.standard_normal(symbols.shape)
    return symbols + sigma * noise


def demap(received: np.ndarray, mapper: Qam16Mapper, sigma: float) -> np.ndarray:
    """Exact per-bit LLRs, shaped like the input plus a trailing axis of 4.

    Each LLR is the log ratio of the two 8-point Gaussian mixtures, computed
    with max compensation so it stays finite for any finite input, then
    clipped to +-LLR_CLIP. A zero noise deviation degenerates to hard
    decisions at the clip value.
    """
    y = np.asarray(received)
    if sigma == 0:
        nearest = np.argmin(np.abs(y[..., None] - mapper.points), axis=-1)
        hard = mapper.labels[nearest]
        return np.where(hard == 0, LLR_CLIP, -LLR_CLIP)
    metric = -np.abs(y[..., None] - mapper.points) ** 2 / (2.0 * sigma * sigma)
    llrs = np.empty(y.shape + (4,))
    for bit in range(4):
        zero_side = mapper.labels[:, bit] == 0
        llrs[..., bit] = _logsumexp(metric[..., zero_side]) - _logsumexp(metric[..., ~zero_side])
    return np.clip(llrs, -LLR_CLIP, LLR_CLIP)


def _logsumexp(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=-1)
    return m + np.log(np.exp(x - m[..., None]).sum(axis=-1))


def compound_interleave(serial: np.ndarray) -> np.ndarray:
    """Swap the middle two entries of every 4-long group; its own inverse.

    Works on bits before the mapper and on LLRs after the demapper alike.
    """
    if serial.shape[-1] % 4:
        raise ValueError("length must be divisible by 4")
    quads = serial.reshape(serial.shape[:-1] + (-1, 4)).copy()
    quads[..., [1, 2]] = quads[..., [2, 1]]
    return quads.reshape(serial.shape)


@dataclass(frozen=True)
class LinkConfig:
    """Operating point of the link; noise is derived from Eb/N0 counting
    information bits, with unit symbol energy."""

    ebn0_db: float
    code_rate: float
    bits_per_symbol: int = 4

    def __post_init__(self):
        if not 0.0 < self.code_rate <= 1.0:
            raise ValueError("code rate must be in (0, 1]")

    @property
    def noise_sigma(self) -> float:
        ebn0 = 10.0 ** (self.ebn0_db / 10.0)
        return float(np.sqrt(1.0 / (2.0 * self.code_rate * self.bits_per_symbol * ebn0)))


# ---------------------------------------------------------------------------
# End-to-end schemes, batched over frames.


def _random_messages(spec: CompoundSpec, n: int, rng) -> np.ndarray:
    u = np.zeros((n, spec.block_length), dtype=np.uint8)
    info = spec.info_set
    u[:, info] = rng.integers(0, 2, (n, info.size), dtype=np.uint8)
    return u


def compound_frames(spec: CompoundSpec, link: LinkConfig, mapper: Qam16Mapper,
                    n: int, rng, genie: bool = False, decoder: ScDecoder | None = None):
    """Run n frames of the unified scheme; returns (u, u_hat, genie_errors).

    Chain: encode, swap middle bits per symbol, modulate, AWGN, exact demap,
    swap back, decode. Coded position order already alternates the strong and
    weak sub-channels, so after the swap positions 1,2 of each symbol carry
    the strong stream and 3,4 the weak one.
    """
    if spec.block_length % 4:
        raise ValueError("block length must be divisible by 4")
    decoder = decoder or ScDecoder(spec)
    u = _random_messages(spec, n, rng)
    x = compound_transform(u, spec)
    tx_bits = compound_interleave(x)
    symbols = modulate(tx_bits, mapper)
    received = awgn(symbols, link.noise_sigma, rng)
    llr_serial = demap(received, mapper, link.noise_sigma).reshape(n, -1)
    llr_coded = compound_interleave(llr_serial)
    u_hat, _, errors = decoder.decode_batch(llr_coded, true_u=u if genie else None)
    return u, u_hat, errors


def separated_frames(spec1: CompoundSpec, spec2: CompoundSpec, link: LinkConfig,
                     mapper: Qam16Mapper, n: int, rng, genie: bool = False,
                     decoders=None):
    """Run n frames of the separated baseline; one code per sub-channel.

    The strong code's bits occupy symbol positions 1,2 in order and the weak
    code's bits positions 3,4; no swap is needed. Returns per-code tuples
    ((u1, u_hat1, err1), (u2, u_hat2, err2)).
    """
    half = spec1.block_length
    if spec2.block_length != half or half % 2:
        raise ValueError("the two codes must have equal even lengths")
    if decoders is None:
        decoders = (ScDecoder(spec1), ScDecoder(spec2))
    u1 = _random_messages(spec1, n, rng)
    u2 = _random_messages(spec2, n, rng)
    x1 = compound_transform(u1, spec1).reshape(n, -1, 2)
    x2 = compound_transform(u2, spec2).reshape(n, -1, 2)
    tx_bits = np.concatenate([x1, x2], axis=-1).reshape(n, -1)
    symbols = modulate(tx_bits, mapper)
    received = awgn(symbols, link.noise_sigma, rng)
    llrs = demap(received, mapper, link.noise_sigma)
    llr1 = llrs[..., :2].reshape(n, -1)
    llr2 = llrs[..., 2:].reshape(n, -1)
    out1 = decoders[0].decode_batch(llr1, true_u=u1 if genie else None)
    out2 = decoders[1].decode_batch(llr2, true_u=u2 if genie else None)
    return (u1, out1[0], out1[2]), (u2, out2[0], out2[2])


def compound_trial(spec: CompoundSpec, link: LinkConfig, rng,
                   mapper: Qam16Mapper | None = None) -> bool:
    """One frame of the unified scheme; True iff the message was lost."""
    mapper = mapper or Qam16Mapper.build()
    u, u_hat, _ = compound_frames(spec, link, mapper, 1, rng)
    return bool(np.any(u != u_hat))


def separated_trial(spec1: CompoundSpec, spec2: CompoundSpec, link: LinkConfig,
                    rng, mapper: Qam16Mapper | None = None) -> bool:
    """One frame of the separated baseline; True iff either code failed."""
    mapper = mapper or Qam16Mapper.build()
    (u1, h1, _), (u2, h2, _) = separated_frames(spec1, spec2, link, mapper, 1, rng)
    return bool(np.any(u1 != h1) or np.any(u2 != h2))


def compound_genie_sampler(spec: CompoundSpec, link: LinkConfig,
                           mapper: Qam16Mapper | None = None):
    """Sampler for ``mc_genie_estimate`` over the unified scheme."""
    mapper = mapper or Qam16Mapper.build()
    decoder = ScDecoder(spec)

    def sample(n: int, rng) -> np.ndarray:
        _, _, errors = compound_frames(spec, link, mapper, n, rng, genie=True,
                                       decoder=decoder)
        return errors

    return sample


def separated_genie_sampler(spec1: CompoundSpec, spec2: CompoundSpec,
                            link: LinkConfig, mapper: Qam16Mapper | None = None):
    """Sampler over the separated baseline; the two codes' error matrices are
    concatenated (strong code first) so both profiles come from one run."""
    mapper = mapper or Qam16Mapper.build()
    decoders = (ScDecoder(spec1), ScDecoder(spec2))

    def sample(n: int, rng) -> np.ndarray:
        (_, _, e1), (_, _, e2) = separated_frames(
            spec1, spec2, link, mapper, n, rng, genie=True, decoders=decoders
        )
        return np.concatenate([e1, e2], axis=1)

    return sample
