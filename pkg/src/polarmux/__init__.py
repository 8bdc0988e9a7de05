"""Polar codes over multi-channels, with exact channel-algebra oracles and a
16-QAM BICM Monte Carlo harness."""

from .channels import (
    Dmc,
    ChannelStats,
    make_bec,
    make_bsc,
    bhattacharyya,
    symmetric_capacity,
    channel_stats,
    is_symmetric,
    box_star,
    circle_star,
    dmc_to_text,
    dmc_from_text,
)
from .transform import (
    ARIKAN_KERNEL,
    CompoundSpec,
    kronecker_power,
    bit_reversal_perm,
    polar_encode,
    arikan_matrix,
    validate_g0,
    default_assignment,
    compound_transform,
    compound_encode,
    flat_to_streams,
    streams_to_flat,
    spec_to_text,
    spec_from_text,
)
from .construction import (
    ReliabilityProfile,
    brute_force_bit_channel,
    bec_z_profile,
    mc_genie_estimate,
    select_information_set,
    threshold_good_set,
    union_bound,
    allocate_separated_rates,
    profile_to_csv,
    profile_from_csv,
)
from .decoder import (
    DecodeResult,
    ScDecoder,
    sc_decode,
    sc_decode_general_l,
    genie_decode,
    f_llr,
    g_llr,
)
from .bicm import (
    LLR_CLIP,
    Qam16Mapper,
    LinkConfig,
    modulate,
    demap,
    awgn,
    compound_interleave,
    compound_trial,
    separated_trial,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
