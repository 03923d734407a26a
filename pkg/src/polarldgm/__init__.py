"""Polar-based LDGM codes with column-weight constraints.

Construction of capacity-achieving codes from polarizing kernels, the
column-splitting algorithm with exact rate-loss analysis, successive
cancellation decoding over BEC/BSC, exact small-code oracles, and the
crowdsourced XOR-query scheme built on top.
"""

from .channels import BEC, BSC, ChannelModel, binary_entropy, parse_channel, transmit
from .construction import (
    CodeSpec,
    SparseGenerator,
    SplitReport,
    bec_bit_channels,
    bec_reliabilities,
    bsc_reliability_estimates,
    build_generator,
    log_blocklength,
    make_code_spec,
    select_info_set,
    split,
)
from .errors import RefusalError
from .gf2 import BitMatrix, BitVec, coset_min_weight, kron, rank
from .kernels import (
    Kernel,
    catalog,
    kernel_by_name,
    partial_distances,
    g2_block_kernel,
    rate_of_polarization,
    search_min_sparsity,
    sparsity_ratio,
    min_side_for_order,
    ones_column_kernel,
    validate_kernel,
)
from .simulate import (
    DecodeResult,
    block_decode,
    exact_pe_ml,
    exact_pe_sc,
    mc_bler,
    sc_decode,
    split_combine_decode,
    union_bound_log2,
)
from .weightstats import (
    RateLossAnalysis,
    WeightDistribution,
    a_terms,
    classify_regime,
    epsilon_star,
    exact_R,
    fraction_below,
    lambda_exponent,
    sparsity_orders,
    w_max,
    w_mc,
    weight_distribution,
)

__version__ = "0.1.0"
