"""Limited-feedback multi-user MIMO downlink simulation toolkit.

Mobiles with N receive antennas combine them into an effective single-antenna
channel, feed back a quantized direction (B bits against a random codebook,
explicit or statistically emulated), and the transmitter zero-forces on the
reported directions. The package provides the combining strategies, the
closed-form laws and bounds they obey, a deterministic Monte Carlo engine,
and a CLI for rate curves, distribution checks, and feedback-scaling tables.
"""

from .combining import (
    EffectiveChannel,
    RxEstimate,
    antenna_selection,
    combine_with_estimate,
    make_rx_estimate,
    max_eig_combining,
    mrc,
    qbc,
)
from .distributions import (
    BetaParams,
    QuantErrorLaw,
    ScalingInputs,
    bd_offset_dB,
    beta_cdf,
    beta_inverse_cdf,
    expected_error_approx,
    feedback_scaling,
    ks_statistic,
    min_beta_cdf,
    rate_gap_bound,
    rate_gap_bound_rx_error,
    sample_chi2_2k,
    sample_min_beta,
)
from .engine import run_scenario, scaling_table, verify_lemmas
from .errors import (
    CodebookModeError,
    CodebookSizeError,
    DegenerateChannelError,
    EmitError,
    InfeasibleGapError,
    NonHermitianError,
    NotInSpanError,
    SchedulingError,
    SimulationError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .linalg import (
    ChannelMatrix,
    max_eigvec,
    orthonormal_basis,
    project_onto_span,
    pseudo_inverse_apply,
    sample_channel,
)
from .quantization import (
    Codebook,
    QuantizationResult,
    emulate_subspace_quantization,
    generate_rvq,
    isotropic_in_subspace,
    quantize_subspace,
    quantize_vector,
)
from .scenario import RateCurve, Scenario, VERSION, emit, parse_config
from .transmission import (
    BeamformerSet,
    UserReport,
    bd_csit_reference,
    equal_power_round,
    greedy_user_selection,
    sinr,
    waterfilling,
    zf_beamformers,
)

__version__ = VERSION

__all__ = [
    "__version__",
    # channels and linear algebra
    "ChannelMatrix", "sample_channel", "orthonormal_basis",
    "project_onto_span", "pseudo_inverse_apply", "max_eigvec",
    # distribution laws and bounds
    "BetaParams", "QuantErrorLaw", "ScalingInputs", "beta_cdf",
    "beta_inverse_cdf", "min_beta_cdf", "sample_min_beta", "sample_chi2_2k",
    "expected_error_approx", "rate_gap_bound", "rate_gap_bound_rx_error",
    "feedback_scaling", "bd_offset_dB", "ks_statistic",
    # quantization
    "Codebook", "QuantizationResult", "generate_rvq", "quantize_vector",
    "quantize_subspace", "emulate_subspace_quantization",
    "isotropic_in_subspace",
    # combining
    "EffectiveChannel", "RxEstimate", "qbc", "antenna_selection", "mrc",
    "max_eig_combining", "make_rx_estimate", "combine_with_estimate",
    # transmission
    "BeamformerSet", "UserReport", "zf_beamformers", "sinr",
    "equal_power_round", "waterfilling", "greedy_user_selection",
    "bd_csit_reference",
    # orchestration
    "Scenario", "RateCurve", "parse_config", "emit", "run_scenario",
    "verify_lemmas", "scaling_table",
    # errors
    "SimulationError", "ValidationError", "UnsupportedConfigurationError",
    "CodebookSizeError", "CodebookModeError", "DegenerateChannelError",
    "NotInSpanError", "NonHermitianError", "SchedulingError",
    "InfeasibleGapError", "EmitError",
]
