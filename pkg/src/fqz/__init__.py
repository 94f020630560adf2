"""Quantization asymptotics for in-homogeneous self-similar measures."""

from .symbolic import Antichain, Relation, Word, relate, threshold_antichain
from .systems import (
    Box,
    CondensationSystem,
    ConfigError,
    Similitude,
    SimilitudeSystem,
    dimension_kr,
    load_config,
    parse_config,
    quantization_dimension,
    u0_l0_d0,
    validate_iosc,
    validate_osc,
)
from .mass import mass_case1, mass_case2, mu1
from .asymptotics import (
    CardinalityCapExceeded,
    LevelFamily,
    antichain_log_identity,
    check_count_bounds,
    convergence_report,
    cover_family,
    level_family,
    ratio_dk,
    ratio_eta_j,
    ratio_xi_j,
)
from .quantizer import (
    Codebook,
    ErrorBracket,
    codebook_from_antichain,
    coefficient_table,
    lloyd0,
    log_dist_integral,
    monte_carlo_integral,
    oracle_optimal_1d,
    sample_ism,
    sandwich_check,
)

__version__ = "0.1.0"
