"""Uplink simulator for user-centric cell-free massive MIMO with
RIS-integrated antenna arrays."""

from .association import Association, assign_pilots_and_clusters, selector_apply
from .config import SimConfig, load_config
from .estimation import (
    EffectiveStats,
    effective_covariance,
    effective_front,
    error_covariance,
    mmse_estimate,
    pilot_gram,
    received_pilot_statistic,
)
from .exceptions import (
    CfrisError,
    ConfigError,
    DimensionError,
    ModelError,
    SingularMatrixError,
)
from .experiment import (
    SCENARIOS,
    ExperimentSpec,
    SeReport,
    emit_report,
    load_report,
    run_experiment,
)
from .linalg import HermitianEig, hermitian_eig, sample_complex_gaussian, solve_pd
from .network import (
    ChannelStats,
    NetworkRealization,
    build_ap_ris_channel,
    build_spatial_correlation,
    generate_realization,
    pathloss_beta,
)
from .receiver import (
    instantaneous_sinr,
    mmse_combiner,
    pmmse_combiner,
    rayleigh_quotient_sinr,
    spectral_efficiency,
)
from .ris import (
    SignalStrengthObjective,
    build_objective,
    constrained_power_iteration,
    select_long_term_config,
)

__version__ = "0.1.0"
