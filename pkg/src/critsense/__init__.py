"""Gaussian-state toolkit for critical and passive quantum sensing of a
frequency shift in a damped, parametrically driven bosonic mode."""

__version__ = "0.1.0"

from .dynamics import (
    Regime,
    SpectralInfo,
    SystemParams,
    drift_and_diffusion,
    evolve_critical,
    evolve_passive,
    mean_photons_vs_time,
    purity_vs_time,
    spectral_info,
    steady_state,
    steady_state_photons,
)
from .gaussian import (
    DisplacementAmplitude,
    GaussianState,
    SqueezeParam,
    apply_displace,
    apply_rotation,
    apply_squeeze,
    fidelity,
    mean_photons,
    photon_variance,
    purity,
    thermal_state,
    vacuum_state,
)
from .metrology import (
    DerivativePair,
    HomodyneSetting,
    differentiate_at_zero_shift,
    fi_homodyne,
    qfi,
    qfi_fidelity_oracle,
    qfi_terms,
    snr_photon_counting,
)
from .protocols import (
    MetrologyReport,
    ProtocolKind,
    ProtocolSpec,
    ResourceBudget,
    best_homodyne,
    beyond_threshold_epsilon,
    beyond_threshold_qfi,
    cqs_qfi,
    cqs_qfi_steady,
    epsilon_opt,
    fundamental_bound,
    optimal_squeezing_homodyne,
    optimize_time,
    pqs_qfi,
    total_qfi,
)

__all__ = [
    "__version__",
    "Regime",
    "SpectralInfo",
    "SystemParams",
    "drift_and_diffusion",
    "evolve_critical",
    "evolve_passive",
    "mean_photons_vs_time",
    "purity_vs_time",
    "spectral_info",
    "steady_state",
    "steady_state_photons",
    "DisplacementAmplitude",
    "GaussianState",
    "SqueezeParam",
    "apply_displace",
    "apply_rotation",
    "apply_squeeze",
    "fidelity",
    "mean_photons",
    "photon_variance",
    "purity",
    "thermal_state",
    "vacuum_state",
    "DerivativePair",
    "HomodyneSetting",
    "differentiate_at_zero_shift",
    "fi_homodyne",
    "qfi",
    "qfi_fidelity_oracle",
    "qfi_terms",
    "snr_photon_counting",
    "MetrologyReport",
    "ProtocolKind",
    "ProtocolSpec",
    "ResourceBudget",
    "best_homodyne",
    "beyond_threshold_epsilon",
    "beyond_threshold_qfi",
    "cqs_qfi",
    "cqs_qfi_steady",
    "epsilon_opt",
    "fundamental_bound",
    "optimal_squeezing_homodyne",
    "optimize_time",
    "pqs_qfi",
    "total_qfi",
]
