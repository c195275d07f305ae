"""Gaussian covariance dynamics of two coupled oscillators under a Lindblad master equation."""

from .closed_form import ClosedFormParams, a_block, b_block, cross_block, det_cs_asymptotic
from .dynamics import (
    LindbladCouplings,
    OscillatorParams,
    affine_system,
    damping_rates,
    general_rhs,
    psd_check,
    simplified_rhs,
    stationary_state,
)
from .errors import (
    ConfigError,
    DegenerateStateError,
    DivergenceError,
    LindbladPairError,
    ModelViolationError,
    NoStationaryStateError,
    SingularKernelError,
    UnsupportedParameterError,
    ValidationError,
)
from .experiments import entanglement_windows, load_config, parse_config, run_figure, run_sweep
from .integrator import IntegratorConfig, Trajectory, compare_closed_form, integrate, residual_check
from .simon import SimonParams, simon_lengths, to_covariance_state, validate_simon
from .state_space import (
    STATE_ORDER,
    CovarianceState,
    ambiguity_eval,
    covariances_from_ambiguity,
    density_matrix_eval,
    entanglement_test,
    minimum_uncertainty_state,
    subsystem_metrics,
    validate_state,
    wigner_eval,
)

__all__ = [
    "ClosedFormParams",
    "a_block",
    "b_block",
    "cross_block",
    "det_cs_asymptotic",
    "LindbladCouplings",
    "OscillatorParams",
    "affine_system",
    "damping_rates",
    "general_rhs",
    "psd_check",
    "simplified_rhs",
    "stationary_state",
    "ConfigError",
    "DegenerateStateError",
    "DivergenceError",
    "LindbladPairError",
    "ModelViolationError",
    "NoStationaryStateError",
    "SingularKernelError",
    "UnsupportedParameterError",
    "ValidationError",
    "entanglement_windows",
    "load_config",
    "parse_config",
    "run_figure",
    "run_sweep",
    "IntegratorConfig",
    "Trajectory",
    "compare_closed_form",
    "integrate",
    "residual_check",
    "SimonParams",
    "simon_lengths",
    "to_covariance_state",
    "validate_simon",
    "STATE_ORDER",
    "CovarianceState",
    "ambiguity_eval",
    "covariances_from_ambiguity",
    "density_matrix_eval",
    "entanglement_test",
    "minimum_uncertainty_state",
    "subsystem_metrics",
    "validate_state",
    "wigner_eval",
]

__version__ = "0.1.0"
