"""Pseudo-spectral simulation, synchronization, and online parameter
estimation for a family of fourth-order nonlinear PDEs on a periodic domain,
plus a cubature Kalman filter baseline and a CLI experiment harness.
"""

from .config import ExperimentConfig, SweepSpec, load_config, parse_config_text
from .errors import ConfigError, DivergenceError
from .experiments import control_reference, run_scenario
from .kernels import BACKEND, available_backends
from .master import (
    MasterTrajectory,
    burn_in_init,
    check_euler_stability,
    master_rhs,
    simulate_master,
)
from .metrics import (
    RunTrace,
    cost_C,
    error_coeffs,
    normalized_mse,
    param_sq_err,
    tail_average,
)
from .observation import (
    NoiseConfig,
    ObservationSetup,
    build_setup,
    calibrate_sigma,
    ls_fit,
    observe,
    uniform_grid,
)
from .slave import (
    CouplingMatrix,
    SlaveState,
    adaptive_step,
    build_sensitivity,
    dense_coupling,
    error_jacobian,
    init_slave_state,
    parameter_rhs,
    scalar_coupling,
    slave_rhs,
)
from .spectral import (
    DomainConfig,
    ModelParams,
    linear_diag,
    nonlinear_term,
    parseval_power,
    synthesize_field,
    zero_coeffs,
)
from .ubkf import (
    FilterState,
    cubature_points,
    default_filter_state,
    embed_state,
    extract_state,
    run_ubkf,
    ubkf_step,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND",
    "available_backends",
    "ConfigError",
    "DivergenceError",
    "DomainConfig",
    "ModelParams",
    "linear_diag",
    "nonlinear_term",
    "parseval_power",
    "synthesize_field",
    "zero_coeffs",
    "MasterTrajectory",
    "burn_in_init",
    "check_euler_stability",
    "master_rhs",
    "simulate_master",
    "NoiseConfig",
    "ObservationSetup",
    "build_setup",
    "calibrate_sigma",
    "ls_fit",
    "observe",
    "uniform_grid",
    "CouplingMatrix",
    "SlaveState",
    "adaptive_step",
    "build_sensitivity",
    "dense_coupling",
    "error_jacobian",
    "init_slave_state",
    "parameter_rhs",
    "scalar_coupling",
    "slave_rhs",
    "RunTrace",
    "cost_C",
    "error_coeffs",
    "normalized_mse",
    "param_sq_err",
    "tail_average",
    "FilterState",
    "cubature_points",
    "default_filter_state",
    "embed_state",
    "extract_state",
    "run_ubkf",
    "ubkf_step",
    "ExperimentConfig",
    "SweepSpec",
    "load_config",
    "parse_config_text",
    "control_reference",
    "run_scenario",
]
