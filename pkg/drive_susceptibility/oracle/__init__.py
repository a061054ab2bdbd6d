"""Independent brute-force checks of the closed-form theory."""

from .kernel import FluctuationTrajectory, KernelEstimate, expected_kernel, mc_memory_kernel
from .master import (
    CoarseGrainedIncrement,
    DensityMatrix2,
    GeneratorRates,
    coarse_grained_step,
    commutator_identity_check,
    extract_generator_rates,
    required_quad_points,
    rotating_frame_operators,
    secular_crossterm_magnitude,
)
from .quadrature import gamma_quadrature, kramers_kronig_check
from .suite import OracleCheck, OracleSettings, oracle_params, run_oracle_suite, window_for

__all__ = [
    "CoarseGrainedIncrement",
    "DensityMatrix2",
    "FluctuationTrajectory",
    "GeneratorRates",
    "KernelEstimate",
    "OracleCheck",
    "OracleSettings",
    "coarse_grained_step",
    "commutator_identity_check",
    "expected_kernel",
    "extract_generator_rates",
    "gamma_quadrature",
    "kramers_kronig_check",
    "mc_memory_kernel",
    "oracle_params",
    "required_quad_points",
    "rotating_frame_operators",
    "run_oracle_suite",
    "secular_crossterm_magnitude",
    "window_for",
]
