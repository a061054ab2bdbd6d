"""Bloch-equation dynamics under piecewise-constant drives."""

from .bloch import (
    DriveProgram,
    DriveSegment,
    MagnetizationState,
    NutationMetrics,
    Trajectory,
    apply_map,
    bloch_derivative,
    bloch_matrix,
    check_step,
    integrate,
    program_map,
    rk4_affine_step,
    rk4_step,
    segment_coefficients,
    simulate_cw_nutation,
    steady_state,
)

__all__ = [
    "DriveProgram",
    "DriveSegment",
    "MagnetizationState",
    "NutationMetrics",
    "Trajectory",
    "apply_map",
    "bloch_derivative",
    "bloch_matrix",
    "check_step",
    "integrate",
    "program_map",
    "rk4_affine_step",
    "rk4_step",
    "segment_coefficients",
    "simulate_cw_nutation",
    "steady_state",
]
