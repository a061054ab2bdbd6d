"""Parameters and closed-form drive susceptibilities."""

from .coefficients import (
    BlochSiegertFieldShift,
    ComplexLorentzian,
    DriveCoefficients,
    approximate_coefficients,
    asymptotic_bs_shift,
    coefficients_for,
    compute_coefficients,
    compute_gamma,
    cw_nutation_closed_form,
    kramers_kronig_dispersive,
    nutation_axis_tilt,
    nutation_damping_exact,
    printed_refocused_rate,
    refocused_curvature_factor,
    refocused_decay_rate,
)
from .parameters import PROTON_GAMMA, TWO_PI, SpinSystemParams

__all__ = [
    "BlochSiegertFieldShift",
    "ComplexLorentzian",
    "DriveCoefficients",
    "PROTON_GAMMA",
    "SpinSystemParams",
    "TWO_PI",
    "approximate_coefficients",
    "asymptotic_bs_shift",
    "coefficients_for",
    "compute_coefficients",
    "compute_gamma",
    "cw_nutation_closed_form",
    "kramers_kronig_dispersive",
    "nutation_axis_tilt",
    "nutation_damping_exact",
    "printed_refocused_rate",
    "refocused_curvature_factor",
    "refocused_decay_rate",
]
