"""Closed-form second-order drive susceptibilities.

The drive enters the master equation twice: once through the co-rotating
component (frequency ``delta_omega`` in the rotating frame) and once through
the counter-rotating component (frequency ``Omega``). Each contributes a
complex Lorentzian spectral density whose absorptive part damps the
magnetization and whose dispersive part shifts its precession frequency.
"""

import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.signal import hilbert

from ..errors import ParameterError
from .parameters import SpinSystemParams


class ComplexLorentzian(BaseModel):
    """Real (absorptive) and imaginary (dispersive) parts of Gamma(Omega)."""

    model_config = ConfigDict(frozen=True)

    absorptive: float
    dispersive: float

    def as_complex(self) -> complex:
        return complex(self.absorptive, self.dispersive)


class DriveCoefficients(BaseModel):
    """Frequency shifts (rad/s) and damping rates (1/s) induced by the drive."""

    model_config = ConfigDict(frozen=True)

    omega_bs: float
    delta_omega_shift: float
    eta_x: float = Field(ge=0.0)
    eta_y: float = Field(ge=0.0)
    eta_z: float = Field(ge=0.0)

    @classmethod
    def zero(cls) -> "DriveCoefficients":
        return cls(omega_bs=0.0, delta_omega_shift=0.0, eta_x=0.0, eta_y=0.0, eta_z=0.0)


class BlochSiegertFieldShift(BaseModel):
    """Resonance-field shift in the Omega*tau_c > 1 limit."""

    model_config = ConfigDict(frozen=True)

    field_shift_tesla: float
    omega_bs_asymptotic: float
    b1_tesla: float
    b0_tesla: float
    asymptotic_valid: bool


def compute_gamma(Omega: float, tau_c: float) -> ComplexLorentzian:
    """Gamma(Omega) = int_0^inf exp(i Omega tau) exp(-tau/tau_c) dtau."""
    if not tau_c > 0.0:
        raise ParameterError(f"tau_c must be positive, got {tau_c!r}")
    x = Omega * tau_c
    denominator = 1.0 + x * x
    return ComplexLorentzian(
        absorptive=tau_c / denominator,
        dispersive=x * tau_c / denominator,
    )


def coefficients_for(
    omega1: float, delta_omega: float, Omega: float, tau_c: float
) -> DriveCoefficients:
    """Coefficients for an explicit (omega1, delta_omega, Omega, tau_c) tuple.

    Used per drive segment, where the amplitude and offset differ from the
    parameter record.
    """
    if omega1 == 0.0:
        return DriveCoefficients.zero()
    counter = compute_gamma(Omega, tau_c)
    co = compute_gamma(delta_omega, tau_c)
    w2 = omega1 * omega1
    eta_x = 0.5 * w2 * counter.absorptive
    return DriveCoefficients(
        omega_bs=0.5 * w2 * counter.dispersive,
        # printed without the 1/2 that omega_bs carries
        delta_omega_shift=w2 * co.dispersive,
        eta_x=eta_x,
        eta_y=eta_x + w2 * co.absorptive,
        eta_z=w2 * (counter.absorptive + co.absorptive),
    )


def compute_coefficients(p: SpinSystemParams) -> DriveCoefficients:
    """omega_BS, delta_omega shift and eta_x/eta_y/eta_z for ``p``."""
    return coefficients_for(p.omega1, p.delta_omega, p.Omega, p.tau_c)


def asymptotic_bs_shift(p: SpinSystemParams) -> BlochSiegertFieldShift:
    """Field shift -(1/gamma) * omega1^2 / (4 omega0) of an on-resonance drive."""
    if p.delta_omega != 0.0:
        raise ParameterError(
            f"asymptotic Bloch-Siegert shift requires delta_omega == 0, "
            f"got {p.delta_omega:.6g} rad/s"
        )
    w2 = p.omega1 * p.omega1
    return BlochSiegertFieldShift(
        field_shift_tesla=-(w2 / (4.0 * p.omega0)) / p.gamma,
        omega_bs_asymptotic=w2 / (2.0 * p.Omega),
        b1_tesla=-2.0 * p.omega1 / p.gamma,
        b0_tesla=-p.omega0 / p.gamma,
        asymptotic_valid=abs(p.Omega) * p.tau_c > 1.0,
    )


def approximate_coefficients(p: SpinSystemParams) -> DriveCoefficients:
    """On-resonance, Omega*tau_c << 1 limit: eta_z, eta_x, eta_y = 2, 1/2, 3/2 w1^2 tc."""
    a = p.omega1 * p.omega1 * p.tau_c
    return DriveCoefficients(
        omega_bs=0.0, delta_omega_shift=0.0, eta_x=0.5 * a, eta_y=1.5 * a, eta_z=2.0 * a
    )


def cw_nutation_closed_form(p: SpinSystemParams) -> Tuple[float, float]:
    """Printed (frequency, damping) of an on-resonance CW nutation."""
    a = p.omega1 * p.omega1 * p.tau_c
    skew = p.R2 - p.R1 - 0.5 * a
    frequency = math.sqrt(p.omega1**2 + 0.25 * skew * skew)
    damping = 0.5 * (p.R1 + p.R2) + 1.75 * a
    return frequency, damping


def nutation_damping_exact(p: SpinSystemParams) -> float:
    """Mean of the y and z decay rates for the full Lorentzian coefficients."""
    c = compute_coefficients(p)
    return 0.5 * (p.R1 + p.R2 + c.eta_z + c.eta_y)


def refocused_decay_rate(p: SpinSystemParams) -> float:
    """Decay rate of M_z sampled at refocusing boundaries.

    Between boundaries the magnetization sweeps the y-z plane uniformly, so
    the z and y decay rates are weighted equally.
    """
    return nutation_damping_exact(p)


def printed_refocused_rate(p: SpinSystemParams) -> float:
    """(T1 + T2)/(2 T1 T2) + omega1^2 tau_c."""
    return 0.5 * (p.R1 + p.R2) + p.omega1**2 * p.tau_c


def refocused_curvature_factor(p: SpinSystemParams) -> float:
    """Ratio of the omega1^2 coefficient of the refocused rate to tau_c.

    Depends on Omega*tau_c only; 7/4 when Omega*tau_c << 1, 1 when >> 1.
    """
    counter = compute_gamma(p.Omega, p.tau_c)
    co = compute_gamma(p.delta_omega, p.tau_c)
    # (eta_z + eta_y) / (2 omega1^2 tau_c)
    return (1.5 * counter.absorptive + 2.0 * co.absorptive) / (2.0 * p.tau_c)


def nutation_axis_tilt(p: SpinSystemParams) -> float:
    """Angle of the effective nutation axis away from x, arctan(dw/w1)."""
    if p.omega1 == 0.0:
        return math.copysign(math.pi / 2, p.delta_omega) if p.delta_omega else 0.0
    return math.atan(p.delta_omega / p.omega1)


def kramers_kronig_dispersive(
    absorptive: np.ndarray, pad_factor: int = 2
) -> np.ndarray:
    """Hilbert transform of an absorptive spectrum sampled on a uniform grid.

    The grid must be symmetric about zero frequency and wide enough that the
    spectrum has decayed at its edges; zero padding suppresses wrap-around.
    """
    absorptive = np.asarray(absorptive, dtype=float)
    npts = absorptive.shape[0]
    nfft = 1 << int(math.ceil(math.log2(npts * max(pad_factor, 1))))
    return hilbert(absorptive, N=nfft).imag[:npts]
