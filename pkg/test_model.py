"""Closed-form coefficients and the parameter record."""

import logging
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from drive_susceptibility.errors import ParameterError, TimescaleError
from drive_susceptibility.model import (
    TWO_PI,
    SpinSystemParams,
    approximate_coefficients,
    asymptotic_bs_shift,
    coefficients_for,
    compute_coefficients,
    compute_gamma,
    cw_nutation_closed_form,
    nutation_axis_tilt,
    nutation_damping_exact,
    printed_refocused_rate,
    refocused_curvature_factor,
    refocused_decay_rate,
)


def _counter_rotating(omega_tau: float, tau_c: float = 1e-9, omega1: float = 1e5):
    Omega = omega_tau / tau_c
    return SpinSystemParams.on_resonance(
        omega0=0.5 * Omega, omega1=omega1, tau_c=tau_c, T1=1.0, T2=1.0
    )


# --- Gamma(Omega) ---


def test_gamma_at_zero_frequency():
    gamma = compute_gamma(0.0, 2e-9)
    assert gamma.absorptive == 2e-9
    assert gamma.dispersive == 0.0


def test_gamma_at_unit_product():
    gamma = compute_gamma(1e9, 1e-9)
    assert gamma.absorptive == pytest.approx(0.5e-9, rel=1e-15)
    assert gamma.dispersive == pytest.approx(0.5e-9, rel=1e-15)
    assert gamma.as_complex() == complex(gamma.absorptive, gamma.dispersive)


def test_gamma_dispersive_approaches_inverse_frequency():
    Omega = 100.0 / 1e-9
    assert compute_gamma(Omega, 1e-9).dispersive == pytest.approx(1.0 / Omega, rel=1e-4)


@given(Omega=st.floats(-1e12, 1e12), tau_c=st.floats(1e-13, 1e-6))
def test_gamma_is_conjugate_symmetric(Omega, tau_c):
    forward, backward = compute_gamma(Omega, tau_c), compute_gamma(-Omega, tau_c)
    assert backward.absorptive == forward.absorptive
    assert backward.dispersive == -forward.dispersive
    assert backward.as_complex() == forward.as_complex().conjugate()


def test_gamma_rejects_non_positive_tau_c():
    with pytest.raises(ParameterError):
        compute_gamma(1.0, 0.0)


# --- drive coefficients ---


def test_zero_drive_gives_zero_coefficients():
    c = coefficients_for(0.0, 10.0, 1e9, 1e-9)
    assert (c.omega_bs, c.delta_omega_shift, c.eta_x, c.eta_y, c.eta_z) == (0, 0, 0, 0, 0)


@pytest.mark.parametrize("omega_tau", [1.0, 10.0, 100.0])
def test_bloch_siegert_asymptote_gap(omega_tau):
    p = _counter_rotating(omega_tau)
    exact = compute_coefficients(p).omega_bs
    asymptote = asymptotic_bs_shift(p).omega_bs_asymptotic
    assert abs(exact - asymptote) / asymptote == pytest.approx(
        1.0 / (1.0 + omega_tau**2), rel=1e-12
    )


def test_bloch_siegert_magnitude_for_protons_at_500_mhz():
    p = SpinSystemParams.on_resonance(
        omega0=TWO_PI * 500e6, omega1=1e5, tau_c=1e-12, T1=1.34, T2=0.81
    )
    assert 1e-5 <= compute_coefficients(p).omega_bs < 1e-4


def test_field_shift_sign_and_validity(protocol_params):
    shift = asymptotic_bs_shift(protocol_params)
    assert shift.field_shift_tesla < 0.0
    assert shift.field_shift_tesla == pytest.approx(
        -(protocol_params.omega1**2 / (4.0 * protocol_params.omega0)) / protocol_params.gamma
    )
    # Omega * tau_c is about 0.08 here
    assert not shift.asymptotic_valid
    assert asymptotic_bs_shift(_counter_rotating(10.0)).asymptotic_valid


def test_asymptotic_shift_needs_resonance():
    p = SpinSystemParams(
        omega0=1e9, omega1=1e4, omega_drive=1e9 + 100.0, tau_c=1e-9, T1=1.0, T2=1.0
    )
    with pytest.raises(ParameterError):
        asymptotic_bs_shift(p)


def test_short_correlation_limit(exaggerated_params):
    exact = compute_coefficients(exaggerated_params)
    approx = approximate_coefficients(exaggerated_params)
    for name in ("eta_x", "eta_y", "eta_z"):
        assert getattr(exact, name) == pytest.approx(getattr(approx, name), rel=1e-5)
    assert exact.eta_z / exact.eta_x == pytest.approx(4.0, rel=1e-5)
    assert exact.eta_y / exact.eta_x == pytest.approx(3.0, rel=1e-5)


@given(
    omega1=st.floats(1.0, 1e6),
    delta_omega=st.floats(-1e5, 1e5),
    Omega=st.floats(1e3, 1e12),
    tau_c=st.floats(1e-13, 1e-6),
)
def test_coefficient_identities(omega1, delta_omega, Omega, tau_c):
    c = coefficients_for(omega1, delta_omega, Omega, tau_c)
    assert min(c.eta_x, c.eta_y, c.eta_z) >= 0.0
    assert c.eta_z == pytest.approx(c.eta_x + c.eta_y, rel=1e-12)
    assert c.eta_y >= c.eta_x
    assert c.omega_bs > 0.0
    assert math.copysign(1.0, c.delta_omega_shift) == math.copysign(1.0, delta_omega) or (
        c.delta_omega_shift == 0.0
    )


@given(
    omega1=st.floats(1.0, 1e5),
    k=st.floats(0.1, 10.0),
    delta_omega=st.floats(-1e5, 1e5),
    tau_c=st.floats(1e-13, 1e-6),
)
def test_coefficients_scale_with_drive_power(omega1, k, delta_omega, tau_c):
    Omega = 1e9
    base = coefficients_for(omega1, delta_omega, Omega, tau_c)
    scaled = coefficients_for(k * omega1, delta_omega, Omega, tau_c)
    flipped = coefficients_for(-omega1, delta_omega, Omega, tau_c)
    assert flipped == base
    for name in ("omega_bs", "delta_omega_shift", "eta_x", "eta_y", "eta_z"):
        expected = k * k * getattr(base, name)
        assert getattr(scaled, name) == pytest.approx(expected, rel=1e-12, abs=1e-300)


# --- nutation and refocusing rates ---


def test_cw_closed_form(exaggerated_params):
    p = exaggerated_params
    frequency, damping = cw_nutation_closed_form(p)
    assert damping == pytest.approx(0.5 * (p.R1 + p.R2) + 1.75 * p.omega1**2 * p.tau_c)
    assert frequency == pytest.approx(p.omega1, rel=1e-5)
    assert nutation_damping_exact(p) == pytest.approx(damping, rel=1e-5)


def test_curvature_factor_limits(protocol_params):
    assert refocused_curvature_factor(_counter_rotating(1e-4)) == pytest.approx(1.75, rel=1e-7)
    assert refocused_curvature_factor(_counter_rotating(1e3)) == pytest.approx(1.0, rel=1e-5)
    assert refocused_curvature_factor(protocol_params) == pytest.approx(1.745, abs=1e-3)


def test_refocused_rate_against_printed_form(protocol_params):
    p = protocol_params
    gap = refocused_decay_rate(p) - printed_refocused_rate(p)
    expected = (refocused_curvature_factor(p) - 1.0) * p.omega1**2 * p.tau_c
    assert gap == pytest.approx(expected, rel=1e-9)


def test_refocused_rate_exceeds_printed_form_at_20_khz(protocol_params):
    p = protocol_params.with_omega1(TWO_PI * 20e3)
    assert printed_refocused_rate(p) == pytest.approx(1.1989, rel=1e-3)
    assert refocused_decay_rate(p) == pytest.approx(1.3541, rel=1e-3)
    # the simulated rate follows the 7/4 curvature, not the printed unit one
    assert refocused_decay_rate(p) / printed_refocused_rate(p) > 1.1


def test_nutation_axis_tilt():
    on = SpinSystemParams.on_resonance(omega0=1e9, omega1=1e4, tau_c=1e-12, T1=1.0, T2=1.0)
    off = SpinSystemParams(
        omega0=1e9, omega1=1e4, omega_drive=1e9 + 1e4, tau_c=1e-12, T1=1.0, T2=1.0
    )
    assert nutation_axis_tilt(on) == 0.0
    assert nutation_axis_tilt(off) == pytest.approx(math.pi / 4)


# --- parameter validation ---


def test_from_hz_uses_angular_units():
    p = SpinSystemParams.from_hz(
        larmor_hz=400e6, nu1_hz=5e3, offset_hz=20.0, tau_c=1e-11, T1=1.0, T2=0.5
    )
    assert p.omega1 == TWO_PI * 5e3
    assert p.delta_omega == pytest.approx(TWO_PI * 20.0, rel=1e-6)
    assert p.Omega == pytest.approx(2 * TWO_PI * 400e6, rel=1e-7)
    assert (p.R1, p.R2) == (1.0, 2.0)


def test_drive_too_strong_for_truncation():
    with pytest.raises(TimescaleError):
        SpinSystemParams.on_resonance(omega0=1e9, omega1=2e6, tau_c=1e-7, T1=1.0, T2=1.0)


def test_weak_separation_warns(caplog):
    with caplog.at_level(logging.WARNING):
        SpinSystemParams.on_resonance(omega0=1e9, omega1=5e5, tau_c=1e-7, T1=1.0, T2=1.0)
    assert "second-order results degrade" in caplog.text


def test_kappa_must_match_tau_c():
    p = SpinSystemParams.from_kappa(
        kappa=1e6, omega0=1e9, omega1=1e4, omega_drive=1e9, T1=1.0, T2=1.0
    )
    assert p.tau_c == pytest.approx(2e-12)
    assert p.kappa_derived == 1e6
    with pytest.raises(ParameterError):
        SpinSystemParams(
            omega0=1e9, omega1=1e4, omega_drive=1e9, tau_c=1e-9, kappa=1e6, T1=1.0, T2=1.0
        )


def test_copies_are_revalidated(protocol_params):
    p = protocol_params
    doubled = p.with_omega1(2.0 * p.omega1)
    assert doubled.omega1 == 2.0 * p.omega1
    assert doubled.tau_c == p.tau_c
    with pytest.raises(TimescaleError):
        p.with_omega1(1e10)
    free = p.relaxation_free()
    assert math.isinf(free.T1) and math.isinf(free.T2)
    assert free.R1 == 0.0 and free.R2 == 0.0


def test_field_constraints_are_validation_errors():
    with pytest.raises(ValidationError):
        SpinSystemParams.on_resonance(omega0=1e9, omega1=-1.0, tau_c=1e-9, T1=1.0, T2=1.0)
    with pytest.raises(ValidationError):
        SpinSystemParams.on_resonance(omega0=1e9, omega1=1.0, tau_c=1e-9, T1=0.0, T2=1.0)
