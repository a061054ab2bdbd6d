"""RK4 propagation of the modified Bloch equations."""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.linalg import expm

from drive_susceptibility.dynamics import (
    DriveProgram,
    DriveSegment,
    MagnetizationState,
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
from drive_susceptibility.errors import InsufficientDataError, ParameterError, StepSizeError
from drive_susceptibility.model import cw_nutation_closed_form, nutation_damping_exact


def test_equilibrium_is_fixed_without_drive(protocol_params):
    c = segment_coefficients(protocol_params, 0.0, 0.0)
    start = MagnetizationState.equilibrium(protocol_params)
    derivative = bloch_derivative(start, protocol_params, c, 0.0, 0.0)
    assert np.all(derivative == 0.0)


def test_bloch_matrix_matches_derivative(exaggerated_params):
    p = exaggerated_params
    amplitude, offset = -0.7 * p.omega1, 300.0
    c = segment_coefficients(p, amplitude, offset)
    A, b = bloch_matrix(p, c, amplitude, offset)
    s = MagnetizationState(mx=0.2, my=-0.4, mz=0.8)
    np.testing.assert_allclose(
        bloch_derivative(s, p, c, amplitude, offset), A @ s.as_array() + b, rtol=1e-12
    )


def test_affine_step_reproduces_rk4(exaggerated_params):
    p = exaggerated_params
    c = segment_coefficients(p, p.omega1, 0.0)
    A, b = bloch_matrix(p, c, p.omega1, 0.0)

    def rhs(v):
        return A @ v + b

    h = 0.03 / p.omega1
    aug = rk4_affine_step(rhs, h)
    y = np.array([0.3, -0.1, 0.9])
    np.testing.assert_allclose(apply_map(aug, y), rk4_step(rhs, y, h), rtol=1e-12, atol=1e-15)


def test_program_map_agrees_with_stepping(exaggerated_params):
    p = exaggerated_params
    program = DriveProgram(
        segments=(
            DriveSegment(amplitude=p.omega1, duration=math.pi / p.omega1),
            DriveSegment(amplitude=0.0, duration=1e-4),
            DriveSegment(amplitude=-p.omega1, duration=0.5 * math.pi / p.omega1, offset=50.0),
        )
    )
    step = 0.02 / p.omega1
    start = MagnetizationState.equilibrium(p)
    final = integrate(start, program, p, step).final
    mapped = apply_map(program_map(program, p, step), start.as_array())
    np.testing.assert_allclose(mapped, final.as_array(), rtol=1e-10, atol=1e-12)
    assert final.t == pytest.approx(program.total_duration)


def test_free_longitudinal_recovery(protocol_params):
    p = protocol_params
    program = DriveProgram.constant(0.0, p.T1)
    start = MagnetizationState(mx=0.0, my=0.0, mz=0.0)
    final = integrate(start, program, p, p.T1 / 1000).final
    assert final.mz == pytest.approx(p.M0 * (1.0 - math.exp(-1.0)), rel=1e-9)


def test_free_transverse_decay(protocol_params):
    p = protocol_params
    program = DriveProgram.constant(0.0, 0.5)
    start = MagnetizationState(mx=1.0, my=0.0, mz=0.0)
    trajectory = integrate(start, program, p, 1e-3, stride=50)
    expected = np.exp(-trajectory.times / p.T2)
    np.testing.assert_allclose(trajectory.component("mx"), expected, rtol=1e-9)


def test_unitary_limit_conserves_length(unitary_params):
    p = unitary_params
    step = 0.01 / p.omega1
    program = DriveProgram.constant(p.omega1, 10_000 * step)
    start = MagnetizationState(mx=0.3, my=0.0, mz=0.7)
    trajectory = integrate(start, program, p, step, stride=1000)
    norms = np.linalg.norm(trajectory.states, axis=1)
    assert np.max(np.abs(norms / start.norm() - 1.0)) < 1e-9


def _exact_final(p, amplitude, duration, start):
    """Propagate with the matrix exponential of the augmented generator."""
    c = segment_coefficients(p, amplitude, 0.0)
    A, b = bloch_matrix(p, c, amplitude, 0.0)
    generator = np.zeros((4, 4))
    generator[:3, :3] = A
    generator[:3, 3] = b
    return (expm(generator * duration) @ np.append(start, 1.0))[:3]


def test_global_error_is_fourth_order(exaggerated_params):
    p = exaggerated_params
    duration = 40.0 / p.omega1
    start = MagnetizationState.equilibrium(p)
    exact = _exact_final(p, p.omega1, duration, start.as_array())
    errors = []
    for angle in (0.04, 0.02):
        program = DriveProgram.constant(p.omega1, duration)
        final = integrate(start, program, p, angle / p.omega1).final
        errors.append(np.linalg.norm(final.as_array() - exact))
    assert errors[0] / errors[1] == pytest.approx(16.0, rel=0.1)


def test_quarter_period_pulse_lands_on_minus_y(unitary_params):
    p = unitary_params
    program = DriveProgram.constant(p.omega1, 0.5 * math.pi / p.omega1)
    final = integrate(MagnetizationState.equilibrium(p), program, p, 0.01 / p.omega1).final
    np.testing.assert_allclose(final.as_array(), [0.0, -p.M0, 0.0], atol=1e-8)


def test_drive_phase_does_not_change_damping(exaggerated_params):
    p = exaggerated_params
    for offset in (0.0, 300.0):
        plus = segment_coefficients(p, p.omega1, offset)
        minus = segment_coefficients(p, -p.omega1, offset)
        assert minus == plus


def test_sampling_at_boundaries_and_stride(protocol_params):
    program = DriveProgram(
        segments=(
            DriveSegment(amplitude=0.0, duration=1e-3),
            DriveSegment(amplitude=0.0, duration=0.0),
            DriveSegment(amplitude=0.0, duration=2e-3),
        )
    )
    start = MagnetizationState.equilibrium(protocol_params)
    coarse = integrate(start, program, protocol_params, 5e-5)
    np.testing.assert_allclose(coarse.times, [0.0, 1e-3, 3e-3])
    fine = integrate(start, program, protocol_params, 5e-5, stride=10)
    # one interior sample in the first segment, three in the second
    assert len(fine) == 3 + 1 + 3
    assert list(fine.times) == sorted(fine.times)
    assert len(fine.rows()) == len(fine)
    assert fine[0] == start


def test_drive_program_composition():
    pulse = DriveProgram.constant(1.0, 0.25)
    assert pulse.repeat(4).total_duration == 1.0
    assert pulse.concatenate(DriveProgram.constant(-3.0, 0.5)).max_amplitude == 3.0
    assert DriveProgram().max_amplitude == 0.0
    with pytest.raises(ParameterError):
        pulse.repeat(-1)


def test_state_rejects_non_finite_components():
    with pytest.raises(ValidationError):
        MagnetizationState(mx=float("nan"), my=0.0, mz=1.0)


# --- step-size bounds ---


def test_step_must_be_positive():
    with pytest.raises(StepSizeError) as info:
        check_step(DriveProgram.constant(1.0, 1.0), 0.0)
    assert info.value.bound == "step > 0"


def test_step_must_resolve_shortest_segment():
    program = DriveProgram.constant(0.0, 1e-3)
    with pytest.raises(StepSizeError) as info:
        check_step(program, 2e-4)
    assert "min(segment durations)" in info.value.bound


def test_step_must_limit_rotation_angle():
    program = DriveProgram.constant(1e4, 1.0)
    check_step(program, 0.05 / 1e4)
    with pytest.raises(StepSizeError) as info:
        check_step(program, 0.06 / 1e4)
    assert "omega1" in info.value.bound


# --- steady state and CW nutation ---


def test_steady_state_is_fixed_point(exaggerated_params):
    p = exaggerated_params
    fixed = steady_state(p, p.omega1)
    c = segment_coefficients(p, p.omega1, 0.0)
    derivative = bloch_derivative(MagnetizationState.from_array(fixed), p, c, p.omega1, 0.0)
    assert np.max(np.abs(derivative)) < 1e-9 * p.omega1
    assert abs(fixed[2]) < p.M0


def test_cw_nutation_matches_closed_form(exaggerated_params):
    p = exaggerated_params
    metrics = simulate_cw_nutation(p, 10e-3, 0.02 / p.omega1)
    frequency, damping = cw_nutation_closed_form(p)
    assert metrics.periods_observed >= 8
    assert metrics.nutation_frequency == pytest.approx(p.omega1, rel=1e-3)
    assert metrics.nutation_frequency == pytest.approx(frequency, rel=1e-3)
    assert metrics.damping_rate == pytest.approx(damping, rel=0.02)
    assert metrics.damping_rate == pytest.approx(nutation_damping_exact(p), rel=0.01)


def test_cw_nutation_needs_enough_periods(exaggerated_params):
    p = exaggerated_params
    with pytest.raises(InsufficientDataError):
        simulate_cw_nutation(p, 3e-4, 0.02 / p.omega1)


def test_cw_nutation_needs_resonance(exaggerated_params):
    off = exaggerated_params.model_copy(
        update={"omega_drive": exaggerated_params.omega0 + 100.0}
    )
    with pytest.raises(ParameterError):
        simulate_cw_nutation(off, 10e-3, 0.02 / off.omega1)
