"""Shared parameter sets for the test modules."""

import math

import pytest

from drive_susceptibility.model import TWO_PI, SpinSystemParams


@pytest.fixture
def protocol_params() -> SpinSystemParams:
    """500 MHz protons, nu1 = 10 kHz, tau_c = 13.2 ps."""
    return SpinSystemParams.from_hz(
        larmor_hz=500e6, nu1_hz=10e3, offset_hz=0.0, tau_c=1.32e-11, T1=1.34, T2=0.81
    )


@pytest.fixture
def exaggerated_params() -> SpinSystemParams:
    """tau_c = 100 ns so the drive terms dominate T1 and T2."""
    return SpinSystemParams.on_resonance(
        omega0=TWO_PI * 1e3, omega1=TWO_PI * 1e4, tau_c=1e-7, T1=1.34, T2=0.81
    )


@pytest.fixture
def moderate_params() -> SpinSystemParams:
    """tau_c = 10 ns: refocused decay of about 70 1/s."""
    return SpinSystemParams.on_resonance(
        omega0=TWO_PI * 1e3, omega1=TWO_PI * 1e4, tau_c=1e-8, T1=1.34, T2=0.81
    )


@pytest.fixture
def unitary_params() -> SpinSystemParams:
    """No relaxation and a negligible correlation time."""
    return SpinSystemParams.on_resonance(
        omega0=TWO_PI * 1e3, omega1=TWO_PI * 1e4, tau_c=1e-20, T1=math.inf, T2=math.inf
    )
