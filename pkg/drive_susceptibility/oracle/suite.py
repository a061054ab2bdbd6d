"""Batch of oracle comparisons with per-check tolerances."""

import logging
import math
from typing import Callable, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..model import SpinSystemParams, compute_coefficients, compute_gamma
from .kernel import mc_memory_kernel
from .master import (
    DensityMatrix2,
    coarse_grained_step,
    commutator_identity_check,
    extract_generator_rates,
    required_quad_points,
    secular_crossterm_magnitude,
)
from .quadrature import gamma_quadrature, kramers_kronig_check

logger = logging.getLogger(__name__)


class OracleSettings(BaseModel):
    """Sizes and tolerances of the oracle suite (``ORACLE__*`` keys)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    tau_c: float = Field(default=1e-3, gt=0.0, description="Desk-scale correlation time, s")
    quadrature_tolerance: float = 1e-9
    quadrature_points: int = Field(default=50, ge=2)
    kernel_trajectories: int = Field(default=10_000, ge=100)
    kernel_lags: int = Field(default=20, ge=2)
    kernel_max_lag: float = Field(default=2.0, gt=0.0, description="Largest lag in tau_c")
    kernel_sigmas: float = 3.0
    generator_tolerance: float = 0.05
    generator_omega_tau: List[float] = [0.1, 1.0, 10.0]
    crossterm_limit: float = 1e-3
    commutator_tolerance: float = 1e-13
    kramers_kronig_tolerance: float = 1e-3
    increment_tolerance: float = 1e-12
    seed: int = 0
    corrupt_kernel: bool = False


class OracleCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    measured: float
    expected: float
    deviation: float
    tolerance: float
    passed: bool

    @classmethod
    def compare(
        cls, name: str, measured: float, expected: float, deviation: float, tolerance: float
    ) -> "OracleCheck":
        passed = math.isfinite(deviation) and deviation <= tolerance
        return cls(
            name=name,
            measured=measured,
            expected=expected,
            deviation=deviation,
            tolerance=tolerance,
            passed=passed,
        )


def _relative(measured: float, expected: float) -> float:
    if expected == 0.0:
        return abs(measured)
    return abs(measured - expected) / abs(expected)


def window_for(tau_c: float, Omega: float) -> float:
    """Whole number of counter-rotating periods, at least 100 tau_c and 2000/Omega.

    Ending on a full period cancels the leading oscillatory remainder of the
    non-secular and cross terms.
    """
    period = 2.0 * math.pi / Omega
    return period * math.ceil(max(100.0 * tau_c, 2000.0 / Omega) / period)


def oracle_params(tau_c: float, omega_tau: float) -> SpinSystemParams:
    """On-resonance drive with Omega*tau_c = ``omega_tau`` and omega1 = 0.01/delta_t."""
    Omega = omega_tau / tau_c
    delta_t = window_for(tau_c, Omega)
    return SpinSystemParams.on_resonance(
        omega0=0.5 * Omega,
        omega1=0.01 / delta_t,
        tau_c=tau_c,
        T1=math.inf,
        T2=math.inf,
    )


def oracle_window(p: SpinSystemParams) -> float:
    return window_for(p.tau_c, p.Omega)


def check_gamma_quadrature(settings: OracleSettings) -> OracleCheck:
    tau_c = settings.tau_c
    products = np.concatenate(([0.0], np.logspace(-2, 2, settings.quadrature_points - 1)))
    worst, at = 0.0, 0.0
    for x in products:
        numeric = gamma_quadrature(x / tau_c, tau_c)
        exact = compute_gamma(x / tau_c, tau_c)
        deviation = max(
            _relative(numeric.absorptive, exact.absorptive),
            _relative(numeric.dispersive, exact.dispersive) if x > 0.0 else 0.0,
        )
        if deviation > worst:
            worst, at = deviation, x
    return OracleCheck.compare("gamma_quadrature", at, 0.0, worst, settings.quadrature_tolerance)


def check_memory_kernel(settings: OracleSettings) -> OracleCheck:
    tau_c = settings.tau_c
    kappa = math.sqrt(2.0 / tau_c)
    lags = np.linspace(0.0, settings.kernel_max_lag * tau_c, settings.kernel_lags)
    dt = lags[1] / 20.0
    estimate = mc_memory_kernel(kappa, lags, settings.kernel_trajectories, dt, settings.seed)
    sigmas = estimate.deviation_in_standard_errors(kappa, settings.corrupt_kernel)
    worst = int(np.argmax(sigmas))
    return OracleCheck.compare(
        "memory_kernel",
        float(abs(estimate.kernel[worst])),
        float(estimate.expected(kappa, settings.corrupt_kernel)[worst]),
        float(sigmas[worst]),
        settings.kernel_sigmas,
    )


def check_generator_rates(settings: OracleSettings, omega_tau: float) -> OracleCheck:
    p = oracle_params(settings.tau_c, omega_tau)
    extracted = extract_generator_rates(p, oracle_window(p))
    closed = compute_coefficients(p)
    pairs = {
        "eta_x": (extracted.eta_x, closed.eta_x),
        "eta_y": (extracted.eta_y, closed.eta_y),
        "eta_z": (extracted.eta_z, closed.eta_z),
        "omega_bs": (extracted.omega_bs, closed.omega_bs),
    }
    name, (measured, expected) = max(
        pairs.items(), key=lambda item: _relative(*item[1])
    )
    return OracleCheck.compare(
        f"generator[Omega*tau_c={omega_tau:g}].{name}",
        measured,
        expected,
        _relative(measured, expected),
        settings.generator_tolerance,
    )


def check_increment_structure(settings: OracleSettings) -> OracleCheck:
    p = oracle_params(settings.tau_c, 1.0)
    delta_t = oracle_window(p)
    rho = DensityMatrix2.from_bloch(0.2, -0.1, 0.3)
    step = coarse_grained_step(rho, p, 0.37 * delta_t, delta_t, required_quad_points(p, delta_t))
    # relative to the size of the increment itself
    scale = max(float(np.max(np.abs(step.total))), 1e-300)
    deviation = max(step.trace_error(), step.hermiticity_error()) / scale
    return OracleCheck.compare(
        "increment_trace_hermiticity", deviation, 0.0, deviation, settings.increment_tolerance
    )


def check_crossterms(settings: OracleSettings) -> OracleCheck:
    p = oracle_params(settings.tau_c, 10.0)
    ratio = secular_crossterm_magnitude(p, oracle_window(p))
    return OracleCheck.compare("secular_crossterms", ratio, 0.0, ratio, settings.crossterm_limit)


def check_commutators(settings: OracleSettings) -> OracleCheck:
    delta_omega = 2.0 * math.pi * 100.0
    worst = max(commutator_identity_check(delta_omega, t) for t in np.linspace(0.0, 1.0, 100))
    return OracleCheck.compare(
        "commutator_identity", worst, 0.0, worst, settings.commutator_tolerance
    )


def check_kramers_kronig(settings: OracleSettings) -> OracleCheck:
    error = kramers_kronig_check(settings.tau_c)
    return OracleCheck.compare(
        "kramers_kronig", error, 0.0, error, settings.kramers_kronig_tolerance
    )


def run_oracle_suite(settings: OracleSettings) -> List[OracleCheck]:
    """Run every oracle comparison; failures are reported, not raised."""
    runners: List[Callable[[], OracleCheck]] = [
        lambda: check_gamma_quadrature(settings),
        lambda: check_memory_kernel(settings),
        *[
            (lambda x=x: check_generator_rates(settings, x))
            for x in settings.generator_omega_tau
        ],
        lambda: check_increment_structure(settings),
        lambda: check_crossterms(settings),
        lambda: check_commutators(settings),
        lambda: check_kramers_kronig(settings),
    ]
    checks = []
    for run in runners:
        check = run()
        logger.info(
            "%s: deviation %.3g (tolerance %.3g) %s",
            check.name,
            check.deviation,
            check.tolerance,
            "ok" if check.passed else "FAILED",
        )
        checks.append(check)
    return checks
