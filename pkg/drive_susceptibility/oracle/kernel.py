"""Monte-Carlo estimate of the bath memory kernel.

A lattice level acquires the random phase int f dt with f Gaussian white
noise of strength kappa. Averaging exp(-i phase) over trajectories must
reproduce exp(-kappa^2 tau / 2) = exp(-tau / tau_c).
"""

import logging
import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from ..errors import FitError, ParameterError

logger = logging.getLogger(__name__)

MIN_TRAJECTORIES = 100
STEPS_PER_LAG = 20


class FluctuationTrajectory(BaseModel):
    """White-noise samples f_k with variance kappa^2 / dt."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    seed: int
    dt: float
    samples: np.ndarray

    @classmethod
    def generate(
        cls, kappa: float, dt: float, n_steps: int, seed: int
    ) -> "FluctuationTrajectory":
        rng = np.random.default_rng(seed)
        samples = rng.normal(0.0, kappa / math.sqrt(dt), n_steps)
        return cls(seed=seed, dt=dt, samples=samples)

    def phase(self) -> np.ndarray:
        """Cumulative integral of f, starting at 0."""
        return np.concatenate(([0.0], np.cumsum(self.samples) * self.dt))


def expected_kernel(kappa: float, lags: np.ndarray, corrupt: bool = False) -> np.ndarray:
    """exp(-kappa^2 tau / 2); ``corrupt`` drops the 1/2 (negative control)."""
    factor = 1.0 if corrupt else 0.5
    return np.exp(-factor * kappa**2 * np.asarray(lags))


class KernelEstimate(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lags: np.ndarray
    kernel: np.ndarray
    standard_error: np.ndarray
    n_traj: int

    @field_validator("kernel")
    @classmethod
    def _bounded(cls, value: np.ndarray) -> np.ndarray:
        if np.any(np.abs(value) > 1.0 + 1e-12):
            raise ValueError("kernel modulus exceeds 1")
        return value

    def expected(self, kappa: float, corrupt: bool = False) -> np.ndarray:
        return expected_kernel(kappa, self.lags, corrupt)

    def deviation_in_standard_errors(self, kappa: float, corrupt: bool = False) -> np.ndarray:
        """| |K| - expected | / SE at every lag (0 where SE vanishes)."""
        diff = np.abs(np.abs(self.kernel) - self.expected(kappa, corrupt))
        se = self.standard_error
        return np.divide(diff, se, out=np.zeros_like(diff), where=se > 0.0)

    def decay_time(self) -> float:
        """1/e time from a log-linear fit over lags where |K| > 3 SE."""
        modulus = np.abs(self.kernel)
        usable = (modulus > 3.0 * self.standard_error) & (modulus > 0.0)
        if np.count_nonzero(usable) < 3:
            raise FitError("fewer than 3 resolvable kernel lags")
        slope = np.polyfit(self.lags[usable], np.log(modulus[usable]), 1)[0]
        if slope >= 0.0:
            raise FitError("kernel does not decay")
        return -1.0 / slope


def mc_memory_kernel(
    kappa: float,
    tau_grid: Sequence[float],
    n_traj: int,
    dt: float,
    seed: int = 0,
) -> KernelEstimate:
    """Average exp(-i int_0^tau f dt) over ``n_traj`` seeded trajectories.

    Lags are rounded to the dt grid; the returned lags are the realized ones.
    """
    lags = np.asarray(tau_grid, dtype=float)
    if lags.size == 0:
        raise ParameterError("tau_grid is empty")
    if np.any(lags < 0.0):
        raise ParameterError("lags must be non-negative")
    positive = lags[lags > 0.0]
    if not kappa > 0.0:
        raise ParameterError("kappa must be positive")
    if n_traj < MIN_TRAJECTORIES:
        raise ParameterError(f"n_traj={n_traj} is below {MIN_TRAJECTORIES}")
    if positive.size and dt > positive.min() / STEPS_PER_LAG * (1.0 + 1e-12):
        raise ParameterError(
            f"dt={dt:.3g} s must not exceed min(lag)/{STEPS_PER_LAG} "
            f"= {positive.min() / STEPS_PER_LAG:.3g} s"
        )

    index = np.rint(lags / dt).astype(int)
    n_steps = int(index.max())
    phases = np.empty((n_traj, index.size))
    for i in range(n_traj):
        trajectory = FluctuationTrajectory.generate(kappa, dt, n_steps, seed + i)
        phases[i] = trajectory.phase()[index]

    factors = np.exp(-1j * phases)
    kernel = factors.mean(axis=0)
    spread = factors.real.var(axis=0, ddof=1) + factors.imag.var(axis=0, ddof=1)
    logger.info("memory kernel from %d trajectories, %d steps each", n_traj, n_steps)
    return KernelEstimate(
        lags=index * dt,
        kernel=kernel,
        standard_error=np.sqrt(spread / n_traj),
        n_traj=n_traj,
    )
