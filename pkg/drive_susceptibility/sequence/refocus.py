"""Refocused nutation over a drive-inhomogeneous ensemble."""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..dynamics import (
    DriveProgram,
    MagnetizationState,
    integrate,
    program_map,
    steady_state,
)
from ..errors import ParameterError
from ..model import SpinSystemParams
from .pulses import (
    InhomogeneitySpec,
    Supercycle,
    SupercycleEntry,
    build_r2,
    build_r3,
    expand_to_program,
)

logger = logging.getLogger(__name__)


class DecaySeries(BaseModel):
    """Weighted ensemble M_z (and M_y leakage) after n supercycles."""

    model_config = ConfigDict(frozen=True)

    n: Tuple[int, ...]
    t: Tuple[float, ...]
    mz: Tuple[float, ...]
    my_leakage: Tuple[float, ...]
    period: float
    params: Optional[SpinSystemParams] = None

    @model_validator(mode="after")
    def _check_rows(self) -> "DecaySeries":
        size = len(self.n)
        if not (len(self.t) == len(self.mz) == len(self.my_leakage) == size):
            raise ValueError("n, t, mz and my_leakage must have equal length")
        if any(b <= a for a, b in zip(self.n, self.n[1:])):
            raise ValueError("n must be strictly increasing")
        for n, t in zip(self.n, self.t):
            if not math.isclose(t, n * self.period, rel_tol=1e-9, abs_tol=1e-15):
                raise ValueError(f"t={t!r} does not equal n*period for n={n}")
        return self

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.t)

    @property
    def magnetization(self) -> np.ndarray:
        return np.asarray(self.mz)

    @property
    def M0(self) -> float:
        return self.params.M0 if self.params is not None else 1.0

    def with_mz(self, mz: Sequence[float]) -> "DecaySeries":
        return self.model_copy(update={"mz": tuple(float(v) for v in mz)})

    def rows(self) -> List[Tuple[int, float, float, float]]:
        return list(zip(self.n, self.t, self.mz, self.my_leakage))


class CwEnsembleResult(BaseModel):
    """Unrefocused constant-drive response of the ensemble."""

    model_config = ConfigDict(frozen=True)

    times: Tuple[float, ...]
    mz: Tuple[float, ...]
    envelope: Tuple[float, ...]

    @property
    def envelope_decay_rate(self) -> float:
        """-ln(envelope(T) / envelope(0)) / T."""
        return -math.log(self.envelope[-1] / self.envelope[0]) / self.times[-1]


def simulate_refocused_nutation(
    p: SpinSystemParams,
    sc: Supercycle,
    inh: InhomogeneitySpec,
    n_values: Sequence[int],
    step: float,
) -> DecaySeries:
    """Apply the supercycle repeatedly and sample after each n in ``n_values``.

    Each ensemble member's supercycle is collapsed into one affine map, so
    the cost is independent of how many times it is applied.
    """
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise ParameterError("n_values is empty")
    if n_values[0] < 1 or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ParameterError("n_values must be positive and strictly increasing")

    maps = np.stack(
        [
            program_map(expand_to_program(sc, p.omega1, s, p.delta_omega), p, step)
            for s in inh.scales
        ]
    )
    P, q = maps[:, :3, :3], maps[:, :3, 3]
    weights = inh.weights
    v = np.tile([0.0, 0.0, p.M0], (len(weights), 1))

    wanted = set(n_values)
    mz, my = [], []
    for n in range(1, n_values[-1] + 1):
        v = np.einsum("mij,mj->mi", P, v) + q
        if n in wanted:
            mz.append(float(np.dot(weights, v[:, 2])))
            my.append(float(np.dot(weights, v[:, 1])))

    period = sc.period(p.omega1)
    logger.info(
        "refocused nutation: omega1=%.6g rad/s, %d members, n up to %d",
        p.omega1,
        len(weights),
        n_values[-1],
    )
    return DecaySeries(
        n=tuple(n_values),
        t=tuple(n * period for n in n_values),
        mz=tuple(mz),
        my_leakage=tuple(my),
        period=period,
        params=p,
    )


def simulate_cw_ensemble(
    p: SpinSystemParams,
    inh: InhomogeneitySpec,
    duration: float,
    step: float,
    samples: int = 200,
) -> CwEnsembleResult:
    """Constant on-resonance drive without refocusing, for comparison.

    The envelope is the modulus of the weighted sum of each member's
    (M_z - i M_y) about its own steady state.
    """
    if samples < 2:
        raise ParameterError("need at least two samples")
    stride = max(1, int(round(duration / step / samples)))
    weights = inh.weights
    mz_sum = None
    phasor = None
    times = None
    for scale, weight in zip(inh.scales, weights):
        amplitude = p.omega1 * scale
        trajectory = integrate(
            MagnetizationState.equilibrium(p),
            DriveProgram.constant(amplitude, duration),
            p,
            step,
            stride=stride,
        )
        fixed = steady_state(p, amplitude)
        mz = trajectory.component("mz")
        member = (mz - fixed[2]) - 1j * (trajectory.component("my") - fixed[1])
        if mz_sum is None:
            times, mz_sum, phasor = trajectory.times, weight * mz, weight * member
        else:
            mz_sum = mz_sum + weight * mz
            phasor = phasor + weight * member
    return CwEnsembleResult(
        times=tuple(times.tolist()),
        mz=tuple(mz_sum.tolist()),
        envelope=tuple(np.abs(phasor).tolist()),
    )


def leakage_ratio(p: SpinSystemParams) -> float:
    """-tanh[pi (1/T1 + 1/T2 + 7 omega1^2 tau_c / 2) / (2 omega1)]."""
    if not p.omega1 > 0.0:
        raise ParameterError("leakage ratio needs omega1 > 0")
    rates = p.R1 + p.R2 + 3.5 * p.omega1**2 * p.tau_c
    return -math.tanh(math.pi * rates / (2.0 * p.omega1))


def simulated_leakage_ratio(p: SpinSystemParams, step: float) -> float:
    """M_y after one R3 over M_y after two R2 blocks, both lasting 4 pi/omega1."""
    if not p.omega1 > 0.0:
        raise ParameterError("leakage ratio needs omega1 > 0")
    r3 = Supercycle(entries=(SupercycleEntry(block=build_r3()),))
    r2 = build_r2()
    r2r2 = Supercycle(entries=(SupercycleEntry(block=r2), SupercycleEntry(block=r2)))
    start = MagnetizationState.equilibrium(p)
    my = []
    for sc in (r3, r2r2):
        program = expand_to_program(sc, p.omega1, offset=p.delta_omega)
        trajectory = integrate(start, program, p, step)
        my.append(trajectory.final.my)
    return my[0] / my[1]


def n_sweep(
    start: int,
    stop: int,
    step: int,
    period: float,
    max_drive_time: Optional[float] = None,
) -> List[int]:
    """n = start, start+step, ... <= stop, dropping n with n*period > max_drive_time."""
    if start < 1 or step < 1 or stop < start:
        raise ParameterError(f"invalid n sweep {start}:{stop}:{step}")
    values = list(range(start, stop + 1, step))
    if max_drive_time is not None:
        limit = max_drive_time * (1.0 + 1e-12)
        values = [n for n in values if n * period <= limit]
        if not values:
            raise ParameterError(
                f"no n fits the {max_drive_time:g} s drive-time guard "
                f"(period {period:.6g} s)"
            )
    return values
