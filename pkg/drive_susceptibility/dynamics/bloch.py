"""Modified Bloch equations with second-order drive terms.

State vectors are ordered (mx, my, mz) in the frame co-rotating with the
drive. Drive programs are piecewise constant; the shift and damping
coefficients are recomputed for every segment from its |amplitude| and
offset, and vanish exactly for free-evolution segments.
"""

import logging
import math
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.signal import find_peaks

from ..errors import InsufficientDataError, ParameterError, StepSizeError
from ..model import DriveCoefficients, SpinSystemParams, coefficients_for

logger = logging.getLogger(__name__)

# Largest rotation angle per step, rad.
MAX_STEP_ANGLE = 0.05
# Smallest number of steps per segment.
MIN_STEPS_PER_SEGMENT = 10
MIN_NUTATION_PERIODS = 8


class MagnetizationState(BaseModel):
    """Magnetization in the co-rotating frame at elapsed time ``t``."""

    model_config = ConfigDict(frozen=True)

    mx: float
    my: float
    mz: float
    t: float = 0.0

    @field_validator("mx", "my", "mz", "t")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("magnetization components must be finite")
        return value

    @classmethod
    def equilibrium(cls, p: SpinSystemParams) -> "MagnetizationState":
        return cls(mx=0.0, my=0.0, mz=p.M0)

    @classmethod
    def from_array(cls, v: Sequence[float], t: float = 0.0) -> "MagnetizationState":
        return cls(mx=float(v[0]), my=float(v[1]), mz=float(v[2]), t=t)

    def as_array(self) -> np.ndarray:
        return np.array([self.mx, self.my, self.mz])

    def norm(self) -> float:
        return math.sqrt(self.mx**2 + self.my**2 + self.mz**2)


class DriveSegment(BaseModel):
    """Constant drive: signed amplitude (sign selects +x or -x phase)."""

    model_config = ConfigDict(frozen=True)

    amplitude: float
    duration: float = Field(ge=0.0)
    offset: float = 0.0


class DriveProgram(BaseModel):
    """Ordered list of constant-drive segments."""

    model_config = ConfigDict(frozen=True)

    segments: Tuple[DriveSegment, ...] = ()

    @property
    def total_duration(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    @property
    def max_amplitude(self) -> float:
        return max((abs(s.amplitude) for s in self.segments), default=0.0)

    def concatenate(self, other: "DriveProgram") -> "DriveProgram":
        return DriveProgram(segments=self.segments + other.segments)

    def repeat(self, n: int) -> "DriveProgram":
        if n < 0:
            raise ParameterError("repeat count must be non-negative")
        return DriveProgram(segments=self.segments * n)

    @classmethod
    def constant(
        cls, amplitude: float, duration: float, offset: float = 0.0
    ) -> "DriveProgram":
        return cls(
            segments=(DriveSegment(amplitude=amplitude, duration=duration, offset=offset),)
        )


class NutationMetrics(BaseModel):
    """Frequency and damping of a continuous-wave nutation."""

    model_config = ConfigDict(frozen=True)

    nutation_frequency: float
    damping_rate: float
    fit_residual: float
    periods_observed: float


class Trajectory:
    """Sampled magnetization history; rows are (t, mx, my, mz)."""

    def __init__(self, times: np.ndarray, states: np.ndarray):
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states, dtype=float).reshape(-1, 3)

    def __len__(self) -> int:
        return self.times.shape[0]

    def __getitem__(self, index: int) -> MagnetizationState:
        return MagnetizationState.from_array(self.states[index], float(self.times[index]))

    def __iter__(self) -> Iterator[MagnetizationState]:
        for i in range(len(self)):
            yield self[i]

    @property
    def final(self) -> MagnetizationState:
        return self[-1]

    def component(self, name: str) -> np.ndarray:
        return self.states[:, "xyz".index(name[-1])]

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return [
            (float(t), float(v[0]), float(v[1]), float(v[2]))
            for t, v in zip(self.times, self.states)
        ]


def segment_coefficients(
    p: SpinSystemParams, amplitude: float, offset: float
) -> DriveCoefficients:
    """Coefficients for a segment: omega1 = |amplitude|, Omega = 2 omega0 + offset."""
    return coefficients_for(abs(amplitude), offset, 2.0 * p.omega0 + offset, p.tau_c)


def _bloch_rhs(
    v: np.ndarray,
    p: SpinSystemParams,
    c: DriveCoefficients,
    amplitude: float,
    offset: float,
) -> np.ndarray:
    mx, my, mz = v
    dmz = amplitude * my - (mz - p.M0) * p.R1 - c.eta_z * mz
    dmx = (offset - c.omega_bs) * my - mx * p.R2 - c.eta_x * mx
    dmy = (
        -(offset - c.omega_bs - c.delta_omega_shift) * mx
        - amplitude * mz
        - my * p.R2
        - c.eta_y * my
    )
    return np.array([dmx, dmy, dmz])


def bloch_derivative(
    s: MagnetizationState,
    p: SpinSystemParams,
    c: DriveCoefficients,
    segment_amplitude: float,
    segment_offset: float,
) -> np.ndarray:
    """d/dt (mx, my, mz) of the modified Bloch equations."""
    return _bloch_rhs(s.as_array(), p, c, segment_amplitude, segment_offset)


def bloch_matrix(
    p: SpinSystemParams, c: DriveCoefficients, amplitude: float, offset: float
) -> Tuple[np.ndarray, np.ndarray]:
    """(A, b) with dM/dt = A M + b for one constant segment."""
    A = np.array(
        [
            [-(p.R2 + c.eta_x), offset - c.omega_bs, 0.0],
            [-(offset - c.omega_bs - c.delta_omega_shift), -(p.R2 + c.eta_y), -amplitude],
            [0.0, amplitude, -(p.R1 + c.eta_z)],
        ]
    )
    b = np.array([0.0, 0.0, p.M0 * p.R1])
    return A, b


def steady_state(p: SpinSystemParams, amplitude: float, offset: float = 0.0) -> np.ndarray:
    """Fixed point of the Bloch equations under a constant drive.

    eta_z pulls M_z towards zero while T1 restores it towards M0, so the
    steady state differs from the drive-free one even for weak drives.
    """
    c = segment_coefficients(p, amplitude, offset)
    A, b = bloch_matrix(p, c, amplitude, offset)
    return np.linalg.solve(A, -b)


def rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of an autonomous system."""
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def rk4_affine_step(f: Callable[[np.ndarray], np.ndarray], h: float) -> np.ndarray:
    """RK4 step of an affine right-hand side as a 4x4 augmented matrix.

    For f(y) = A y + b the RK4 update is itself affine, y -> P y + q; P and q
    are read off by stepping the zero vector and the unit vectors.
    """
    q = rk4_step(f, np.zeros(3), h)
    aug = np.eye(4)
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        aug[:3, j] = rk4_step(f, e, h) - q
    aug[:3, 3] = q
    return aug


def _substeps(duration: float, step: float) -> Tuple[int, float]:
    """Full steps and the shortened last step that land on ``duration``."""
    n = max(1, int(math.ceil(duration / step - 1e-9)))
    last = duration - (n - 1) * step
    return n, last


def check_step(program: DriveProgram, step: float) -> None:
    """Raise StepSizeError when ``step`` violates either integrator bound."""
    if step <= 0.0:
        raise StepSizeError("integrator step must be positive", bound="step > 0")
    durations = [s.duration for s in program.segments if s.duration > 0.0]
    if durations and step > min(durations) / MIN_STEPS_PER_SEGMENT:
        raise StepSizeError(
            f"step {step:.3g} s exceeds min(segment durations)/"
            f"{MIN_STEPS_PER_SEGMENT} = {min(durations) / MIN_STEPS_PER_SEGMENT:.3g} s",
            bound="step <= min(segment durations)/10",
        )
    angle = step * program.max_amplitude
    if angle > MAX_STEP_ANGLE * (1.0 + 1e-12):
        raise StepSizeError(
            f"step*omega1 = {angle:.3g} rad exceeds {MAX_STEP_ANGLE} rad",
            bound="step*omega1 <= 0.05 rad",
        )


class _SegmentStepper:
    """RK4 step maps of one segment (full step and shortened last step)."""

    def __init__(self, p: SpinSystemParams, segment: DriveSegment, step: float):
        c = segment_coefficients(p, segment.amplitude, segment.offset)

        def rhs(v: np.ndarray) -> np.ndarray:
            return _bloch_rhs(v, p, c, segment.amplitude, segment.offset)

        self.n_steps, self.last = _substeps(segment.duration, step)
        self.full = rk4_affine_step(rhs, step)
        self.tail = self.full if self.last == step else rk4_affine_step(rhs, self.last)

    def composed(self) -> np.ndarray:
        return self.tail @ np.linalg.matrix_power(self.full, self.n_steps - 1)


def program_map(program: DriveProgram, p: SpinSystemParams, step: float) -> np.ndarray:
    """4x4 augmented affine map of the RK4 propagation through ``program``."""
    check_step(program, step)
    total = np.eye(4)
    for segment in program.segments:
        if segment.duration == 0.0:
            continue
        total = _SegmentStepper(p, segment, step).composed() @ total
    return total


def apply_map(aug: np.ndarray, v: np.ndarray) -> np.ndarray:
    return aug[:3, :3] @ v + aug[:3, 3]


def integrate(
    s0: MagnetizationState,
    program: DriveProgram,
    p: SpinSystemParams,
    step: float,
    stride: Optional[int] = None,
) -> Trajectory:
    """Fixed-step RK4 propagation of ``s0`` through ``program``.

    Samples are taken at the start, at every segment boundary and, when
    ``stride`` is given, at every ``stride``-th interior step.
    """
    check_step(program, step)
    if stride is not None and stride < 1:
        raise ParameterError("stride must be >= 1")

    v = s0.as_array()
    t0 = s0.t
    elapsed = 0.0
    times = [t0]
    states = [v.copy()]
    for index, segment in enumerate(program.segments):
        if segment.duration == 0.0:
            continue
        stepper = _SegmentStepper(p, segment, step)
        P, q = stepper.full[:3, :3], stepper.full[:3, 3]
        for k in range(1, stepper.n_steps):
            v = P @ v + q
            if stride is not None and k % stride == 0:
                times.append(t0 + elapsed + k * step)
                states.append(v.copy())
        v = apply_map(stepper.tail, v)
        elapsed = math.fsum([elapsed, segment.duration])
        times.append(t0 + elapsed)
        states.append(v.copy())
        logger.debug("segment %d done at t=%.6g s", index, t0 + elapsed)
    return Trajectory(np.array(times), np.array(states))


def _zero_crossings(t: np.ndarray, d: np.ndarray) -> np.ndarray:
    sign = np.signbit(d)
    idx = np.nonzero(sign[:-1] != sign[1:])[0]
    d0, d1 = d[idx], d[idx + 1]
    return t[idx] - d0 * (t[idx + 1] - t[idx]) / (d1 - d0)


def simulate_cw_nutation(
    p: SpinSystemParams, duration: float, step: float
) -> NutationMetrics:
    """Nutation frequency and damping of an on-resonance constant drive."""
    if p.delta_omega != 0.0:
        raise ParameterError("CW nutation analysis requires delta_omega == 0")
    if not (p.omega1 > p.R1 and p.omega1 > p.R2):
        raise ParameterError("CW nutation analysis requires omega1 > 1/T1, 1/T2")

    program = DriveProgram.constant(p.omega1, duration)
    trajectory = integrate(MagnetizationState.equilibrium(p), program, p, step, stride=1)
    t = trajectory.times
    d = trajectory.component("mz") - steady_state(p, p.omega1)[2]

    crossings = _zero_crossings(t, d)
    periods = max(0.0, (crossings.shape[0] - 1) / 2.0)
    if periods < MIN_NUTATION_PERIODS:
        raise InsufficientDataError(
            f"only {periods:.1f} nutation periods observed, need {MIN_NUTATION_PERIODS}"
        )
    half_period = np.polyfit(np.arange(crossings.shape[0]), crossings, 1)[0]
    frequency = math.pi / half_period

    magnitude = np.abs(d)
    floor = 1e-9 * magnitude.max()
    peaks = np.union1d(find_peaks(d)[0], find_peaks(-d)[0])
    peaks = peaks[magnitude[peaks] > floor]
    if peaks.shape[0] < 2 * MIN_NUTATION_PERIODS:
        raise InsufficientDataError(f"only {peaks.shape[0]} usable extrema")
    slope, intercept = np.polyfit(t[peaks], np.log(magnitude[peaks]), 1)
    residual = np.log(magnitude[peaks]) - (slope * t[peaks] + intercept)

    logger.info(
        "CW nutation: %.1f periods, frequency %.6g rad/s, damping %.6g 1/s",
        periods,
        frequency,
        -slope,
    )
    return NutationMetrics(
        nutation_frequency=frequency,
        damping_rate=-slope,
        fit_residual=float(np.sqrt(np.mean(residual**2))),
        periods_observed=periods,
    )
