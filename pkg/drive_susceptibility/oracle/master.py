"""Brute-force coarse-grained propagator of the driven spin-1/2.

In the interaction picture the linearly polarized drive reads

    H_S(t) = omega1 [F_x^C(t) + F_x^R(t)]
    F_x^C(t) = I_x cos(dw t) + I_y sin(dw t)
    F_x^R(t) = I_x cos(W t) - I_y sin(W t)

with dw = delta_omega and W = Omega. Over a window [t, t + dt] the density
matrix changes by a first-order commutator plus a double commutator
weighted by the memory kernel exp(-|t1 - t2| / tau_c). Both are evaluated
here by trapezoid quadrature on a uniform grid, with no secular filtering.

The oracle models the drive only (no spin-lattice coupling). The
second-order rates it reports are the finite-window rates of the
coarse-grained master equation; they vanish as the window shrinks.
"""

import logging
import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.integrate import trapezoid
from scipy.signal import lfilter

from ..errors import CoarseGrainingWindowError, ParameterError
from ..model import SpinSystemParams

logger = logging.getLogger(__name__)

IX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
IY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
IZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
SPIN_OPERATORS = {"x": IX, "y": IY, "z": IZ}

WINDOW_LIMIT = 0.05
MIN_QUAD_POINTS = 64
POINTS_PER_SCALE = 20


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


class DensityMatrix2(BaseModel):
    """Spin-1/2 density matrix; M_alpha = Tr(I_alpha rho)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @model_validator(mode="after")
    def _check_physical(self) -> "DensityMatrix2":
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError("density matrix must be 2x2")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValueError("density matrix trace differs from 1")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        return self

    @classmethod
    def from_bloch(cls, mx: float, my: float, mz: float) -> "DensityMatrix2":
        """1/2 + 2 (mx I_x + my I_y + mz I_z); physical for |M| <= 1/2."""
        rho = 0.5 * IDENTITY + 2.0 * (mx * IX + my * IY + mz * IZ)
        return cls(matrix=rho)

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(op @ self.matrix))

    def bloch(self) -> Tuple[float, float, float]:
        return tuple(self.expectation(SPIN_OPERATORS[a]).real for a in "xyz")


class CoarseGrainedIncrement(BaseModel):
    """Change of rho over one window, split by perturbation order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    first_order: np.ndarray
    second_order: np.ndarray
    delta_t: float

    @property
    def total(self) -> np.ndarray:
        return self.first_order + self.second_order

    def trace_error(self) -> float:
        return float(abs(np.trace(self.total)))

    def hermiticity_error(self) -> float:
        total = self.total
        return float(np.max(np.abs(total - total.conj().T)))

    def second_order_rate(self, op: np.ndarray) -> float:
        """d<op>/dt from the second-order increment."""
        return float(np.trace(op @ self.second_order).real) / self.delta_t


class GeneratorRates(BaseModel):
    model_config = ConfigDict(frozen=True)

    eta_x: float
    eta_y: float
    eta_z: float
    omega_bs: float
    delta_t: float


# (axis, trig function, sign) of the I_x and I_y terms of each drive component
_DRIVE_TERMS = {
    "co": (("x", "cos", 1.0), ("y", "sin", 1.0)),
    "counter": (("x", "cos", 1.0), ("y", "sin", -1.0)),
}


def _drive_functions(
    p: SpinSystemParams, grid: np.ndarray
) -> Dict[Tuple[str, str], np.ndarray]:
    """Coefficient functions h(t) of I_x and I_y for each drive component."""
    frequency = {"co": p.delta_omega, "counter": p.Omega}
    functions = {}
    for part, terms in _DRIVE_TERMS.items():
        for axis, trig, sign in terms:
            phase = frequency[part] * grid
            values = np.cos(phase) if trig == "cos" else np.sin(phase)
            functions[(part, axis)] = sign * p.omega1 * values
    return functions


def _check_grid(
    p: SpinSystemParams, delta_t: float, quad_points: int, check_window: bool
) -> None:
    if check_window:
        tau_ratio = p.tau_c / delta_t
        drive_ratio = p.omega1 * delta_t
        if tau_ratio >= WINDOW_LIMIT or drive_ratio >= WINDOW_LIMIT:
            raise CoarseGrainingWindowError(tau_ratio, drive_ratio, WINDOW_LIMIT)
    if quad_points < MIN_QUAD_POINTS:
        raise ParameterError(f"quad_points={quad_points} is below {MIN_QUAD_POINTS}")
    h = delta_t / (quad_points - 1)
    fastest = max(abs(p.Omega), abs(p.delta_omega))
    if fastest > 0.0 and h > 2.0 * math.pi / fastest / POINTS_PER_SCALE:
        raise ParameterError(
            f"{quad_points} points do not resolve 2*pi/Omega with "
            f"{POINTS_PER_SCALE} points per period"
        )
    if h > p.tau_c / POINTS_PER_SCALE:
        raise ParameterError(
            f"{quad_points} points do not resolve tau_c with {POINTS_PER_SCALE} points"
        )


def required_quad_points(
    p: SpinSystemParams, delta_t: float, per_scale: int = POINTS_PER_SCALE
) -> int:
    """Smallest grid that resolves tau_c and the fastest drive frequency."""
    fastest = max(abs(p.Omega), abs(p.delta_omega))
    intervals = delta_t / p.tau_c * per_scale
    if fastest > 0.0:
        intervals = max(intervals, delta_t * fastest / (2.0 * math.pi) * per_scale)
    return max(MIN_QUAD_POINTS, int(math.ceil(intervals)) + 1)


def _memory_filter(values: np.ndarray, h: float, tau_c: float) -> np.ndarray:
    """G(t1) = int_0^t1 g(t2) exp(-(t1 - t2)/tau_c) dt2 by the trapezoid rule.

    The running trapezoid sum obeys G_{k+1} = a G_k + h/2 (a g_k + g_{k+1})
    with a = exp(-h/tau_c), which is an IIR filter with G_0 = 0.
    """
    a = math.exp(-h / tau_c)
    b = [0.5 * h, 0.5 * h * a]
    out, _ = lfilter(b, [1.0, -a], values, zi=[-b[0] * values[0]])
    return out


def _kernel_integrals(
    functions: Dict[Tuple[str, str], np.ndarray], h: float, tau_c: float
) -> Dict[Tuple[Tuple[str, str], Tuple[str, str]], float]:
    """K[A, B] = int dt1 int_{t2<t1} h_A(t1) h_B(t2) exp(-(t1 - t2)/tau_c)."""
    filtered = {key: _memory_filter(values, h, tau_c) for key, values in functions.items()}
    integrals = {}
    for outer, values in functions.items():
        for inner, memory in filtered.items():
            integrals[(outer, inner)] = float(trapezoid(values * memory, dx=h))
    return integrals


def _double_commutator(
    integrals: Dict[Tuple[Tuple[str, str], Tuple[str, str]], float],
    rho: np.ndarray,
    include: Callable[[str, str], bool] = lambda outer, inner: True,
) -> np.ndarray:
    result = np.zeros((2, 2), dtype=complex)
    for (outer, inner), weight in integrals.items():
        if weight == 0.0 or not include(outer[0], inner[0]):
            continue
        a, b = SPIN_OPERATORS[outer[1]], SPIN_OPERATORS[inner[1]]
        result -= weight * commutator(a, commutator(b, rho))
    return result


def coarse_grained_step(
    rho: DensityMatrix2,
    p: SpinSystemParams,
    t: float,
    delta_t: float,
    quad_points: int,
    check_window: bool = True,
) -> CoarseGrainedIncrement:
    """First- and second-order change of ``rho`` over [t, t + delta_t]."""
    if not delta_t > 0.0:
        raise ParameterError("delta_t must be positive")
    _check_grid(p, delta_t, quad_points, check_window)
    grid = t + np.linspace(0.0, delta_t, quad_points)
    h = delta_t / (quad_points - 1)
    matrix = np.asarray(rho.matrix, dtype=complex)

    if p.omega1 == 0.0:
        zero = np.zeros((2, 2), dtype=complex)
        return CoarseGrainedIncrement(first_order=zero, second_order=zero.copy(), delta_t=delta_t)

    functions = _drive_functions(p, grid)
    first = np.zeros((2, 2), dtype=complex)
    for (_, axis), values in functions.items():
        first -= 1j * float(trapezoid(values, dx=h)) * commutator(SPIN_OPERATORS[axis], matrix)

    second = _double_commutator(_kernel_integrals(functions, h, p.tau_c), matrix)
    logger.debug("coarse-grained step over %.3g s on %d points", delta_t, quad_points)
    return CoarseGrainedIncrement(first_order=first, second_order=second, delta_t=delta_t)


def extract_generator_rates(
    p: SpinSystemParams,
    delta_t: float,
    points_per_scale: int = 50,
    check_window: bool = True,
) -> GeneratorRates:
    """Damping rates and Bloch-Siegert shift read off second-order increments.

    Starts from M along z, x and y in turn (|M| = 1/2) and divides the
    relative second-order change by delta_t. Requires delta_omega == 0.
    """
    if p.delta_omega != 0.0:
        raise ParameterError("generator extraction requires delta_omega == 0")
    points = required_quad_points(p, delta_t, points_per_scale)
    rates = {}
    for axis in "xyz":
        m = {a: (0.5 if a == axis else 0.0) for a in "xyz"}
        rho = DensityMatrix2.from_bloch(m["x"], m["y"], m["z"])
        step = coarse_grained_step(rho, p, 0.0, delta_t, points, check_window)
        rates[axis] = -step.second_order_rate(SPIN_OPERATORS[axis]) / 0.5
        if axis == "x":
            rates["bs"] = step.second_order_rate(IY) / 0.5
    return GeneratorRates(
        eta_x=rates["x"],
        eta_y=rates["y"],
        eta_z=rates["z"],
        omega_bs=rates["bs"],
        delta_t=delta_t,
    )


_MATRIX_BASIS = [np.array(m, dtype=complex) for m in np.eye(4).reshape(4, 2, 2)]


def _superoperator(
    integrals: Dict[Tuple[Tuple[str, str], Tuple[str, str]], float],
    include: Callable[[str, str], bool],
) -> np.ndarray:
    columns = [
        _double_commutator(integrals, basis, include).reshape(4) for basis in _MATRIX_BASIS
    ]
    return np.stack(columns, axis=1)


def secular_crossterm_magnitude(
    p: SpinSystemParams,
    delta_t: float,
    quad_points: Optional[int] = None,
    check_window: bool = True,
) -> float:
    """Largest co/counter cross-term entry over the largest self-term entry.

    Both are entries of the second-order superoperator acting on vec(rho).
    """
    if not delta_t > 0.0:
        raise ParameterError("delta_t must be positive")
    quad_points = quad_points or required_quad_points(p, delta_t)
    _check_grid(p, delta_t, quad_points, check_window)
    grid = np.linspace(0.0, delta_t, quad_points)
    h = delta_t / (quad_points - 1)
    integrals = _kernel_integrals(_drive_functions(p, grid), h, p.tau_c)

    cross = _superoperator(integrals, lambda outer, inner: outer != inner)
    own = _superoperator(integrals, lambda outer, inner: outer == inner)
    denominator = np.max(np.abs(own))
    if denominator == 0.0:
        raise ParameterError("self-term superoperator vanishes")
    return float(np.max(np.abs(cross)) / denominator)


def rotating_frame_operators(
    frequency: float, t: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """I_x, I_y, I_z rotated about z by frequency * t."""
    c, s = math.cos(frequency * t), math.sin(frequency * t)
    return (c * IX - s * IY, s * IX + c * IY, IZ.copy())


def _levi_civita(i: int, j: int, k: int) -> float:
    return float((i - j) * (j - k) * (k - i) / 2)


def commutator_identity_check(delta_omega: float, t: float) -> float:
    """max |[F_k, F_m] - i eps_kmp F_p| over all index pairs."""
    ops = rotating_frame_operators(delta_omega, t)
    worst = 0.0
    for k in range(3):
        for m in range(3):
            expected = sum(1j * _levi_civita(k, m, q) * ops[q] for q in range(3))
            deviation = np.max(np.abs(commutator(ops[k], ops[m]) - expected))
            worst = max(worst, float(deviation))
    return worst
