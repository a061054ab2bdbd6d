"""Decay-rate and parabola regressions with 95% confidence intervals."""

import logging
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats
from scipy.optimize import curve_fit

from ..errors import FitError, InsufficientDataError, RankDeficiencyError
from ..sequence import DecaySeries

logger = logging.getLogger(__name__)

MIN_DECAY_POINTS = 5
CONFIDENCE = 0.95


class AsymptoteMode(str, Enum):
    SUBTRACT = "subtract"
    RAW_LOG = "raw-log"


class RateFit(BaseModel):
    """Straight-line fit of ln(M_z - a) against t."""

    model_config = ConfigDict(frozen=True)

    rate: float
    intercept: float
    residual_rms: float = Field(ge=0.0)
    ci95_halfwidth: float = Field(ge=0.0)
    asymptote: Optional[float] = None
    mode: AsymptoteMode = AsymptoteMode.SUBTRACT
    points: int


class ParabolaFit(BaseModel):
    """R_z = a1 + b1 omega1^2, with tau_c = b1 / curvature_factor."""

    model_config = ConfigDict(frozen=True)

    a1: float
    b1: float
    tau_c_estimate: float
    a1_ci95: float = Field(ge=0.0)
    b1_ci95: float = Field(ge=0.0)
    tau_c_ci95: float = Field(ge=0.0)
    curvature_factor: float = 1.0
    weighted: bool = False
    residuals: List[float]


def _t_quantile(dof: int) -> float:
    return float(stats.t.ppf(0.5 + CONFIDENCE / 2.0, dof))


def _exponential(t: np.ndarray, a: float, b: float, rate: float) -> np.ndarray:
    return a + b * np.exp(-rate * t)


def _fit_asymptote(t: np.ndarray, m: np.ndarray) -> float:
    """Asymptote a of a preliminary a + b exp(-R t) fit."""
    if np.all(m > 0.0):
        slope, intercept = np.polyfit(t, np.log(m), 1)
        guess = (0.0, float(np.exp(intercept)), max(-float(slope), 1e-12))
    else:
        span = float(t[-1] - t[0]) or 1.0
        guess = (float(m[-1]), float(m[0] - m[-1]), 1.0 / span)
    try:
        popt, _ = curve_fit(_exponential, t, m, p0=guess, maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"three-parameter exponential fit failed: {exc}") from exc
    return float(popt[0])


def fit_decay_arrays(
    t: Sequence[float],
    mz: Sequence[float],
    mode: AsymptoteMode = AsymptoteMode.SUBTRACT,
    asymptote: Optional[float] = None,
) -> RateFit:
    """Rate R of M_z = a + b exp(-R t) from a log-linear regression.

    In SUBTRACT mode the asymptote a is taken from ``asymptote`` when given,
    else from a preliminary three-parameter fit. RAW_LOG regresses ln M_z.
    """
    t = np.asarray(t, dtype=float)
    m = np.asarray(mz, dtype=float)
    if t.shape != m.shape:
        raise FitError("t and mz differ in length")
    if t.size < MIN_DECAY_POINTS:
        raise InsufficientDataError(f"need at least {MIN_DECAY_POINTS} points, got {t.size}")
    mode = AsymptoteMode(mode)

    a = None
    y = m
    if mode is AsymptoteMode.SUBTRACT:
        a = asymptote if asymptote is not None else _fit_asymptote(t, m)
        y = m - a
    if np.any(y <= 0.0):
        other = AsymptoteMode.RAW_LOG if mode is AsymptoteMode.SUBTRACT else AsymptoteMode.SUBTRACT
        raise FitError(
            f"non-positive values after asymptote handling in {mode.value} mode; "
            f"try asymptote mode '{other.value}'"
        )

    regression = stats.linregress(t, np.log(y))
    residuals = np.log(y) - (regression.intercept + regression.slope * t)
    halfwidth = _t_quantile(t.size - 2) * float(regression.stderr)
    logger.debug("decay fit (%s): rate %.6g +/- %.3g", mode.value, -regression.slope, halfwidth)
    return RateFit(
        rate=-float(regression.slope),
        intercept=float(regression.intercept),
        residual_rms=float(np.sqrt(np.mean(residuals**2))),
        ci95_halfwidth=halfwidth,
        asymptote=a,
        mode=mode,
        points=int(t.size),
    )


def fit_decay_rate(
    series: DecaySeries, asymptote_mode: AsymptoteMode = AsymptoteMode.SUBTRACT
) -> RateFit:
    return fit_decay_arrays(series.times, series.magnetization, asymptote_mode)


def fit_parabola(
    points: Sequence[Tuple[float, float]],
    curvature_factor: float = 1.0,
    sigma: Optional[Sequence[float]] = None,
) -> ParabolaFit:
    """Least squares in the basis {1, omega1^2}; omega1 in rad/s.

    ``curvature_factor`` converts b1 to tau_c; 1 reads b1 as tau_c directly.
    ``sigma`` gives relative per-point uncertainties for a weighted fit; the
    overall scale is still taken from the residuals.
    """
    if not curvature_factor > 0.0:
        raise FitError("curvature factor must be positive")
    data = np.asarray(points, dtype=float).reshape(-1, 2)
    omega1, rz = data[:, 0], data[:, 1]
    if np.unique(np.abs(omega1)).size < 3:
        raise RankDeficiencyError("need at least three distinct omega1 values")

    if sigma is None:
        weights = np.ones_like(rz)
    else:
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != rz.shape or np.any(~(sigma > 0.0)):
            raise FitError("sigma must be positive and match the points")
        weights = 1.0 / sigma

    x = omega1**2
    scale = float(np.max(x))
    design = np.column_stack([np.ones_like(x), x / scale])
    weighted = design * weights[:, None]
    if np.linalg.matrix_rank(weighted) < 2:
        raise RankDeficiencyError("design matrix is rank deficient")
    coef, _, _, _ = np.linalg.lstsq(weighted, rz * weights, rcond=None)
    residuals = rz - design @ coef

    dof = rz.size - 2
    scaled = residuals * weights
    variance = float(scaled @ scaled) / dof
    covariance = variance * np.linalg.inv(weighted.T @ weighted)
    t_value = _t_quantile(dof)
    a1_ci = t_value * float(np.sqrt(covariance[0, 0]))
    b1_ci = t_value * float(np.sqrt(covariance[1, 1])) / scale
    b1 = float(coef[1]) / scale
    return ParabolaFit(
        a1=float(coef[0]),
        b1=b1,
        tau_c_estimate=b1 / curvature_factor,
        a1_ci95=a1_ci,
        b1_ci95=b1_ci,
        tau_c_ci95=b1_ci / curvature_factor,
        curvature_factor=curvature_factor,
        weighted=sigma is not None,
        residuals=residuals.tolist(),
    )


def add_measurement_noise(
    series: DecaySeries, level: float, seed: Union[int, Sequence[int]]
) -> DecaySeries:
    """Gaussian noise of standard deviation ``level * M0`` on every M_z."""
    if level < 0.0:
        raise FitError("noise level must be non-negative")
    if level == 0.0:
        return series
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, level * series.M0, len(series.mz))
    return series.with_mz(series.magnetization + noise)
