"""Decay-rate and parabola regressions."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drive_susceptibility.analysis import (
    AsymptoteMode,
    add_measurement_noise,
    fit_decay_arrays,
    fit_decay_rate,
    fit_parabola,
)
from drive_susceptibility.errors import FitError, InsufficientDataError, RankDeficiencyError
from drive_susceptibility.model import TWO_PI
from drive_susceptibility.sequence import DecaySeries

T = np.linspace(0.0, 3.0, 30)


def _series(mz, period=0.1):
    n = tuple(range(1, len(mz) + 1))
    return DecaySeries(
        n=n,
        t=tuple(k * period for k in n),
        mz=tuple(mz),
        my_leakage=(0.0,) * len(mz),
        period=period,
    )


# --- decay rate ---


def test_known_asymptote_is_exact():
    fit = fit_decay_arrays(T, 2.0 + 3.0 * np.exp(-1.5 * T), AsymptoteMode.SUBTRACT, asymptote=2.0)
    assert fit.rate == pytest.approx(1.5, abs=1e-10)
    assert fit.asymptote == 2.0
    assert fit.residual_rms < 1e-10


def test_fitted_asymptote():
    fit = fit_decay_arrays(T, 0.1 + np.exp(-2.0 * T))
    assert fit.asymptote == pytest.approx(0.1, rel=1e-4)
    assert fit.rate == pytest.approx(2.0, rel=1e-4)
    assert fit.mode is AsymptoteMode.SUBTRACT


def test_raw_log_mode():
    fit = fit_decay_arrays(T, 0.8 * np.exp(-2.0 * T), AsymptoteMode.RAW_LOG)
    assert fit.rate == pytest.approx(2.0, abs=1e-10)
    assert fit.intercept == pytest.approx(np.log(0.8))
    assert fit.asymptote is None
    assert fit.points == T.size


def test_raw_log_is_biased_by_an_asymptote():
    mz = 0.2 + np.exp(-2.0 * T)
    assert fit_decay_arrays(T, mz, AsymptoteMode.RAW_LOG).rate < 1.5


def test_non_positive_values_suggest_other_mode():
    with pytest.raises(FitError, match="subtract"):
        fit_decay_arrays(T, -np.exp(-T), AsymptoteMode.RAW_LOG)
    with pytest.raises(FitError, match="raw-log"):
        fit_decay_arrays(T, np.exp(-T), AsymptoteMode.SUBTRACT, asymptote=2.0)


def test_too_few_points():
    with pytest.raises(InsufficientDataError):
        fit_decay_arrays(T[:4], np.exp(-T[:4]))


def test_mode_accepts_strings():
    assert fit_decay_arrays(T, np.exp(-T), "raw-log").mode is AsymptoteMode.RAW_LOG


def test_fit_decay_rate_uses_series_times():
    series = _series(np.exp(-0.7 * np.arange(1, 21) * 0.1))
    assert fit_decay_rate(series, AsymptoteMode.RAW_LOG).rate == pytest.approx(0.7, rel=1e-10)


def test_confidence_interval_covers_noisy_rate():
    rng = np.random.default_rng(1)
    mz = np.exp(-1.0 * T) * (1.0 + 0.01 * rng.normal(size=T.size))
    fit = fit_decay_arrays(T, mz, AsymptoteMode.RAW_LOG)
    assert fit.ci95_halfwidth > 0.0
    assert abs(fit.rate - 1.0) < 3.0 * fit.ci95_halfwidth


def test_confidence_interval_coverage_with_one_percent_noise():
    series = _series(np.exp(-0.2 * np.arange(1, 21) * 0.05), period=0.05)
    covered = 0
    for seed in range(1000):
        noisy = add_measurement_noise(series, 0.01, [seed])
        fit = fit_decay_rate(noisy, AsymptoteMode.RAW_LOG)
        covered += abs(fit.rate - 0.2) <= fit.ci95_halfwidth
    # 93% sits three binomial standard deviations below 95% at this count
    assert covered >= 930


@given(
    rate=st.floats(0.1, 10.0),
    offset=st.floats(0.0, 1.0),
    amplitude=st.floats(0.5, 2.0),
)
def test_rate_recovered_with_given_asymptote(rate, offset, amplitude):
    t = np.linspace(0.0, 1.0 / rate, 12)
    mz = offset + amplitude * np.exp(-rate * t)
    fit = fit_decay_arrays(t, mz, AsymptoteMode.SUBTRACT, asymptote=offset)
    assert fit.rate == pytest.approx(rate, rel=1e-8)


# --- parabola ---


def test_parabola_recovers_coefficients():
    omega1 = TWO_PI * np.arange(3e3, 20.5e3, 1e3)
    rz = 0.99 + 1.745 * 1.32e-11 * omega1**2
    fit = fit_parabola(list(zip(omega1, rz)), curvature_factor=1.745)
    assert fit.a1 == pytest.approx(0.99, rel=1e-9)
    assert fit.b1 == pytest.approx(1.745 * 1.32e-11, rel=1e-9)
    assert fit.tau_c_estimate == pytest.approx(1.32e-11, rel=1e-9)
    assert max(abs(r) for r in fit.residuals) < 1e-12
    assert not fit.weighted


@pytest.mark.parametrize("factor", [3.7, 0.25])
def test_parabola_is_scale_equivariant(factor):
    rng = np.random.default_rng(8)
    omega1 = TWO_PI * np.linspace(3e3, 20e3, 12)
    rz = 0.99 + 2.3e-11 * omega1**2 + 0.01 * rng.normal(size=omega1.size)
    base = fit_parabola(list(zip(omega1, rz)))
    scaled = fit_parabola(list(zip(omega1, factor * rz)))
    assert scaled.a1 == pytest.approx(factor * base.a1, rel=1e-9)
    assert scaled.b1 == pytest.approx(factor * base.b1, rel=1e-9)
    assert scaled.tau_c_ci95 == pytest.approx(factor * base.tau_c_ci95, rel=1e-9)


def test_constant_rates_have_no_curvature():
    omega1 = TWO_PI * np.linspace(3e3, 20e3, 18)
    fit = fit_parabola([(w, 0.99) for w in omega1])
    assert fit.a1 == pytest.approx(0.99, rel=1e-12)
    assert fit.b1 == pytest.approx(0.0, abs=1e-20)
    assert fit.tau_c_estimate == pytest.approx(0.0, abs=1e-20)


def test_parabola_needs_three_distinct_drives():
    with pytest.raises(RankDeficiencyError):
        fit_parabola([(1e4, 1.0), (1e4, 1.1), (2e4, 1.2), (-2e4, 1.3)])


def test_parabola_ci_shrinks_with_replication():
    rng = np.random.default_rng(4)
    omega1 = TWO_PI * np.linspace(3e3, 20e3, 10)
    omega1 = np.tile(omega1, 5)
    rz = 0.99 + 2.3e-11 * omega1**2 + 0.01 * rng.normal(size=omega1.size)
    small = fit_parabola(list(zip(omega1, rz)))
    large = fit_parabola(list(zip(np.tile(omega1, 4), np.tile(rz, 4))))
    # same residuals, four times the points: sqrt(48/198) with t quantiles
    assert large.b1 == pytest.approx(small.b1, rel=1e-9)
    assert large.tau_c_ci95 / small.tau_c_ci95 == pytest.approx(0.5, rel=0.1)
    assert large.a1_ci95 < small.a1_ci95


def test_weighted_parabola():
    omega1 = TWO_PI * np.linspace(3e3, 20e3, 8)
    rz = 0.99 + 2.3e-11 * omega1**2
    rz[-1] += 0.05
    sigma = np.ones_like(rz)
    sigma[-1] = 1e3
    weighted = fit_parabola(list(zip(omega1, rz)), sigma=sigma)
    plain = fit_parabola(list(zip(omega1, rz)))
    assert weighted.weighted
    assert abs(weighted.b1 - 2.3e-11) < abs(plain.b1 - 2.3e-11)
    with pytest.raises(FitError):
        fit_parabola(list(zip(omega1, rz)), sigma=np.zeros_like(rz))


def test_curvature_factor_must_be_positive():
    with pytest.raises(FitError):
        fit_parabola([(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)], curvature_factor=0.0)


# --- measurement noise ---


def test_noise_is_seeded():
    series = _series(np.exp(-np.arange(1, 11) * 0.1))
    first = add_measurement_noise(series, 0.01, [5, 2])
    again = add_measurement_noise(series, 0.01, [5, 2])
    other = add_measurement_noise(series, 0.01, [5, 3])
    assert first.mz == again.mz
    assert first.mz != other.mz
    assert first.n == series.n and first.t == series.t
    assert add_measurement_noise(series, 0.0, 0) is series
    with pytest.raises(FitError):
        add_measurement_noise(series, -0.1, 0)
