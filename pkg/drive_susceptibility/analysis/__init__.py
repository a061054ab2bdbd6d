"""Statistical extraction of decay rates and the correlation time."""

from .fit import (
    AsymptoteMode,
    ParabolaFit,
    RateFit,
    add_measurement_noise,
    fit_decay_arrays,
    fit_decay_rate,
    fit_parabola,
)

__all__ = [
    "AsymptoteMode",
    "ParabolaFit",
    "RateFit",
    "add_measurement_noise",
    "fit_decay_arrays",
    "fit_decay_rate",
    "fit_parabola",
]
