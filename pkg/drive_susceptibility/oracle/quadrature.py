"""Numerical Gamma(Omega) and its Kramers-Kronig consistency."""

import math

import numpy as np
from scipy.integrate import quad

from ..errors import ParameterError
from ..model import ComplexLorentzian, compute_gamma, kramers_kronig_dispersive

# Upper limit of the dimensionless integral, in units of tau_c.
TRUNCATION = 40.0


def gamma_quadrature(Omega: float, tau_c: float) -> ComplexLorentzian:
    """int_0^40tc exp(i Omega tau) exp(-tau/tc) dtau with QAWO weights."""
    if not tau_c > 0.0:
        raise ParameterError(f"tau_c must be positive, got {tau_c!r}")
    x = Omega * tau_c

    def decay(u: float) -> float:
        return math.exp(-u)

    options = dict(epsabs=1e-15, epsrel=1e-10, limit=500)
    absorptive, _ = quad(decay, 0.0, TRUNCATION, weight="cos", wvar=x, **options)
    if x == 0.0:
        dispersive = 0.0
    else:
        dispersive, _ = quad(decay, 0.0, TRUNCATION, weight="sin", wvar=x, **options)
    return ComplexLorentzian(absorptive=tau_c * absorptive, dispersive=tau_c * dispersive)


def kramers_kronig_check(
    tau_c: float,
    half_width: float = 1000.0,
    spacing: float = 0.05,
    window: float = 50.0,
    floor: float = 0.1,
) -> float:
    """Largest relative error of the Hilbert-transformed absorptive part.

    The Lorentzian is sampled on Omega*tau_c in [-half_width, half_width];
    errors are measured where floor <= |Omega*tau_c| <= window.
    """
    if window >= half_width:
        raise ParameterError("comparison window must lie inside the sampled grid")
    points = 2 * int(round(half_width / spacing)) + 1
    x = np.linspace(-half_width, half_width, points)
    absorptive = tau_c / (1.0 + x * x)
    estimate = kramers_kronig_dispersive(absorptive)
    exact = np.array([compute_gamma(xi / tau_c, tau_c).dispersive for xi in x])
    mask = (np.abs(x) >= floor) & (np.abs(x) <= window)
    return float(np.max(np.abs(estimate[mask] - exact[mask]) / np.abs(exact[mask])))
