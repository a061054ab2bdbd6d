"""Second-order drive susceptibilities of a spin-1/2 in a fluctuating bath.

Closed-form coefficients live in :mod:`drive_susceptibility.model`, Bloch
propagation in :mod:`drive_susceptibility.dynamics`, pulse sequences and
refocused nutation in :mod:`drive_susceptibility.sequence`, brute-force
cross-checks in :mod:`drive_susceptibility.oracle` and the regressions in
:mod:`drive_susceptibility.analysis`.
"""

from .errors import DriveSusceptibilityError
from .model import SpinSystemParams, compute_coefficients

__version__ = "0.1.0"

__all__ = ["DriveSusceptibilityError", "SpinSystemParams", "compute_coefficients", "__version__"]
