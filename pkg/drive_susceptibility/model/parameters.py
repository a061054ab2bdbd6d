"""Physical parameter records of the driven spin-1/2 model.

All frequencies are angular (rad/s) and all times are in seconds. Hz only
appears at the configuration boundary (see ``SpinSystemParams.from_hz``).
"""

import logging
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import ParameterError, TimescaleError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Gyromagnetic ratio of the proton, rad/s/T.
PROTON_GAMMA = 2.6752218744e8

# tau_c * omega1 thresholds of the timescale-separation check.
TIMESCALE_WARN = 0.01
TIMESCALE_LIMIT = 0.1


class SpinSystemParams(BaseModel):
    """All constants and rates of the driven spin-1/2 model.

    ``omega1`` is half the peak drive amplitude, i.e. the drive Hamiltonian is
    ``2 * omega1 * I_x * cos(omega_drive * t)``.
    """

    model_config = ConfigDict(frozen=True)

    omega0: float = Field(description="Larmor angular frequency, rad/s")
    omega1: float = Field(ge=0.0, description="Drive amplitude, rad/s")
    omega_drive: float = Field(description="Drive angular frequency, rad/s")
    tau_c: float = Field(gt=0.0, description="Bath correlation time, s")
    kappa: Optional[float] = Field(
        default=None, gt=0.0, description="Fluctuation strength, rad/s/sqrt(s)"
    )
    T1: float = Field(gt=0.0, description="Longitudinal relaxation time, s")
    T2: float = Field(gt=0.0, description="Transverse relaxation time, s")
    M0: float = Field(default=1.0, description="Equilibrium magnetization")
    gamma: float = Field(default=PROTON_GAMMA, description="Gyromagnetic ratio")

    @model_validator(mode="after")
    def _check_timescales(self) -> "SpinSystemParams":
        if self.kappa is not None and not math.isclose(
            self.tau_c, 2.0 / self.kappa**2, rel_tol=1e-12
        ):
            raise ParameterError(
                f"tau_c={self.tau_c:.6g} s is inconsistent with kappa "
                f"(2/kappa^2 = {2.0 / self.kappa**2:.6g} s)"
            )
        if self.gamma == 0.0:
            raise ParameterError("gamma must be nonzero")

        drive_ratio = self.tau_c * self.omega1
        if drive_ratio >= TIMESCALE_LIMIT:
            raise TimescaleError(
                f"tau_c*omega1 = {drive_ratio:.3g} >= {TIMESCALE_LIMIT}: "
                "second-order truncation is not valid"
            )
        if drive_ratio > TIMESCALE_WARN:
            logger.warning(
                "tau_c*omega1 = %.3g exceeds %.2g; second-order results degrade",
                drive_ratio,
                TIMESCALE_WARN,
            )
        if self.tau_c * abs(self.delta_omega) >= 1.0:
            raise TimescaleError(
                f"tau_c*|delta_omega| = {self.tau_c * abs(self.delta_omega):.3g} "
                "must be < 1"
            )
        return self

    @property
    def delta_omega(self) -> float:
        """Offset of the drive from resonance, omega_drive - omega0."""
        return self.omega_drive - self.omega0

    @property
    def Omega(self) -> float:
        """Counter-rotating frequency, omega_drive + omega0."""
        return self.omega_drive + self.omega0

    @property
    def kappa_derived(self) -> float:
        """kappa as given, else sqrt(2/tau_c)."""
        if self.kappa is not None:
            return self.kappa
        return math.sqrt(2.0 / self.tau_c)

    @property
    def R1(self) -> float:
        return 1.0 / self.T1

    @property
    def R2(self) -> float:
        return 1.0 / self.T2

    @classmethod
    def from_kappa(cls, kappa: float, **kwargs: float) -> "SpinSystemParams":
        """Build with tau_c = 2/kappa^2."""
        if kappa <= 0.0:
            raise ParameterError("kappa must be positive")
        return cls(kappa=kappa, tau_c=2.0 / kappa**2, **kwargs)

    @classmethod
    def on_resonance(
        cls,
        omega0: float,
        omega1: float,
        tau_c: float,
        T1: float,
        T2: float,
        **kwargs: float,
    ) -> "SpinSystemParams":
        """Drive exactly at the Larmor frequency (delta_omega = 0)."""
        return cls(
            omega0=omega0,
            omega1=omega1,
            omega_drive=omega0,
            tau_c=tau_c,
            T1=T1,
            T2=T2,
            **kwargs,
        )

    @classmethod
    def from_hz(
        cls,
        larmor_hz: float,
        nu1_hz: float,
        offset_hz: float,
        tau_c: float,
        T1: float,
        T2: float,
        **kwargs: float,
    ) -> "SpinSystemParams":
        """Convert Hz inputs to angular frequencies (exactly 2*pi)."""
        omega0 = TWO_PI * larmor_hz
        return cls(
            omega0=omega0,
            omega1=TWO_PI * nu1_hz,
            omega_drive=omega0 + TWO_PI * offset_hz,
            tau_c=tau_c,
            T1=T1,
            T2=T2,
            **kwargs,
        )

    def with_omega1(self, omega1: float) -> "SpinSystemParams":
        """Copy with a different drive amplitude."""
        return type(self)(**{**self.model_dump(), "omega1": omega1})

    def relaxation_free(self) -> "SpinSystemParams":
        """Copy with T1 and T2 switched off."""
        return type(self)(**{**self.model_dump(), "T1": math.inf, "T2": math.inf})
