"""Experiment manifests: dotenv files with ``SECTION__KEY=value`` entries.

Example::

    SPIN__LARMOR_HZ=500e6
    SPIN__NU1_HZ=20000
    SEQUENCE__TEXT="R3 ~R3 ~R3 R3 ~R3 R3 R3 ~R3"
    SWEEP__GUARD=true

Keys are case-insensitive. Every section rejects unknown keys, so a typo
fails validation instead of silently falling back to a default.
"""

import hashlib
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .analysis import AsymptoteMode
from .errors import ParameterError
from .model import PROTON_GAMMA, SpinSystemParams
from .oracle import OracleSettings
from .sequence import (
    InhomogeneitySpec,
    Supercycle,
    load_sequence,
    n_sweep,
    parse_sequence,
)

logger = logging.getLogger(__name__)

DEFAULT_SEQUENCE = "R3 ~R3 ~R3 R3 ~R3 R3 R3 ~R3"


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SpinSection(_Section):
    larmor_hz: float = 500e6
    nu1_hz: float = Field(default=10e3, ge=0.0)
    offset_hz: float = 0.0
    tau_c: float = Field(default=1.32e-11, gt=0.0)
    t1: float = Field(default=1.34, gt=0.0)
    t2: float = Field(default=0.81, gt=0.0)
    m0: float = 1.0
    gamma: float = PROTON_GAMMA


class SequenceSection(_Section):
    text: str = DEFAULT_SEQUENCE
    file: Optional[Path] = None


class InhomogeneityKind(str, Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    NONE = "none"


class InhomogeneitySection(_Section):
    kind: InhomogeneityKind = InhomogeneityKind.GAUSSIAN
    width: float = Field(default=0.02, ge=0.0, lt=1.0)
    points: int = Field(default=7, ge=1)


class SweepSection(_Section):
    nu1_start_hz: float = Field(default=3000.0, gt=0.0)
    nu1_stop_hz: float = Field(default=20000.0, gt=0.0)
    nu1_step_hz: float = Field(default=1000.0, gt=0.0)
    n_start: int = Field(default=1, ge=1)
    n_stop: int = Field(default=121, ge=1)
    n_step: int = Field(default=5, ge=1)
    max_drive_time: float = Field(default=0.5, gt=0.0)
    guard: bool = True

    @model_validator(mode="after")
    def _ordered(self) -> "SweepSection":
        if self.nu1_stop_hz < self.nu1_start_hz:
            raise ValueError("nu1_stop_hz must not be below nu1_start_hz")
        if self.n_stop < self.n_start:
            raise ValueError("n_stop must not be below n_start")
        return self


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunSection(_Section):
    step_angle: float = Field(
        default=0.02, gt=0.0, le=0.05, description="Integrator step times omega1, rad"
    )
    nutation_duration: float = Field(default=2e-3, gt=0.0)
    seed: int = 0
    noise_level: float = Field(default=0.0, ge=0.0)
    asymptote_mode: AsymptoteMode = AsymptoteMode.SUBTRACT
    workers: int = Field(default=1, ge=1)
    out_dir: Path = Path("results")
    format: OutputFormat = OutputFormat.JSON


class ExperimentConfig(_Section):
    spin: SpinSection = SpinSection()
    sequence: SequenceSection = SequenceSection()
    inhomogeneity: InhomogeneitySection = InhomogeneitySection()
    sweep: SweepSection = SweepSection()
    run: RunSection = RunSection()
    oracle: OracleSettings = OracleSettings()

    @model_validator(mode="after")
    def _check_model(self) -> "ExperimentConfig":
        # surfaces timescale and parameter errors at load time
        self.spin_params()
        for nu1 in (self.sweep.nu1_start_hz, self.sweep.nu1_stop_hz):
            self.spin_params(nu1)
        return self

    def spin_params(self, nu1_hz: Optional[float] = None) -> SpinSystemParams:
        """Physical parameters in rad/s; ``nu1_hz`` overrides SPIN__NU1_HZ."""
        spin = self.spin
        return SpinSystemParams.from_hz(
            larmor_hz=spin.larmor_hz,
            nu1_hz=spin.nu1_hz if nu1_hz is None else nu1_hz,
            offset_hz=spin.offset_hz,
            tau_c=spin.tau_c,
            T1=spin.t1,
            T2=spin.t2,
            M0=spin.m0,
            gamma=spin.gamma,
        )

    def supercycle(self) -> Supercycle:
        if self.sequence.file is not None:
            return load_sequence(self.sequence.file)
        return parse_sequence(self.sequence.text)

    def inhomogeneity_spec(self) -> InhomogeneitySpec:
        inh = self.inhomogeneity
        if inh.kind is InhomogeneityKind.GAUSSIAN:
            return InhomogeneitySpec.gaussian(inh.width, inh.points)
        if inh.kind is InhomogeneityKind.UNIFORM:
            return InhomogeneitySpec.uniform(inh.width, inh.points)
        return InhomogeneitySpec.homogeneous()

    def nu1_values(self) -> list:
        sweep = self.sweep
        count = int(round((sweep.nu1_stop_hz - sweep.nu1_start_hz) / sweep.nu1_step_hz)) + 1
        return [sweep.nu1_start_hz + i * sweep.nu1_step_hz for i in range(count)]

    def n_values(self, period: float) -> list:
        sweep = self.sweep
        return n_sweep(
            sweep.n_start,
            sweep.n_stop,
            sweep.n_step,
            period,
            sweep.max_drive_time if sweep.guard else None,
        )

    def integrator_step(self, omega1: float, max_scale: float = 1.0) -> float:
        if not omega1 > 0.0:
            raise ParameterError("integrator step needs omega1 > 0")
        return self.run.step_angle / (omega1 * max_scale)

    def with_overrides(self, **run_updates: Any) -> "ExperimentConfig":
        """Copy with RUN keys replaced; ``None`` values are ignored."""
        updates = {k: v for k, v in run_updates.items() if v is not None}
        if not updates:
            return self
        run = RunSection.model_validate({**self.run.model_dump(), **updates})
        return self.model_copy(update={"run": run})


# execution settings that do not change results
HASH_EXCLUDE = {"run": {"workers", "out_dir", "format"}}


def config_hash(config: ExperimentConfig) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON dump."""
    canonical = json.dumps(
        config.model_dump(mode="json", exclude=HASH_EXCLUDE),
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _nest(flat: Dict[str, Optional[str]]) -> Dict[str, Dict[str, str]]:
    nested: Dict[str, Dict[str, str]] = {}
    for key, value in flat.items():
        section, sep, field = key.lower().partition("__")
        if not sep or not field:
            raise ParameterError(f"configuration key '{key}' must look like SECTION__KEY")
        if value is None:
            raise ParameterError(f"configuration key '{key}' has no value")
        nested.setdefault(section, {})[field] = value
    return nested


def _parse_list(value: str) -> list:
    return [item.strip() for item in value.split(",") if item.strip()]


def load_config(path: Union[str, Path, None] = None) -> ExperimentConfig:
    """Load and validate a manifest; ``None`` gives the protocol defaults."""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"configuration file not found: {path}")
    nested = _nest(dotenv_values(path))
    oracle = nested.get("oracle")
    if oracle and "generator_omega_tau" in oracle:
        oracle["generator_omega_tau"] = _parse_list(oracle["generator_omega_tau"])
    logger.info("loaded configuration %s (%d sections)", path, len(nested))
    return ExperimentConfig.model_validate(nested)
