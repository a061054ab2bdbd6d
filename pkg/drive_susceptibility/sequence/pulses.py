"""Pulse blocks, supercycles and the drive-inhomogeneity ensemble."""

import math
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..dynamics import DriveProgram, DriveSegment
from ..errors import ParameterError


class Pulse(BaseModel):
    """Rectangular pulse about +x (positive flip) or -x (negative flip)."""

    model_config = ConfigDict(frozen=True)

    flip_angle: float

    @field_validator("flip_angle")
    @classmethod
    def _nonzero(cls, value: float) -> float:
        if value == 0.0 or not math.isfinite(value):
            raise ValueError("flip angle must be finite and nonzero")
        return value

    @property
    def phase(self) -> str:
        return "+x" if self.flip_angle > 0 else "-x"

    def inverted(self) -> "Pulse":
        return Pulse(flip_angle=-self.flip_angle)


class PulseBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    pulses: Tuple[Pulse, ...]

    def inverted(self) -> "PulseBlock":
        return PulseBlock(name=self.name, pulses=tuple(p.inverted() for p in self.pulses))

    def net_flip(self) -> float:
        return math.fsum(p.flip_angle for p in self.pulses)

    def flips(self) -> List[float]:
        return [p.flip_angle for p in self.pulses]

    def duration(self, omega1: float) -> float:
        return math.fsum(abs(p.flip_angle) for p in self.pulses) / omega1


def build_r3(theta: float = math.pi) -> PulseBlock:
    """{theta, -2 theta, theta}."""
    if not theta > 0.0:
        raise ParameterError(f"block flip angle must be positive, got {theta!r}")
    return PulseBlock(
        name="R3",
        pulses=(Pulse(flip_angle=theta), Pulse(flip_angle=-2.0 * theta), Pulse(flip_angle=theta)),
    )


def build_r2(theta: float = math.pi) -> PulseBlock:
    """{theta, -theta}."""
    if not theta > 0.0:
        raise ParameterError(f"block flip angle must be positive, got {theta!r}")
    return PulseBlock(name="R2", pulses=(Pulse(flip_angle=theta), Pulse(flip_angle=-theta)))


BlockBuilder = Callable[[float], PulseBlock]

BLOCK_REGISTRY: Dict[str, BlockBuilder] = {
    "R2": build_r2,
    "R3": build_r3,
}


def register_block(name: str, builder: BlockBuilder) -> None:
    """Make ``name`` available to the sequence parser."""
    if not name.isidentifier():
        raise ParameterError(f"block name '{name}' is not an identifier")
    BLOCK_REGISTRY[name] = builder


class SupercycleEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    block: PulseBlock
    inverted: bool = False

    def resolved(self) -> PulseBlock:
        return self.block.inverted() if self.inverted else self.block

    def token(self) -> str:
        return ("~" if self.inverted else "") + self.block.name


class Supercycle(BaseModel):
    model_config = ConfigDict(frozen=True)

    entries: Tuple[SupercycleEntry, ...]

    @field_validator("entries")
    @classmethod
    def _nonempty(cls, value: Tuple[SupercycleEntry, ...]) -> Tuple[SupercycleEntry, ...]:
        if not value:
            raise ValueError("a supercycle needs at least one block")
        return value

    def __len__(self) -> int:
        return len(self.entries)

    def expand(self) -> List[Pulse]:
        return [pulse for entry in self.entries for pulse in entry.resolved().pulses]

    def period(self, omega1: float) -> float:
        """Duration of one pass at nominal drive amplitude ``omega1``."""
        if not omega1 > 0.0:
            raise ParameterError("omega1 must be positive")
        return math.fsum(abs(p.flip_angle) for p in self.expand()) / omega1

    def canonical(self) -> str:
        return " ".join(entry.token() for entry in self.entries)


def waltz8_supercycle(theta: float = math.pi) -> Supercycle:
    """R3 ~R3 ~R3 R3 ~R3 R3 R3 ~R3."""
    r3 = build_r3(theta)
    pattern = (False, True, True, False, True, False, False, True)
    return Supercycle(entries=tuple(SupercycleEntry(block=r3, inverted=i) for i in pattern))


def expand_to_program(
    sc: Supercycle, omega1: float, scale: float = 1.0, offset: float = 0.0
) -> DriveProgram:
    """Segments timed by the nominal ``omega1`` and driven at ``scale * omega1``.

    A member with scale != 1 therefore sees every flip angle mis-set by the
    same factor while the timing of the sequence is unchanged. ``offset`` is
    the resonance offset (rad/s) carried by every segment.
    """
    if not omega1 > 0.0:
        raise ParameterError("omega1 must be positive")
    if not scale > 0.0:
        raise ParameterError("inhomogeneity scale must be positive")
    if not math.isfinite(offset):
        raise ParameterError("offset must be finite")
    return DriveProgram(
        segments=tuple(
            DriveSegment(
                amplitude=math.copysign(omega1 * scale, pulse.flip_angle),
                duration=abs(pulse.flip_angle) / omega1,
                offset=offset,
            )
            for pulse in sc.expand()
        )
    )


class EnsembleMember(BaseModel):
    model_config = ConfigDict(frozen=True)

    scale: float = Field(gt=0.0)
    weight: float = Field(ge=0.0)


class InhomogeneitySpec(BaseModel):
    """Discrete distribution of drive-amplitude scale factors.

    Weights are normalized and members sorted by scale on construction, so
    weighted reductions always run in the same order.
    """

    model_config = ConfigDict(frozen=True)

    members: Tuple[EnsembleMember, ...]

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "members" not in data:
            return data
        members = [
            m if isinstance(m, EnsembleMember) else EnsembleMember.model_validate(m)
            for m in data["members"]
        ]
        if not members:
            raise ValueError("inhomogeneity ensemble is empty")
        total = math.fsum(m.weight for m in members)
        if not total > 0.0:
            raise ValueError("inhomogeneity weights sum to zero")
        members.sort(key=lambda m: m.scale)
        return {
            "members": tuple(
                EnsembleMember(scale=m.scale, weight=m.weight / total) for m in members
            )
        }

    @classmethod
    def homogeneous(cls) -> "InhomogeneitySpec":
        return cls(members=[EnsembleMember(scale=1.0, weight=1.0)])

    @classmethod
    def gaussian(cls, width: float, points: int = 7) -> "InhomogeneitySpec":
        """Gauss-Hermite nodes of a normal distribution with fractional ``width``."""
        if width < 0.0:
            raise ParameterError("inhomogeneity width must be non-negative")
        if points < 1:
            raise ParameterError("need at least one ensemble point")
        if width == 0.0 or points == 1:
            return cls.homogeneous()
        nodes, weights = np.polynomial.hermite_e.hermegauss(points)
        scales = 1.0 + width * nodes
        if np.any(scales <= 0.0):
            raise ParameterError(
                f"width {width} with {points} points produces non-positive scales"
            )
        return cls(
            members=[
                EnsembleMember(scale=float(s), weight=float(w))
                for s, w in zip(scales, weights)
            ]
        )

    @classmethod
    def uniform(cls, half_width: float, points: int = 7) -> "InhomogeneitySpec":
        """Equal weights on a grid spanning 1 +/- ``half_width``."""
        if not 0.0 <= half_width < 1.0:
            raise ParameterError("uniform half width must lie in [0, 1)")
        if points < 1:
            raise ParameterError("need at least one ensemble point")
        if half_width == 0.0 or points == 1:
            return cls.homogeneous()
        scales = np.linspace(1.0 - half_width, 1.0 + half_width, points)
        return cls(members=[EnsembleMember(scale=float(s), weight=1.0) for s in scales])

    @property
    def scales(self) -> np.ndarray:
        return np.array([m.scale for m in self.members])

    @property
    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.members])

    @property
    def max_scale(self) -> float:
        return self.members[-1].scale
