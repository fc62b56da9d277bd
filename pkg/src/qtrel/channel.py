"""Link physics: transmission efficiency, FSO beam coupling, heralding
probability and slot timing for a QR-to-endpoint link."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ConfigError

SPEED_FIBER = 2.0e8
SPEED_FSO = 3.0e8


class Medium(str, enum.Enum):
    FIBER = "fiber"
    FSO = "fso"


@dataclass(frozen=True)
class FSOGeometry:
    aperture_diameter: float = 0.20
    beam_waist: float = 0.015
    wavelength: float = 1550e-9

    def __post_init__(self) -> None:
        for name in ("aperture_diameter", "beam_waist", "wavelength"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"fso_geometry.{name} must be > 0, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class LinkConfig:
    """One QR-to-endpoint link.

    ``distance_half`` is the QR-to-endpoint distance in metres (half the
    Alice-Bob separation for a centred repeater).
    """

    medium: Medium
    distance_half: float
    p_emit: float
    p_detect: float
    p_couple: float
    attenuation_length: float
    propagation_speed: float
    fso_geometry: FSOGeometry | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "medium", Medium(self.medium))
        for name in ("p_emit", "p_detect", "p_couple"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v!r}")
        if not self.distance_half >= 0:
            raise ConfigError(f"distance_half must be >= 0, got {self.distance_half!r}")
        if not self.attenuation_length > 0:
            raise ConfigError("attenuation_length must be > 0")
        if not self.propagation_speed > 0:
            raise ConfigError("propagation_speed must be > 0")
        if self.medium is Medium.FSO and self.fso_geometry is None:
            raise ConfigError("FSO link requires fso_geometry")
        if self.medium is Medium.FIBER and self.fso_geometry is not None:
            raise ConfigError("fiber link must not carry fso_geometry")

    def at_distance(self, distance_half: float) -> LinkConfig:
        return LinkConfig(
            self.medium,
            distance_half,
            self.p_emit,
            self.p_detect,
            self.p_couple,
            self.attenuation_length,
            self.propagation_speed,
            self.fso_geometry,
        )


@dataclass(frozen=True)
class TimingConfig:
    t_attempt: float = 5.5e-6
    t_bsm: float = 50e-9
    t_pauli: float = 10e-9

    def __post_init__(self) -> None:
        for name in ("t_attempt", "t_bsm", "t_pauli"):
            if getattr(self, name) < 0:
                raise ConfigError(f"timing.{name} must be >= 0")


def fiber_link(distance_half: float, **overrides) -> LinkConfig:
    """Fiber link with the reference parameter set (Table I defaults)."""
    params = dict(
        p_emit=0.6,
        p_detect=0.85,
        p_couple=0.9,
        attenuation_length=21_700.0,
        propagation_speed=SPEED_FIBER,
    )
    params.update(overrides)
    return LinkConfig(Medium.FIBER, distance_half, **params)


def fso_link(distance_half: float, geometry: FSOGeometry | None = None, **overrides) -> LinkConfig:
    params = dict(
        p_emit=0.6,
        p_detect=0.85,
        p_couple=0.8,
        attenuation_length=8_700.0,
        propagation_speed=SPEED_FSO,
    )
    params.update(overrides)
    return LinkConfig(Medium.FSO, distance_half, fso_geometry=geometry or FSOGeometry(), **params)


def make_link(medium: Medium | str, distance_half: float, **overrides) -> LinkConfig:
    medium = Medium(medium)
    if medium is Medium.FIBER:
        overrides.pop("fso_geometry", None)
        return fiber_link(distance_half, **overrides)
    return fso_link(distance_half, **overrides)


def beam_radius(geometry: FSOGeometry, distance_half: float) -> float:
    """Gaussian beam radius after propagating ``distance_half`` metres."""
    w0 = geometry.beam_waist
    rayleigh = geometry.wavelength * distance_half / (math.pi * w0 * w0)
    return w0 * math.sqrt(1.0 + rayleigh * rayleigh)


def geometric_coupling(geometry: FSOGeometry, distance_half: float) -> float:
    """Fraction of a truncated Gaussian beam collected by the receiver aperture."""
    if distance_half < 0:
        raise ConfigError("distance_half must be >= 0")
    a = geometry.aperture_diameter / 2.0
    w = beam_radius(geometry, distance_half)
    return -math.expm1(-2.0 * a * a / (w * w))


def transmission_efficiency(link: LinkConfig) -> float:
    coupling = 1.0
    if link.medium is Medium.FSO:
        coupling = geometric_coupling(link.fso_geometry, link.distance_half)
    return (
        link.p_emit
        * link.p_detect
        * link.p_couple
        * coupling
        * math.exp(-link.distance_half / link.attenuation_length)
    )


def success_probability(eta: float, theta: float) -> float:
    """Per-attempt heralding probability for efficiency ``eta`` and
    matter-photon entanglement angle ``theta``."""
    if not 0.0 <= eta <= 1.0:
        raise ConfigError(f"eta must lie in [0, 1], got {eta!r}")
    c2 = math.cos(theta) ** 2
    return 2.0 * eta * c2 * (1.0 - eta * eta * c2)


def slot_duration(link: LinkConfig, timing: TimingConfig) -> float:
    t_comm = 2.0 * link.distance_half / link.propagation_speed
    return t_comm + timing.t_attempt + timing.t_bsm + timing.t_pauli
