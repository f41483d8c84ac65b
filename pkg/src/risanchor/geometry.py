"""Planar geometry of RIS anchors: pixels, delays/Dopplers and position lines.

Conventions
-----------
* The UE moves along +x with speed ``v``.
* Doppler is ``nu = -(f_c / c) * d|p_n - ue(t)|/dt`` so it is positive while the
  UE approaches a pixel.
* ``psi = arccos(c * nu_bar / (v * f_c))`` is therefore the angle between the
  direction of travel and the direction from the UE towards the anchor.
* ``side`` is +1 when the UE has a larger y than the anchor point and -1 when
  it is lower; it restores the sign of ``sin(psi)`` lost by ``arccos``.

With these conventions the UE sits at ``anchor + d * (-cos psi, side * sin psi)``
and the noise-free position line passes through the true UE.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import DegenerateGeometryError, DomainError

_COINCIDENT_TOL = 1e-12  # m


class Vec2(NamedTuple):
    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class RisSegment:
    """A linear RIS whose pixels lie on ``y = slope * x + intercept``.

    Pixels start at ``origin`` and advance towards +x along the line, so a
    vertical surface is not representable.
    """

    origin: Vec2
    pixel_count: int
    pixel_spacing: float
    slope: float
    side: int

    def __post_init__(self):
        object.__setattr__(self, "origin", Vec2(float(self.origin[0]), float(self.origin[1])))
        if int(self.pixel_count) != self.pixel_count or self.pixel_count < 1:
            raise ValueError(f"pixel_count must be a positive integer, got {self.pixel_count}")
        if not self.pixel_spacing > 0:
            raise ValueError(f"pixel_spacing must be positive, got {self.pixel_spacing}")
        if not np.isfinite(self.slope):
            raise ValueError("slope must be finite")
        if self.side not in (1, -1):
            raise ValueError(f"side must be +1 or -1, got {self.side}")
        if not all(np.isfinite(self.origin)):
            raise ValueError("origin must be finite")

    @property
    def direction(self) -> np.ndarray:
        """Unit vector from the first to the last pixel."""
        return np.array([1.0, self.slope]) / np.hypot(1.0, self.slope)

    @property
    def intercept(self) -> float:
        return self.origin.y - self.slope * self.origin.x

    @property
    def length(self) -> float:
        return (self.pixel_count - 1) * self.pixel_spacing

    @property
    def x_range(self) -> tuple[float, float]:
        return (self.origin.x, self.origin.x + self.length * self.direction[0])

    @property
    def center(self) -> Vec2:
        c = self.origin.as_array() + 0.5 * self.length * self.direction
        return Vec2(*c)

    @classmethod
    def centered(cls, center, slope, pixel_count, pixel_spacing, side) -> "RisSegment":
        """Build a segment from its midpoint instead of its first pixel."""
        e = np.array([1.0, slope]) / np.hypot(1.0, slope)
        origin = np.asarray(center, dtype=float) - 0.5 * (pixel_count - 1) * pixel_spacing * e
        return cls(Vec2(*origin), pixel_count, pixel_spacing, slope, side)

    def translated(self, dx: float, dy: float) -> "RisSegment":
        return RisSegment(
            Vec2(self.origin.x + dx, self.origin.y + dy),
            self.pixel_count,
            self.pixel_spacing,
            self.slope,
            self.side,
        )


@dataclass(frozen=True)
class MotionModel:
    speed: float
    direction: Vec2 = Vec2(1.0, 0.0)

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError(f"speed must be positive, got {self.speed}")
        if tuple(self.direction) != (1.0, 0.0):
            raise ValueError("only motion along +x is supported")

    def max_doppler(self, f_c: float) -> float:
        return self.speed * f_c / SPEED_OF_LIGHT


@dataclass(frozen=True)
class PathParams:
    """Per-pixel delays (s) and Doppler shifts (Hz) towards the UE."""

    delays: np.ndarray
    dopplers: np.ndarray

    def __post_init__(self):
        delays = np.atleast_1d(np.asarray(self.delays, dtype=float))
        dopplers = np.atleast_1d(np.asarray(self.dopplers, dtype=float))
        if delays.shape != dopplers.shape or delays.ndim != 1 or delays.size == 0:
            raise ValueError("delays and dopplers must be equal-length non-empty vectors")
        if np.any(delays <= 0):
            raise DegenerateGeometryError("all delays must be positive")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "dopplers", dopplers)

    def __len__(self):
        return self.delays.size


@dataclass(frozen=True)
class AnchorObservation:
    mean_delay: float
    mean_doppler: float
    residual_delays: np.ndarray
    residual_dopplers: np.ndarray

    @classmethod
    def from_means(cls, mean_delay: float, mean_doppler: float) -> "AnchorObservation":
        """Observation carrying only the means (residuals unknown, set to zero)."""
        return cls(float(mean_delay), float(mean_doppler), np.zeros(1), np.zeros(1))


@dataclass(frozen=True)
class PolarObservation:
    distance: float
    angle: float

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError(f"distance must be positive, got {self.distance}")
        if not 0.0 <= self.angle <= np.pi:
            raise ValueError(f"angle must lie in [0, pi], got {self.angle}")


@dataclass(frozen=True)
class PositionLine:
    """Locus ``y = slope * x + intercept`` for ``x`` in ``x_interval``."""

    slope: float
    intercept: float
    x_interval: tuple[float, float]

    def distance_to(self, p) -> float:
        """Perpendicular distance from ``p`` to the (unbounded) line."""
        x, y = p
        return abs(y - self.slope * x - self.intercept) / np.hypot(1.0, self.slope)


def pixel_positions(ris: RisSegment) -> np.ndarray:
    """Pixel coordinates as an ``(N, 2)`` array."""
    steps = np.arange(ris.pixel_count) * ris.pixel_spacing
    return ris.origin.as_array() + steps[:, None] * ris.direction


def path_params(ris: RisSegment, ue, motion: MotionModel, f_c: float) -> PathParams:
    ue = np.asarray(ue, dtype=float)
    offset = ue - pixel_positions(ris)
    dist = np.hypot(offset[:, 0], offset[:, 1])
    if np.any(dist < _COINCIDENT_TOL):
        raise DegenerateGeometryError(f"UE {tuple(ue)} coincides with a pixel")
    range_rate = motion.speed * offset[:, 0] / dist
    return PathParams(dist / SPEED_OF_LIGHT, -(f_c / SPEED_OF_LIGHT) * range_rate)


def anchor_params(params: PathParams) -> AnchorObservation:
    tau_bar = float(np.mean(params.delays))
    nu_bar = float(np.mean(params.dopplers))
    return AnchorObservation(
        tau_bar, nu_bar, params.delays - tau_bar, params.dopplers - nu_bar
    )


def doppler_ratio(obs: AnchorObservation, motion: MotionModel, f_c: float) -> float:
    """``c * nu_bar / (v * f_c)``, the cosine of the anchor angle."""
    return SPEED_OF_LIGHT * obs.mean_doppler / (motion.speed * f_c)


def polar_from_params(obs: AnchorObservation, motion: MotionModel, f_c: float) -> PolarObservation:
    u = doppler_ratio(obs, motion, f_c)
    if abs(u) > 1.0 + 1e-12:
        raise DomainError(
            f"|c*nu_bar|/(v*f_c) = {abs(u):.6g} exceeds 1; Doppler inconsistent with speed"
        )
    if not obs.mean_delay > 0:
        raise DomainError(f"mean delay must be positive, got {obs.mean_delay}")
    return PolarObservation(SPEED_OF_LIGHT * obs.mean_delay, float(np.arccos(np.clip(u, -1.0, 1.0))))


def params_from_polar(polar: PolarObservation, motion: MotionModel, f_c: float) -> AnchorObservation:
    """Inverse of :func:`polar_from_params` (means only)."""
    return AnchorObservation.from_means(
        polar.distance / SPEED_OF_LIGHT,
        motion.speed * f_c * np.cos(polar.angle) / SPEED_OF_LIGHT,
    )


def displacement(ris: RisSegment, polar: PolarObservation) -> np.ndarray:
    """Vector from the anchor point to the UE."""
    d, psi = polar.distance, polar.angle
    return np.array([-d * np.cos(psi), ris.side * d * np.sin(psi)])


def position_line(ris: RisSegment, polar: PolarObservation) -> PositionLine:
    """Translate the surface by the anchor-to-UE displacement."""
    dx, dy = displacement(ris, polar)
    lo, hi = ris.x_range
    return PositionLine(
        ris.slope,
        ris.intercept + dy - ris.slope * dx,
        (lo + dx, hi + dx),
    )


def point_observation(point, ue, motion: MotionModel, f_c: float) -> AnchorObservation:
    """Exact delay/Doppler between a single point and the UE.

    Used as the anchor-point oracle: for any ``point`` on a surface the
    resulting line contains ``ue`` exactly.
    """
    point = np.asarray(point, dtype=float)
    offset = np.asarray(ue, dtype=float) - point
    dist = float(np.hypot(*offset))
    if dist < _COINCIDENT_TOL:
        raise DegenerateGeometryError("point coincides with the UE")
    nu = -(f_c / SPEED_OF_LIGHT) * motion.speed * offset[0] / dist
    return AnchorObservation.from_means(dist / SPEED_OF_LIGHT, nu)
