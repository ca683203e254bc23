"""Spherical geometry and binomial point processes on spheres.

Positions use Earth-centred spherical coordinates ``(radius, polar, azimuth)``
with radii in km and angles in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SphericalPoint:
    radius: float
    polar: float
    azimuth: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        polar = float(self.polar)
        if polar < 0.0 and polar > -1e-12:
            polar = 0.0
        elif polar > math.pi and polar < math.pi + 1e-12:
            polar = math.pi
        if not 0.0 <= polar <= math.pi:
            raise ValueError(f"polar angle {self.polar} outside [0, pi]")
        object.__setattr__(self, "polar", polar)
        object.__setattr__(self, "azimuth", float(self.azimuth) % TWO_PI)

    def to_cartesian(self) -> np.ndarray:
        s = math.sin(self.polar)
        return self.radius * np.array(
            [s * math.cos(self.azimuth), s * math.sin(self.azimuth), math.cos(self.polar)]
        )


def _cos_central(t1, p1, t2, p2):
    c = np.sin(t1) * np.sin(t2) * np.cos(p1 - p2) + np.cos(t1) * np.cos(t2)
    return np.clip(c, -1.0, 1.0)


def distance(r1, t1, p1, r2, t2, p2):
    """Vectorised Euclidean distance between spherical coordinates."""
    sq = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * _cos_central(t1, p1, t2, p2)
    return np.sqrt(np.maximum(sq, 0.0))


def euclidean_distance(a: SphericalPoint, b: SphericalPoint) -> float:
    return float(distance(a.radius, a.polar, a.azimuth, b.radius, b.polar, b.azimuth))


def central_angle(a: SphericalPoint, b: SphericalPoint) -> float:
    """Angle at the Earth's centre between the directions of ``a`` and ``b``."""
    c = _cos_central(a.polar, a.azimuth, b.polar, b.azimuth)
    return float(np.arccos(c))


def _check_angle(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0.0) or np.any(theta > math.pi):
        raise ValueError("central angle must lie in [0, pi]")
    return theta


def chord_ground_sat(theta, r_earth: float, r_sat: float):
    """Distance between a ground point and a satellite separated by ``theta``."""
    theta = _check_angle(theta)
    sq = r_earth**2 + r_sat**2 - 2.0 * r_earth * r_sat * np.cos(theta)
    out = np.sqrt(np.maximum(sq, 0.0))
    return float(out) if out.ndim == 0 else out


def angle_ground_sat(length, r_earth: float, r_sat: float):
    length = np.asarray(length, dtype=float)
    lo, hi = r_sat - r_earth, r_sat + r_earth
    tol = 1e-9 * hi
    if np.any(length < lo - tol) or np.any(length > hi + tol):
        raise ValueError(f"ground-satellite distance outside [{lo}, {hi}] km")
    c = (r_earth**2 + r_sat**2 - length**2) / (2.0 * r_earth * r_sat)
    out = np.arccos(np.clip(c, -1.0, 1.0))
    return float(out) if out.ndim == 0 else out


def chord_sat_sat(theta, r_sat: float):
    theta = _check_angle(theta)
    out = 2.0 * r_sat * np.sin(theta / 2.0)
    return float(out) if out.ndim == 0 else out


def angle_sat_sat(length, r_sat: float):
    length = np.asarray(length, dtype=float)
    if np.any(length < 0.0) or np.any(length > 2.0 * r_sat * (1 + 1e-12)):
        raise ValueError(f"satellite-satellite distance outside [0, {2 * r_sat}] km")
    out = 2.0 * np.arcsin(np.clip(length / (2.0 * r_sat), 0.0, 1.0))
    return float(out) if out.ndim == 0 else out


class PointSet:
    """An immutable set of points sharing one sphere radius.

    Coordinates are held as arrays so nearest-neighbour queries stay
    vectorised; ``points`` materialises :class:`SphericalPoint` objects.
    """

    def __init__(self, radius: float, polar, azimuth, kind: str = "satellite"):
        self.radius = float(radius)
        self.polar = np.asarray(polar, dtype=float).copy()
        self.azimuth = np.mod(np.asarray(azimuth, dtype=float), TWO_PI)
        self.kind = kind
        if self.polar.shape != self.azimuth.shape or self.polar.ndim != 1:
            raise ValueError("polar and azimuth must be 1-D arrays of equal length")
        self.polar.setflags(write=False)
        self.azimuth.setflags(write=False)

    @classmethod
    def from_points(cls, points: Sequence[SphericalPoint], kind: str = "satellite"):
        if not points:
            raise ValueError("use PointSet(radius, [], []) for an empty set")
        radius = points[0].radius
        if any(abs(p.radius - radius) > 1e-9 for p in points):
            raise ValueError("all points must share the set radius")
        return cls(radius, [p.polar for p in points], [p.azimuth for p in points], kind)

    def __len__(self) -> int:
        return self.polar.size

    def __getitem__(self, i: int) -> SphericalPoint:
        return SphericalPoint(self.radius, self.polar[i], self.azimuth[i])

    @property
    def points(self) -> list[SphericalPoint]:
        return [self[i] for i in range(len(self))]

    def distances_to(self, target: SphericalPoint) -> np.ndarray:
        return distance(self.radius, self.polar, self.azimuth,
                        target.radius, target.polar, target.azimuth)

    def angles_to(self, target: SphericalPoint) -> np.ndarray:
        return np.arccos(_cos_central(self.polar, self.azimuth, target.polar, target.azimuth))


def sample_bpp(n: int, radius: float, rng: np.random.Generator, kind: str = "satellite") -> PointSet:
    """Draw ``n`` independent uniform points on a sphere of the given radius."""
    if n < 0:
        raise ValueError("n must be non-negative")
    polar = np.arccos(rng.uniform(-1.0, 1.0, size=n))
    azimuth = rng.uniform(0.0, TWO_PI, size=n)
    return PointSet(radius, polar, azimuth, kind)


def nearest_point(points: PointSet, target: SphericalPoint) -> tuple[int, SphericalPoint]:
    if len(points) == 0:
        raise ValueError("nearest_point on an empty point set")
    # argmin returns the first minimum, i.e. ties go to the lowest index
    i = int(np.argmin(points.distances_to(target)))
    return i, points[i]
