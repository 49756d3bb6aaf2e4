"""Hand-space geometry: normalization, projection and pair angles.

Coordinate convention (shared by every module): right-handed frame with
y pointing up and z pointing forward, toward the display. Positions are
in meters. All functions here are pure; the engine owns any state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EPS_DEGENERATE = 1e-6
EPS_STATIONARY = 1e-9


class DegenerateSample(ValueError):
    """Hand coincides with the shoulder; direction is undefined."""


class Stationary(ValueError):
    """Sample pair too close together to carry a usable angle."""


class GimbalPole(ValueError):
    """Hand is (numerically) straight above/below the shoulder."""


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __sub__(self, other: "Point3") -> "Point3":
        return Point3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __add__(self, other: "Point3") -> "Point3":
        return Point3(self.x + other.x, self.y + other.y, self.z + other.z)

    def scaled(self, k: float) -> "Point3":
        return Point3(self.x * k, self.y * k, self.z * k)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)


def dist(a: Point3, b: Point3) -> float:
    """Euclidean distance between two points."""
    return (a - b).norm()


@dataclass(frozen=True)
class HandSample:
    """One timestamped sensor frame: hand and shoulder positions."""

    t: float
    hand: Point3
    shoulder: Point3


@dataclass(frozen=True)
class CalibrationVolume:
    """Reachable hand region used to normalize raw positions.

    vertical_range   (y_lo, y_hi) meters, precision axis for V techniques
    radial_range     (r_lo, r_hi) meters from shoulder, precision axis for H
    planar_bounds    ((x_lo, x_hi), (z_lo, z_hi)) meters, pointing plane for V
    angular_bounds   ((az_lo, az_hi), (el_lo, el_hi)) radians around the
                     shoulder, pointing sphere for H
    """

    vertical_range: tuple[float, float]
    radial_range: tuple[float, float]
    planar_bounds: tuple[tuple[float, float], tuple[float, float]]
    angular_bounds: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self) -> None:
        ranges = [
            self.vertical_range,
            self.radial_range,
            self.planar_bounds[0],
            self.planar_bounds[1],
            self.angular_bounds[0],
            self.angular_bounds[1],
        ]
        for lo, hi in ranges:
            if not hi > lo:
                raise ValueError(f"empty calibration range ({lo}, {hi})")
        if not self.radial_range[0] > 0:
            raise ValueError("radial range must start above zero")


@dataclass(frozen=True)
class CValueTrace:
    """Intermediate quantities of a pair-angle computation.

    theta is the angle in [0, pi]; the remaining fields expose the side
    lengths so callers and tests can audit the triangle that produced it.
    """

    A: float
    B: float
    C: float
    D1: float
    D2: float
    theta: float


def _clamp01(v: float) -> float:
    return 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)


def _normalize(value: float, lo: float, hi: float) -> tuple[float, bool]:
    raw = (value - lo) / (hi - lo)
    clamped = _clamp01(raw)
    return clamped, clamped != raw


def normalize_vertical(s: HandSample, vol: CalibrationVolume) -> tuple[float, bool]:
    """Height of the hand mapped linearly onto [0, 1].

    Returns (h, saturated); out-of-range heights clamp rather than error
    because users routinely overshoot the calibrated volume.
    """
    lo, hi = vol.vertical_range
    return _normalize(s.hand.y, lo, hi)


def normalize_radial(s: HandSample, vol: CalibrationVolume) -> tuple[float, bool]:
    """Hand-to-shoulder distance mapped linearly onto [0, 1].

    Raises DegenerateSample when the hand sits on the shoulder.
    """
    r = dist(s.hand, s.shoulder)
    if r <= EPS_DEGENERATE:
        raise DegenerateSample(f"hand-shoulder distance {r:.3g} m")
    lo, hi = vol.radial_range
    return _normalize(r, lo, hi)


def project_planar(s: HandSample, vol: CalibrationVolume) -> tuple[tuple[float, float], bool]:
    """Map the hand's (x, z) onto the unit square, like a mouse on a desk.

    u grows to the user's right, v grows as the hand moves forward (toward
    the display). Returns ((u, v), saturated).
    """
    (x_lo, x_hi), (z_lo, z_hi) = vol.planar_bounds
    u, sat_u = _normalize(s.hand.x, x_lo, x_hi)
    v, sat_v = _normalize(s.hand.z, z_lo, z_hi)
    return (u, v), sat_u or sat_v


def spherical_angles(s: HandSample) -> tuple[float, float]:
    """Azimuth/elevation of the hand around the shoulder, radians.

    Azimuth 0 faces forward (+z) and grows to the right (+x); elevation is
    arcsin of the vertical offset over the radius. Raises DegenerateSample
    and GimbalPole for undefined directions.
    """
    off = s.hand - s.shoulder
    r = off.norm()
    if r <= EPS_DEGENERATE:
        raise DegenerateSample(f"hand-shoulder distance {r:.3g} m")
    elevation = math.asin(max(-1.0, min(1.0, off.y / r)))
    if abs(abs(elevation) - math.pi / 2) < 1e-6:
        raise GimbalPole(f"elevation {elevation:.6f} rad")
    azimuth = math.atan2(off.x, off.z)
    return azimuth, elevation


def project_spherical(s: HandSample, vol: CalibrationVolume) -> tuple[tuple[float, float], bool]:
    """Map the hand's direction from the shoulder onto the unit square.

    Radius does not matter: moving the hand along a shoulder ray leaves
    (u, v) unchanged. u grows with azimuth, v with elevation.
    """
    az, el = spherical_angles(s)
    (az_lo, az_hi), (el_lo, el_hi) = vol.angular_bounds
    u, sat_u = _normalize(az, az_lo, az_hi)
    v, sat_v = _normalize(el, el_lo, el_hi)
    return (u, v), sat_u or sat_v


def c_value_hr(pt1: Point3, pt2: Point3, shoulder: Point3) -> CValueTrace:
    """Pair angle for radially-adjusted relative pointing.

    Builds the triangle (pt1, pt2, shoulder) with side lengths
    A = |pt1 pt2|, B = max(D1, D2), C = min(D1, D2) where D1/D2 are the
    points' distances to the shoulder, and returns the angle between the
    A and B sides. Pure radial motion gives theta = 0, pure tangential
    motion gives theta -> pi/2. Symmetric in (pt1, pt2).
    """
    a = dist(pt1, pt2)
    d1 = dist(pt1, shoulder)
    d2 = dist(pt2, shoulder)
    b = max(d1, d2)
    c = min(d1, d2)
    if a <= EPS_STATIONARY or b <= EPS_STATIONARY:
        raise Stationary(f"A={a:.3g} B={b:.3g}")
    cos_theta = (a * a + b * b - c * c) / (2.0 * a * b)
    theta = math.acos(max(-1.0, min(1.0, cos_theta)))
    return CValueTrace(A=a, B=b, C=c, D1=d1, D2=d2, theta=theta)


def c_value_vr(pt1: Point3, pt2: Point3) -> CValueTrace:
    """Pair angle for vertically-adjusted relative pointing.

    theta is the angle between the displacement and the vertical axis:
    arccos of |dy| over the displacement length. Pure vertical motion
    gives 0, pure horizontal motion gives pi/2.
    """
    a = dist(pt1, pt2)
    if a <= EPS_STATIONARY:
        raise Stationary(f"A={a:.3g}")
    b = abs(pt1.y - pt2.y)
    theta = math.acos(max(0.0, min(1.0, b / a)))
    return CValueTrace(A=a, B=b, C=0.0, D1=0.0, D2=0.0, theta=theta)
