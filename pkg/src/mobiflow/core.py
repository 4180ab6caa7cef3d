"""Geometry and numeric kernels shared by every analysis module.

All functions are pure and stateless. Distances are great-circle on a
sphere of radius EARTH_RADIUS_M; coordinates are plain WGS84-style
longitude/latitude degrees. Averages of raw longitudes misbehave across
the antimeridian; study areas here never cross it (documented limitation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import EmptyInput, ZeroTotalWeight

#: Mean Earth radius in meters, fixed so golden files are bit-stable.
EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """A longitude/latitude pair in degrees, validated at construction."""

    longitude: float
    latitude: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.longitude) and math.isfinite(self.latitude)):
            raise ValueError("coordinates must be finite")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude out of range: {self.longitude}")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude}")


class WeightedSample(NamedTuple):
    """A value with a non-negative weight (seconds when time-weighting)."""

    value: float
    weight: float


def weighted_mean(samples: Iterable[tuple[float, float]]) -> float:
    """Weighted average of (value, weight) pairs.

    Uses compensated accumulation (math.fsum) so that billions of small
    weights do not drift. Raises ZeroTotalWeight when the weights sum to
    zero and ValueError on a negative weight.
    """
    values = []
    weights = []
    for value, weight in samples:
        if weight < 0:
            raise ValueError(f"negative weight: {weight}")
        values.append(value)
        weights.append(weight)
    total = math.fsum(weights)
    if total <= 0.0:
        raise ZeroTotalWeight("total weight is zero")
    return math.fsum(v * w for v, w in zip(values, weights)) / total


def time_weighted_centroid(points: Iterable[tuple[GeoPoint, float]]) -> GeoPoint:
    """Coordinate-wise weighted average of localizations.

    Computed on raw longitude/latitude degrees (no projection); see module
    docstring for the antimeridian caveat.
    """
    pairs = list(points)
    lon = weighted_mean((p.longitude, w) for p, w in pairs)
    lat = weighted_mean((p.latitude, w) for p, w in pairs)
    return GeoPoint(lon, lat)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters between two points."""
    lat1 = math.radians(a.latitude)
    lat2 = math.radians(b.latitude)
    dlat = lat2 - lat1
    dlon = math.radians(b.longitude - a.longitude)
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    # guard tiny negative / >1 excursions from rounding
    h = min(1.0, max(0.0, h))
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(h))


def geometric_mean(values: Iterable[float], floor: float | None = None) -> float:
    """exp(mean(ln v)) over the values.

    When ``floor`` is given, non-positive values are raised to it before
    taking logs (a stationary device has a zero radius; flooring keeps
    hourly aggregates defined). Without a floor, non-positive input is an
    error. Raises EmptyInput on an empty collection.
    """
    logs = []
    for v in values:
        if v <= 0.0:
            if floor is None:
                raise ValueError(f"non-positive value without floor: {v}")
            v = floor
        logs.append(math.log(v))
    if not logs:
        raise EmptyInput("geometric mean of nothing")
    return math.exp(math.fsum(logs) / len(logs))


def initial_bearing_deg(origin: GeoPoint, target: GeoPoint) -> float:
    """Initial great-circle bearing from origin to target, degrees in [0, 360)."""
    lat1 = math.radians(origin.latitude)
    lat2 = math.radians(target.latitude)
    dlon = math.radians(target.longitude - origin.longitude)
    x = math.sin(dlon) * math.cos(lat2)
    y = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    return math.degrees(math.atan2(x, y)) % 360.0


def destination_point(origin: GeoPoint, bearing_deg: float, distance_m: float) -> GeoPoint:
    """Point reached by travelling distance_m along the initial bearing.

    Spherical forward solution; exact inverse of the (distance, bearing)
    pair used for local azimuthal-equidistant projections.
    """
    delta = distance_m / EARTH_RADIUS_M
    theta = math.radians(bearing_deg)
    lat1 = math.radians(origin.latitude)
    lon1 = math.radians(origin.longitude)
    lat2 = math.asin(
        math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(theta)
    )
    lon2 = lon1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(lat1),
        math.cos(delta) - math.sin(lat1) * math.sin(lat2),
    )
    lon_deg = math.degrees(lon2)
    if lon_deg > 180.0:
        lon_deg -= 360.0
    elif lon_deg < -180.0:
        lon_deg += 360.0
    return GeoPoint(lon_deg, math.degrees(lat2))
