"""Activity-space ellipses and travel volumes per region and period.

The activity space is the weighted standard deviational ellipse of the
points a region's population visits: axes are twice the square roots of
the eigenvalues of the flow-weighted covariance, computed on a local
azimuthal-equidistant projection about the weighted center so the axes
come out in meters and the azimuth is a true bearing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import GeoPoint, haversine_m, initial_bearing_deg
from .errors import EmptyPoints, UnknownRegion, UnmappedArea
from .od import ODMatrix


@dataclass(frozen=True)
class EllipseParams:
    """Geometry of one region-period activity ellipse."""

    region: str
    period: str
    major_m: float
    minor_m: float
    area_m2: float
    azimuth_deg: float
    shape_index: float


@dataclass(frozen=True)
class TravelStats:
    """Trip counts and centroid distances for one region-period."""

    region: str
    period: str
    intra_trips: int
    inter_trips: int
    total_distance_m: float
    mean_distance_m: float


def _project(points: Sequence[tuple[GeoPoint, float]], center: GeoPoint) -> list[tuple[float, float, float]]:
    """(east_m, north_m, weight) on the azimuthal-equidistant plane at center."""
    out = []
    for p, w in points:
        d = haversine_m(center, p)
        theta = math.radians(initial_bearing_deg(center, p)) if d > 0 else 0.0
        out.append((d * math.sin(theta), d * math.cos(theta), w))
    return out


def fit_activity_ellipse(
    points: Sequence[tuple[GeoPoint, float]], region: str, period: str = ""
) -> EllipseParams:
    """Weighted standard deviational ellipse over visited points.

    Axis lengths are 2*sigma along the principal directions; azimuth is the
    bearing of the major axis folded into [0, 180) degrees clockwise from
    north; shape index is minor/major (1 for a circle, and by convention 1
    for the degenerate single-point case).
    """
    points = [(p, w) for p, w in points if w > 0]
    if not points:
        raise EmptyPoints(region)
    total_w = math.fsum(w for _, w in points)
    lon0 = math.fsum(p.longitude * w for p, w in points) / total_w
    lat0 = math.fsum(p.latitude * w for p, w in points) / total_w
    center = GeoPoint(lon0, lat0)
    planar = _project(points, center)
    mx = math.fsum(x * w for x, _, w in planar) / total_w
    my = math.fsum(y * w for _, y, w in planar) / total_w
    sxx = math.fsum(w * (x - mx) ** 2 for x, _, w in planar) / total_w
    syy = math.fsum(w * (y - my) ** 2 for _, y, w in planar) / total_w
    sxy = math.fsum(w * (x - mx) * (y - my) for x, y, w in planar) / total_w

    half_tr = (sxx + syy) / 2.0
    disc = math.sqrt(((sxx - syy) / 2.0) ** 2 + sxy**2)
    lam1 = max(0.0, half_tr + disc)
    lam2 = max(0.0, half_tr - disc)
    major = 2.0 * math.sqrt(lam1)
    minor = 2.0 * math.sqrt(lam2)

    if lam1 <= 0.0:
        azimuth = 0.0
        shape = 1.0
    else:
        # eigenvector of lam1
        if sxy != 0.0:
            vx, vy = sxy, lam1 - sxx
        elif sxx >= syy:
            vx, vy = 1.0, 0.0
        else:
            vx, vy = 0.0, 1.0
        azimuth = math.degrees(math.atan2(vx, vy)) % 180.0
        shape = minor / major
    return EllipseParams(
        region=region,
        period=period,
        major_m=major,
        minor_m=minor,
        area_m2=math.pi * (major / 2.0) * (minor / 2.0),
        azimuth_deg=azimuth,
        shape_index=shape,
    )


def ellipse_points_for_region(
    od: ODMatrix,
    centroids: Mapping[str, GeoPoint],
    region: str,
    mode: str = "destinations",
) -> list[tuple[GeoPoint, float]]:
    """Visited points for a region's ellipse, weighted by flow counts.

    "destinations": targets of flows out of the region (diagonal included).
    "interactions": both directions, for symmetric visited-place pictures.
    """
    if region not in od.index:
        raise UnknownRegion(region)
    i = od.index[region]
    weights: dict[str, float] = {}
    for j, other in enumerate(od.regions):
        w = float(od.flows[i, j])
        if mode == "interactions" and other != region:
            w += float(od.flows[j, i])
        if w > 0:
            weights[other] = w
    return [(centroids[r], w) for r, w in sorted(weights.items())]


def travel_stats(od: ODMatrix, centroids: Mapping[str, GeoPoint], region: str, period: str = "") -> TravelStats:
    """Trip counts and centroid-to-centroid distances involving the region.

    Intra trips sit on the diagonal and contribute zero distance; inter
    trips are the off-diagonal row plus column entries, each weighted by
    the haversine between region centroids.
    """
    if region not in od.index:
        raise UnknownRegion(region)
    i = od.index[region]
    here = centroids[region]
    intra = int(od.flows[i, i])
    inter = 0
    total = 0.0
    for j, other in enumerate(od.regions):
        if j == i:
            continue
        out_flow = int(od.flows[i, j])
        in_flow = int(od.flows[j, i])
        if out_flow or in_flow:
            d = haversine_m(here, centroids[other])
            inter += out_flow + in_flow
            total += (out_flow + in_flow) * d
    trips = intra + inter
    return TravelStats(
        region=region,
        period=period,
        intra_trips=intra,
        inter_trips=inter,
        total_distance_m=total,
        mean_distance_m=total / trips if trips else 0.0,
    )


#: Numeric fields averaged when rolling political areas up to states.
_ELLIPSE_FIELDS = ("major_m", "minor_m", "area_m2", "azimuth_deg", "shape_index")
_TRAVEL_FIELDS = ("intra_trips", "inter_trips", "total_distance_m", "mean_distance_m")


def state_level_params(
    params: Mapping[str, EllipseParams],
    travel: Mapping[str, TravelStats],
    area_to_state: Mapping[str, str],
) -> dict[str, dict[str, float]]:
    """Unweighted per-state arithmetic means of every area-level parameter."""
    grouped: dict[str, list[str]] = {}
    for area in params:
        state = area_to_state.get(area)
        if state is None:
            raise UnmappedArea(area)
        grouped.setdefault(state, []).append(area)
    out: dict[str, dict[str, float]] = {}
    for state in sorted(grouped):
        areas = grouped[state]
        row: dict[str, float] = {}
        for name in _ELLIPSE_FIELDS:
            row[name] = math.fsum(getattr(params[a], name) for a in areas) / len(areas)
        for name in _TRAVEL_FIELDS:
            row[name] = math.fsum(getattr(travel[a], name) for a in areas) / len(areas)
        out[state] = row
    return out
