"""Radius of gyration and its population-level aggregations.

The radius of gyration of a device-day is the time-weighted RMS haversine
distance of its localizations from their time-weighted centroid. Weights
attach to raw event locations: each event carries the time until the next
event, the last event carries the time until local midnight (the daily
re-keying boundary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Mapping, Sequence

from .core import GeoPoint, geometric_mean, haversine_m, time_weighted_centroid, weighted_mean
from .errors import EmptyWeek

#: Bucket boundaries in meters, half-open on the right: [0,500), [500,5000), [5000,inf).
DEFAULT_BUCKETS = (500.0, 5000.0)

#: Non-positive radii are floored to this many meters before log-averaging.
ROG_FLOOR_M = 1.0

#: Postcodes with fewer device-day observations than this are suppressed.
DEFAULT_SUPPRESSION = 30


def radius_of_gyration(localizations: Sequence[tuple[GeoPoint, float]]) -> float:
    """Time-weighted RMS distance from the time-weighted centroid, meters."""
    center = time_weighted_centroid(localizations)
    mean_sq = weighted_mean((haversine_m(center, p) ** 2, w) for p, w in localizations)
    return math.sqrt(mean_sq)


@dataclass(frozen=True)
class DeviceDayROG:
    """Per-device daily mobility record."""

    device_pseudonym: str
    day: date
    rog_m: float
    night_postcode: str | None = None
    hourly_rog_m: tuple[float | None, ...] = (None,) * 24


def localizations_for_day(
    events: Sequence[tuple[float, GeoPoint]], day_end: float
) -> list[tuple[GeoPoint, float]]:
    """Attach time-to-next-event weights; the last event runs to midnight."""
    out = []
    for i, (ts, point) in enumerate(events):
        nxt = events[i + 1][0] if i + 1 < len(events) else day_end
        out.append((point, max(0.0, nxt - ts)))
    return out


def hourly_rogs(
    events: Sequence[tuple[float, GeoPoint]], day_start: float, day_end: float
) -> tuple[float | None, ...]:
    """Hour-restricted radii: hour h uses only events whose timestamp falls
    in hour slot h, with weights clipped at the slot boundary. Hours without
    events are None."""
    per_hour: list[list[tuple[GeoPoint, float]]] = [[] for _ in range(24)]
    for i, (ts, point) in enumerate(events):
        h = int((ts - day_start) // 3600.0)
        if not 0 <= h <= 23:
            h = min(23, max(0, h))  # DST-shifted slots clamp into 0..23
        slot_end = min(day_start + (h + 1) * 3600.0, day_end)
        nxt = events[i + 1][0] if i + 1 < len(events) else day_end
        per_hour[h].append((point, max(0.0, min(nxt, slot_end) - ts)))
    out: list[float | None] = []
    for locs in per_hour:
        if not locs:
            out.append(None)
        elif sum(w for _, w in locs) <= 0.0:
            out.append(0.0 if len({p for p, _ in locs}) == 1 else None)
        else:
            out.append(radius_of_gyration(locs))
    return tuple(out)


@dataclass(frozen=True)
class RogBucketCounts:
    """Device counts per movement bucket for one day."""

    day: date
    small: int
    medium: int
    large: int

    @property
    def total(self) -> int:
        return self.small + self.medium + self.large


def bucket_rog(
    day: date, rogs: Iterable[float], bounds: tuple[float, float] = DEFAULT_BUCKETS
) -> RogBucketCounts:
    """Half-open bucketing: a radius equal to a bound lands in the upper bucket."""
    lo, hi = bounds
    small = medium = large = 0
    for r in rogs:
        if r < lo:
            small += 1
        elif r < hi:
            medium += 1
        else:
            large += 1
    return RogBucketCounts(day=day, small=small, medium=medium, large=large)


def hourly_rog_series(
    records: Iterable[DeviceDayROG], floor: float = ROG_FLOOR_M
) -> dict[tuple[date, int], float]:
    """(day, hour) -> geometric mean over devices of the hour-restricted ROG.

    Devices without events in an hour are excluded from that hour; radii of
    stationary devices (0) enter at the floor value.
    """
    buckets: dict[tuple[date, int], list[float]] = {}
    for rec in records:
        for hour, value in enumerate(rec.hourly_rog_m):
            if value is not None:
                buckets.setdefault((rec.day, hour), []).append(value)
    return {key: geometric_mean(vals, floor=floor) for key, vals in sorted(buckets.items())}


def regional_relative_change(
    records: Iterable[DeviceDayROG],
    week_a: tuple[date, date],
    week_b: tuple[date, date],
    min_devices: int = DEFAULT_SUPPRESSION,
) -> dict[str, tuple[float | None, str]]:
    """Relative change of mean ROG per night postcode between two periods.

    Returns postcode -> (rel_change, flag) with flag "ok" or "suppressed";
    suppressed postcodes (fewer than min_devices observations in either
    period, or a zero baseline) carry None. Raises EmptyWeek when a period
    has no observations at all.
    """
    sums_a: dict[str, list[float]] = {}
    sums_b: dict[str, list[float]] = {}
    totals = [0, 0]
    for rec in records:
        if rec.night_postcode is None:
            continue
        if week_a[0] <= rec.day <= week_a[1]:
            sums_a.setdefault(rec.night_postcode, []).append(rec.rog_m)
            totals[0] += 1
        elif week_b[0] <= rec.day <= week_b[1]:
            sums_b.setdefault(rec.night_postcode, []).append(rec.rog_m)
            totals[1] += 1
    if totals[0] == 0:
        raise EmptyWeek(f"no observations in {week_a[0]}..{week_a[1]}")
    if totals[1] == 0:
        raise EmptyWeek(f"no observations in {week_b[0]}..{week_b[1]}")
    out: dict[str, tuple[float | None, str]] = {}
    for postcode in sorted(set(sums_a) | set(sums_b)):
        a = sums_a.get(postcode, [])
        b = sums_b.get(postcode, [])
        if len(a) < min_devices or len(b) < min_devices:
            out[postcode] = (None, "suppressed")
            continue
        mean_a = math.fsum(a) / len(a)
        mean_b = math.fsum(b) / len(b)
        if mean_a == 0.0:
            out[postcode] = (None, "suppressed")
            continue
        out[postcode] = ((mean_b - mean_a) / mean_a, "ok")
    return out
