"""Raw event intake: parsing, pseudonymization, filtering, localization.

Input events arrive as JSON lines with fields {id, ts, cell, kind,
subscriber_class}. Identifiers are replaced by day-keyed HMAC tokens at
the parse boundary, so nothing downstream ever sees a raw id. Lines that
cannot be used (malformed, unknown cell, out-of-day timestamp) are
quarantined with their line number; a day never aborts on bad lines.
"""

from __future__ import annotations

import csv
import hashlib
import hmac
import json
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import Iterable, Mapping
from zoneinfo import ZoneInfo

from .core import GeoPoint
from .errors import MissingDayKey, MissingRegistry, UnknownPoi
from .stays import OUT_OF_LEVEL, stays_for_track

#: Resolution levels ordered coarse to fine; "poi" is sparse.
LEVELS = ("country", "federal_state", "political_area", "postcode", "municipality", "poi")

EVENT_KINDS = frozenset({"voice", "sms", "data", "signalling"})

#: Single-country pipelines map every cell to this country-level region.
COUNTRY_REGION = "ALL"


@dataclass(frozen=True, slots=True)
class SignallingEvent:
    """One device/network interaction, already pseudonymized."""

    device_pseudonym: str
    timestamp: float
    cell_id: str
    event_kind: str


@dataclass(frozen=True, slots=True)
class CellInfo:
    location: GeoPoint
    regions: Mapping[str, str]  # level -> region id ("poi" may be absent)


class CellRegistry:
    """cell_id -> location plus region ids per resolution level."""

    def __init__(self, entries: Mapping[str, CellInfo]):
        self.entries = dict(entries)
        self._by_level: dict[str, dict[str, str]] = {}
        for level in LEVELS:
            mapping = {}
            for cell, info in self.entries.items():
                region = COUNTRY_REGION if level == "country" else info.regions.get(level)
                if region is not None:
                    mapping[cell] = region
            self._by_level[level] = mapping
        self._area_state: dict[str, str] = {}
        for info in self.entries.values():
            area = info.regions.get("political_area")
            state = info.regions.get("federal_state")
            if area and state:
                known = self._area_state.setdefault(area, state)
                if known != state:
                    raise MissingRegistry(f"area {area} mapped to states {known} and {state}")

    @classmethod
    def from_csv(cls, path) -> "CellRegistry":
        entries: dict[str, CellInfo] = {}
        try:
            fh = open(path, newline="")
        except OSError as exc:
            raise MissingRegistry(str(exc)) from exc
        with fh:
            for row in csv.DictReader(fh):
                regions = {
                    "federal_state": row["state"],
                    "political_area": row["political_area"],
                    "postcode": row["postcode"],
                    "municipality": row["municipality"],
                }
                poi = (row.get("poi") or "").strip()
                if poi:
                    regions["poi"] = poi
                entries[row["cell_id"]] = CellInfo(
                    location=GeoPoint(float(row["longitude"]), float(row["latitude"])),
                    regions=regions,
                )
        return cls(entries)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["cell_id", "longitude", "latitude", "state", "political_area", "postcode", "municipality", "poi"]
            )
            for cell in sorted(self.entries):
                info = self.entries[cell]
                writer.writerow(
                    [
                        cell,
                        repr(info.location.longitude),
                        repr(info.location.latitude),
                        info.regions["federal_state"],
                        info.regions["political_area"],
                        info.regions["postcode"],
                        info.regions["municipality"],
                        info.regions.get("poi", ""),
                    ]
                )

    def __contains__(self, cell_id: str) -> bool:
        return cell_id in self.entries

    def location(self, cell_id: str) -> GeoPoint:
        return self.entries[cell_id].location

    def region_of(self, cell_id: str, level: str) -> str | None:
        return self._by_level[level].get(cell_id)

    def level_map(self, level: str) -> dict[str, str]:
        """cell -> region mapping for one level (sparse for poi)."""
        return self._by_level[level]

    def regions_at(self, level: str) -> tuple[str, ...]:
        """Sorted region universe at a level; stable across days."""
        return tuple(sorted(set(self._by_level[level].values())))

    def area_to_state(self) -> dict[str, str]:
        return dict(self._area_state)

    def region_centroid(self, level: str, region: str) -> GeoPoint:
        """Unweighted mean of the region's cell coordinates."""
        cells = [c for c, r in self._by_level[level].items() if r == region]
        if not cells:
            raise UnknownPoi(region) if level == "poi" else KeyError(region)
        lon = sum(self.entries[c].location.longitude for c in cells) / len(cells)
        lat = sum(self.entries[c].location.latitude for c in cells) / len(cells)
        return GeoPoint(lon, lat)


@dataclass(frozen=True)
class DeviceFilterPolicy:
    """Keep handsets; drop IoT sensors, roamers and virtual-operator traffic."""

    include_kinds: frozenset[str] = frozenset({"handset"})
    exclude: frozenset[str] = frozenset({"iot_sensor", "roamer", "virtual_operator"})

    def __post_init__(self) -> None:
        if self.include_kinds & self.exclude:
            raise ValueError("include and exclude overlap")

    def keeps(self, subscriber_class: str) -> bool:
        return subscriber_class in self.include_kinds


class DayKeys:
    """Per-day key material for the 24-hour pseudonym rotation.

    Either derived from a master secret (HMAC over the ISO date) or given
    explicitly per day; asking for an unprovisioned day raises
    MissingDayKey.
    """

    def __init__(self, master: bytes | None = None, explicit: Mapping[date, bytes] | None = None):
        if master is None and not explicit:
            raise MissingDayKey("no key material provided")
        self._master = master
        self._explicit = dict(explicit or {})

    @classmethod
    def from_hex(cls, secret_hex: str) -> "DayKeys":
        return cls(master=bytes.fromhex(secret_hex))

    def key_for(self, day: date) -> bytes:
        if day in self._explicit:
            return self._explicit[day]
        if self._master is None:
            raise MissingDayKey(day.isoformat())
        return hmac.new(self._master, day.isoformat().encode(), hashlib.sha256).digest()


def pseudonymize(raw_id: str, day: date, keys: DayKeys) -> str:
    """128-bit hex token, deterministic within a day, unlinkable across days."""
    digest = hmac.new(keys.key_for(day), raw_id.encode(), hashlib.sha256).digest()
    return digest[:16].hex()


@dataclass
class IngestReport:
    """Counters for one parsed file; merge is plain addition."""

    read: int = 0
    kept: int = 0
    filtered_by_policy: int = 0
    quarantined_unknown_cell: int = 0
    quarantined_malformed: int = 0
    quarantined_out_of_day: int = 0
    malformed_lines: list[int] = field(default_factory=list)

    MAX_RECORDED_LINES = 100

    @property
    def quarantined(self) -> int:
        return (
            self.quarantined_unknown_cell
            + self.quarantined_malformed
            + self.quarantined_out_of_day
        )

    def merge(self, other: "IngestReport") -> "IngestReport":
        merged = IngestReport(
            read=self.read + other.read,
            kept=self.kept + other.kept,
            filtered_by_policy=self.filtered_by_policy + other.filtered_by_policy,
            quarantined_unknown_cell=self.quarantined_unknown_cell + other.quarantined_unknown_cell,
            quarantined_malformed=self.quarantined_malformed + other.quarantined_malformed,
            quarantined_out_of_day=self.quarantined_out_of_day + other.quarantined_out_of_day,
        )
        merged.malformed_lines = (self.malformed_lines + other.malformed_lines)[: self.MAX_RECORDED_LINES]
        return merged

    def as_dict(self) -> dict:
        return {
            "read": self.read,
            "kept": self.kept,
            "filtered_by_policy": self.filtered_by_policy,
            "quarantined_unknown_cell": self.quarantined_unknown_cell,
            "quarantined_malformed": self.quarantined_malformed,
            "quarantined_out_of_day": self.quarantined_out_of_day,
            "malformed_lines": self.malformed_lines,
        }


def day_window(day: date, tz: ZoneInfo) -> tuple[float, float]:
    """[start, end) epoch seconds of the local civil day."""
    start = datetime(day.year, day.month, day.day, tzinfo=tz).timestamp()
    nxt = day + timedelta(days=1)
    end = datetime(nxt.year, nxt.month, nxt.day, tzinfo=tz).timestamp()
    return start, end


def parse_events(
    path,
    day: date,
    registry: CellRegistry,
    policy: DeviceFilterPolicy,
    keys: DayKeys,
    tz: ZoneInfo,
) -> tuple[list[SignallingEvent], IngestReport]:
    """Parse one day's JSON-lines file into a cleaned, pseudonymized stream.

    The returned events are sorted by (pseudonym, timestamp). Conservation
    holds exactly: read == kept + filtered_by_policy + quarantined.
    """
    if registry is None:
        raise MissingRegistry("no cell registry")
    report = IngestReport()
    events: list[SignallingEvent] = []
    w_start, w_end = day_window(day, tz)
    token_cache: dict[str, str] = {}
    day_key = keys.key_for(day)  # fail fast on missing key material
    del day_key
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            report.read += 1
            try:
                rec = json.loads(line)
                raw_id = rec["id"]
                ts = datetime.fromisoformat(rec["ts"]).timestamp()
                cell = rec["cell"]
                kind = rec["kind"]
                subscriber_class = rec["subscriber_class"]
                if kind not in EVENT_KINDS:
                    raise ValueError(f"bad kind {kind}")
            except (ValueError, KeyError, TypeError):
                report.quarantined_malformed += 1
                if len(report.malformed_lines) < IngestReport.MAX_RECORDED_LINES:
                    report.malformed_lines.append(line_no)
                continue
            if not policy.keeps(subscriber_class):
                report.filtered_by_policy += 1
                continue
            if cell not in registry:
                report.quarantined_unknown_cell += 1
                continue
            if not (w_start <= ts < w_end):
                report.quarantined_out_of_day += 1
                continue
            token = token_cache.get(raw_id)
            if token is None:
                token = pseudonymize(raw_id, day, keys)
                token_cache[raw_id] = token
            events.append(SignallingEvent(token, ts, cell, kind))
            report.kept += 1
    events.sort(key=lambda e: (e.device_pseudonym, e.timestamp))
    return events, report


def group_by_device(events: Iterable[SignallingEvent]) -> dict[str, list[SignallingEvent]]:
    """Bucket a (pseudonym, ts)-sorted stream per device, order preserved."""
    grouped: dict[str, list[SignallingEvent]] = {}
    for ev in events:
        grouped.setdefault(ev.device_pseudonym, []).append(ev)
    return grouped


def count_poi_devices(
    events: Iterable[SignallingEvent],
    poi: str,
    registry: CellRegistry,
    min_stay: float = 600.0,
    max_stay: float = 14_400.0,
    gap_tolerance: float = 60.0,
) -> int:
    """Distinct devices with a stay of min_stay..max_stay seconds at the POI."""
    if poi not in registry.regions_at("poi"):
        raise UnknownPoi(poi)
    poi_of = registry.level_map("poi").get
    count = 0
    for pseudonym, devents in group_by_device(events).items():
        track = [(e.timestamp, e.cell_id) for e in devents]
        for stay in stays_for_track(track, poi_of, gap_tolerance, pseudonym):
            if stay.region == poi and min_stay <= stay.weight_s <= max_stay:
                count += 1
                break
    return count
