"""Stay detection and nightly home-postcode derivation.

A stay is a maximal run of consecutive events inside one region at the
chosen resolution. Tower ping-pong is the dominant artifact in cell-level
tracks, so a single interior excursion into another region shorter than
``gap_tolerance`` is absorbed into its enclosing run; the enclosing stay
then spans the excursion (entry of the first event to exit of the last).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import UnsortedInput

#: Excursions shorter than this many seconds are treated as ping-pong.
DEFAULT_GAP_TOLERANCE = 60.0


@dataclass(frozen=True, slots=True)
class Stay:
    """Time-weighted presence of one device in one region."""

    pseudonym: str
    region: str
    enter: float
    exit: float

    def __post_init__(self) -> None:
        if self.exit < self.enter:
            raise ValueError("exit before enter")

    @property
    def weight_s(self) -> float:
        return self.exit - self.enter


@dataclass(frozen=True, slots=True)
class NightLocation:
    """Postcode with the most stay weight in the night window."""

    pseudonym: str
    postcode: str
    supporting_weight_s: float


def detect_stays(
    track: Iterable[tuple[float, str]],
    gap_tolerance: float = DEFAULT_GAP_TOLERANCE,
    pseudonym: str = "",
) -> list[Stay]:
    """Collapse one device's time-ordered (timestamp, region) track into stays.

    Raises UnsortedInput when timestamps decrease. An isolated single event
    yields a zero-duration stay (enter == exit), which never survives the
    importance threshold downstream.
    """
    runs: list[list] = []  # [region, enter, exit]
    prev_ts = None
    for ts, region in track:
        if prev_ts is not None and ts < prev_ts:
            raise UnsortedInput(f"timestamp {ts} after {prev_ts}")
        prev_ts = ts
        if runs and runs[-1][0] == region:
            runs[-1][2] = ts
            continue
        if (
            len(runs) >= 2
            and runs[-2][0] == region
            and runs[-1][2] - runs[-1][1] < gap_tolerance
        ):
            # ping-pong: drop the short excursion, extend the enclosing run
            runs.pop()
            runs[-1][2] = ts
            continue
        runs.append([region, ts, ts])
    return [Stay(pseudonym=pseudonym, region=r, enter=e, exit=x) for r, e, x in runs]


def stays_for_track(
    events: Sequence[tuple[float, str]],
    region_of: Callable[[str], str | None],
    gap_tolerance: float = DEFAULT_GAP_TOLERANCE,
    pseudonym: str = "",
) -> list[Stay]:
    """detect_stays over (timestamp, cell) events mapped through region_of.

    Events whose cell has no region at the level are mapped to a reserved
    out-of-level region, so presence gaps still break runs; callers filter
    those stays out.
    """
    track = [(ts, region_of(cell) or OUT_OF_LEVEL) for ts, cell in events]
    return detect_stays(track, gap_tolerance, pseudonym)


#: Region id used for events not mapped at the requested level (sparse levels).
OUT_OF_LEVEL = "__unmapped__"


def night_location(
    stays: Sequence[Stay], window: tuple[float, float]
) -> NightLocation | None:
    """Postcode with maximal stay weight inside [window_start, window_end).

    Ties break toward the lexicographically smaller postcode; returns None
    when no stay overlaps the window.
    """
    w_start, w_end = window
    weight: dict[str, float] = {}
    pseudonym = ""
    for stay in stays:
        overlap = min(stay.exit, w_end) - max(stay.enter, w_start)
        if overlap > 0:
            weight[stay.region] = weight.get(stay.region, 0.0) + overlap
            pseudonym = stay.pseudonym
    if not weight:
        return None
    best = min(weight, key=lambda r: (-weight[r], r))
    return NightLocation(pseudonym=pseudonym, postcode=best, supporting_weight_s=weight[best])
