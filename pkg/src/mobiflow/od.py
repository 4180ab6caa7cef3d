"""Daily origin-destination matrices from thresholded stays.

A trip is a consecutive pair of important stays (duration >= s_k seconds)
of one device within one day; daily re-keying makes cross-day linkage
impossible, so trips never span midnight. Same-region pairs land on the
diagonal, which downstream consumers need for intra-region travel volumes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import LevelMismatch
from .graph import MobilityGraph
from .stays import Stay

#: Stay-duration threshold in seconds separating important stays from noise.
DEFAULT_SK = 600.0


@dataclass
class ODMatrix:
    """Region x region trip counts for one day (or an aggregated period)."""

    day: date | None
    level: str
    regions: tuple[str, ...]
    flows: np.ndarray
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.regions = tuple(self.regions)
        if list(self.regions) != sorted(set(self.regions)):
            raise ValueError("regions must be sorted and duplicate-free")
        self.flows = np.asarray(self.flows, dtype=np.int64)
        n = len(self.regions)
        if self.flows.shape != (n, n):
            raise ValueError(f"flows must be {n}x{n}")
        if (self.flows < 0).any():
            raise ValueError("flows must be non-negative")
        self.index = {r: i for i, r in enumerate(self.regions)}

    @classmethod
    def zeros(cls, day: date | None, level: str, regions: Sequence[str]) -> "ODMatrix":
        rs = tuple(sorted(set(regions)))
        return cls(day=day, level=level, regions=rs, flows=np.zeros((len(rs), len(rs)), np.int64))

    def total_flow(self) -> int:
        return int(self.flows.sum())

    def off_diagonal_total(self) -> int:
        return int(self.flows.sum() - np.trace(self.flows))

    def write_csv(self, path) -> None:
        """Sparse origin,destination,count triplets, sorted, zero rows omitted."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["origin", "destination", "count"])
            nz = np.argwhere(self.flows > 0)
            for i, j in nz:
                writer.writerow([self.regions[i], self.regions[j], int(self.flows[i, j])])

    @classmethod
    def read_csv(cls, path, day: date | None, level: str, regions: Sequence[str]) -> "ODMatrix":
        out = cls.zeros(day, level, regions)
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                i = out.index[row["origin"]]
                j = out.index[row["destination"]]
                out.flows[i, j] = int(row["count"])
        return out


def important_stays(stays: Sequence[Stay], s_k: float = DEFAULT_SK) -> list[Stay]:
    """Stays lasting at least s_k seconds, original order preserved."""
    return [s for s in stays if s.weight_s >= s_k]


def build_od(
    stays_by_device: Mapping[str, Sequence[Stay]],
    day: date | None,
    level: str,
    regions: Sequence[str],
    s_k: float = DEFAULT_SK,
) -> ODMatrix:
    """Count consecutive important-stay transitions over all devices.

    Each consecutive pair (r_i, r_{i+1}) of one device's important stays
    adds one trip; identical consecutive regions increment the diagonal.
    The region universe is fixed by ``regions`` (normally the registry) so
    matrix shapes are stable across days.
    """
    od = ODMatrix.zeros(day, level, regions)
    flows = od.flows
    index = od.index
    for device in sorted(stays_by_device):
        kept = important_stays(stays_by_device[device], s_k)
        for a, b in zip(kept, kept[1:]):
            flows[index[a.region], index[b.region]] += 1
    return od


def symmetrize(od: ODMatrix) -> MobilityGraph:
    """Undirected mobility graph with A[m,n] = flows[m][n] + flows[n][m].

    Self-loops (the diagonal) are dropped and zero-weight pairs produce no
    edge; only regions incident to at least one edge become nodes.
    """
    sym = od.flows + od.flows.T
    edges = []
    n = len(od.regions)
    for i in range(n):
        for j in range(i + 1, n):
            w = int(sym[i, j])
            if w > 0:
                edges.append((od.regions[i], od.regions[j], float(w)))
    return MobilityGraph(edges)


def aggregate_period(ods: Sequence[ODMatrix]) -> ODMatrix:
    """Entrywise sum of daily matrices sharing level and region universe."""
    if not ods:
        raise LevelMismatch("nothing to aggregate")
    first = ods[0]
    total = np.zeros_like(first.flows)
    for od in ods:
        if od.level != first.level or od.regions != first.regions:
            raise LevelMismatch(f"{od.level}/{len(od.regions)} vs {first.level}/{len(first.regions)}")
        total += od.flows
    return ODMatrix(day=None, level=first.level, regions=first.regions, flows=total)
