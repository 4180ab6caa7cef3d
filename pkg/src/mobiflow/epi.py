"""Infection time series vs mobility outflow: treatment/control lag scan.

Municipalities are split into a treatment group (at least one recorded
arrival from the seed region within the arrival window) and a control
group; a day-by-day two-sided Mann-Whitney U test locates the first date
the groups' per-capita infection rates separate at the chosen alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptySample,
    MissingPopulation,
    NoDates,
    UnknownSeed,
)
from .od import ODMatrix

#: Largest combined sample size for which the exact permutation p-value is used.
EXACT_LIMIT = 20

#: Groups smaller than this are flagged as low power in scan results.
LOW_POWER_GROUP = 5


@dataclass(frozen=True)
class InfectionSeries:
    """Cumulative case counts per region plus region populations.

    ``cumulative`` maps region -> ordered (date, cumulative_cases). Raw
    feeds contain reporting corrections (dips); cleaning clamps negative
    daily differences to zero, so the cleaned cumulative is non-decreasing.
    """

    cumulative: Mapping[str, Sequence[tuple[date, int]]]
    population: Mapping[str, int]

    def __post_init__(self) -> None:
        for region, series in self.cumulative.items():
            days = [d for d, _ in series]
            if any(b <= a for a, b in zip(days, days[1:])):
                raise ValueError(f"dates not strictly increasing for {region}")

    @classmethod
    def from_csv(cls, infections_path, population_path) -> "InfectionSeries":
        import csv

        series: dict[str, list[tuple[date, int]]] = {}
        with open(infections_path, newline="") as fh:
            for row in csv.DictReader(fh):
                series.setdefault(row["municipality"], []).append(
                    (date.fromisoformat(row["date"]), int(row["cumulative_cases"]))
                )
        for rows in series.values():
            rows.sort()
        population: dict[str, int] = {}
        with open(population_path, newline="") as fh:
            for row in csv.DictReader(fh):
                population[row["municipality"]] = int(row["population"])
        return cls(cumulative=series, population=population)

    def daily_new(self) -> dict[str, list[tuple[date, int]]]:
        """First difference of cumulative counts, negatives clamped to 0."""
        out: dict[str, list[tuple[date, int]]] = {}
        for region, series in self.cumulative.items():
            prev = 0
            rows = []
            for day, cum in series:
                rows.append((day, max(0, cum - prev)))
                prev = cum
            out[region] = rows
        return out

    def cleaned_cumulative(self) -> dict[str, list[tuple[date, int]]]:
        """Running sum of clamped daily differences (non-decreasing)."""
        out: dict[str, list[tuple[date, int]]] = {}
        for region, rows in self.daily_new().items():
            acc = 0
            cleaned = []
            for day, new in rows:
                acc += new
                cleaned.append((day, acc))
            out[region] = cleaned
        return out


def daily_new_per_capita(series: InfectionSeries) -> dict[str, list[tuple[date, float]]]:
    """Clamped daily new cases divided by region population."""
    out: dict[str, list[tuple[date, float]]] = {}
    for region, rows in series.daily_new().items():
        pop = series.population.get(region)
        if pop is None or pop <= 0:
            raise MissingPopulation(region)
        out[region] = [(day, new / pop) for day, new in rows]
    return out


def cumulative_per_capita(series: InfectionSeries) -> dict[str, list[tuple[date, float]]]:
    """Cleaned cumulative cases divided by region population."""
    out: dict[str, list[tuple[date, float]]] = {}
    for region, rows in series.cleaned_cumulative().items():
        pop = series.population.get(region)
        if pop is None or pop <= 0:
            raise MissingPopulation(region)
        out[region] = [(day, cum / pop) for day, cum in rows]
    return out


def arrivals_from_seed(
    ods: Iterable[ODMatrix], seed: str, window: tuple[date, date] | None = None
) -> dict[str, int]:
    """Total arrivals per municipality out of the seed region.

    Sums flows[seed][m] for m != seed over the daily matrices whose day
    falls inside the inclusive window (all matrices when window is None).
    Only municipalities with a positive count appear in the result.
    """
    arrivals: dict[str, int] = {}
    for od in ods:
        if window is not None and od.day is not None:
            if not (window[0] <= od.day <= window[1]):
                continue
        if seed not in od.index:
            raise UnknownSeed(seed)
        row = od.flows[od.index[seed]]
        for j, region in enumerate(od.regions):
            if region == seed:
                continue
            count = int(row[j])
            if count:
                arrivals[region] = arrivals.get(region, 0) + count
    return arrivals


@dataclass(frozen=True)
class ExposureSplit:
    """Treatment municipalities (any seed arrival) vs the control complement."""

    treatment: frozenset[str]
    control: frozenset[str]

    @classmethod
    def from_arrivals(
        cls, arrivals: Mapping[str, int], universe: Iterable[str], seed: str
    ) -> "ExposureSplit":
        everyone = {m for m in universe if m != seed}
        treated = frozenset(m for m, n in arrivals.items() if n > 0 and m in everyone)
        return cls(treatment=treated, control=frozenset(everyone - treated))


def _midranks(pooled: Sequence[float]) -> list[float]:
    order = sorted(range(len(pooled)), key=pooled.__getitem__)
    ranks = [0.0] * len(pooled)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float]) -> tuple[float, float]:
    """Two-sided Mann-Whitney U test with midrank ties.

    Returns (U, p) where U is sample_a's statistic. Up to a combined size
    of EXACT_LIMIT the p-value is the exact permutation probability of a
    deviation of U from its mean at least as large as observed; beyond
    that, a normal approximation with tie correction and continuity
    correction is used. All-tied samples give p = 1.
    """
    n_a, n_b = len(sample_a), len(sample_b)
    if n_a == 0 or n_b == 0:
        raise EmptySample("both samples must be non-empty")
    pooled = list(sample_a) + list(sample_b)
    ranks = _midranks(pooled)
    r_a = math.fsum(ranks[:n_a])
    u_a = r_a - n_a * (n_a + 1) / 2.0
    mu = n_a * n_b / 2.0

    if n_a + n_b <= EXACT_LIMIT:
        # midranks are half-integers, so U deviations compare exactly
        dev = abs(u_a - mu)
        total = 0
        extreme = 0
        for idx in combinations(range(n_a + n_b), n_a):
            u = math.fsum(ranks[i] for i in idx) - n_a * (n_a + 1) / 2.0
            total += 1
            if abs(u - mu) >= dev:
                extreme += 1
        return u_a, extreme / total

    n = n_a + n_b
    tie_sum = 0.0
    i = 0
    srt = sorted(pooled)
    while i < n:
        j = i
        while j + 1 < n and srt[j + 1] == srt[i]:
            j += 1
        t = j - i + 1
        tie_sum += t**3 - t
        i = j + 1
    var = (n_a * n_b / 12.0) * ((n + 1) - tie_sum / (n * (n - 1)))
    if var <= 0.0:
        return u_a, 1.0  # every observation tied
    z = (abs(u_a - mu) - 0.5) / math.sqrt(var)
    p = 2.0 * _normal_sf(max(0.0, z))
    return u_a, min(1.0, p)


@dataclass(frozen=True)
class LagScanResult:
    """Per-date p-values plus the first significant date and its lag."""

    points: list[tuple[date, float]] = field(default_factory=list)
    first_significant: date | None = None
    lag_days: int | None = None
    low_power: bool = False


def lag_scan(
    split: ExposureSplit,
    rates: Mapping[str, Mapping[date, float]],
    dates: Sequence[date],
    alpha: float = 0.01,
    seed_first_case: date | None = None,
) -> LagScanResult:
    """Mann-Whitney scan of treatment vs control rates over the dates.

    Municipalities missing from ``rates`` (or missing a date) count as
    zero — infection feeds only list regions with cases. The lag is in
    days from the seed region's first-case date when that is provided.
    """
    if not dates:
        raise NoDates("empty date range")
    treatment = sorted(split.treatment)
    control = sorted(split.control)
    if not treatment or not control:
        raise EmptySample("both exposure groups must be non-empty")
    points: list[tuple[date, float]] = []
    first_sig: date | None = None
    for day in dates:
        sample_t = [float(rates.get(m, {}).get(day, 0.0)) for m in treatment]
        sample_c = [float(rates.get(m, {}).get(day, 0.0)) for m in control]
        _, p = mann_whitney_u(sample_t, sample_c)
        points.append((day, p))
        if first_sig is None and p < alpha:
            first_sig = day
    lag = None
    if first_sig is not None and seed_first_case is not None:
        lag = (first_sig - seed_first_case).days
    return LagScanResult(
        points=points,
        first_significant=first_sig,
        lag_days=lag,
        low_power=min(len(treatment), len(control)) < LOW_POWER_GROUP,
    )


def rates_by_date(series_rows: Mapping[str, Sequence[tuple[date, float]]]) -> dict[str, dict[date, float]]:
    """Reshape per-region (date, value) rows into date-keyed maps."""
    return {region: dict(rows) for region, rows in series_rows.items()}
