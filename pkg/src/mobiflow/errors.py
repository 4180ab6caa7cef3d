"""Exception hierarchy shared across the pipeline.

Every error raised by mobiflow derives from MobiflowError so callers (and
the CLI exit-code mapping) can catch data problems without swallowing bugs.
"""


class MobiflowError(Exception):
    """Base class for all mobiflow errors."""


# -- numeric kernels ---------------------------------------------------------

class ZeroTotalWeight(MobiflowError):
    """An aggregation was asked for with no positive weight available."""


class EmptyInput(MobiflowError):
    """An aggregation was asked for on an empty collection."""


# -- ingest ------------------------------------------------------------------

class MissingDayKey(MobiflowError):
    """No pseudonymization key material is provisioned for the day."""


class MissingRegistry(MobiflowError):
    """Cell registry unavailable or unreadable."""


class UnknownPoi(MobiflowError):
    """Requested POI is not present in the registry."""


# -- stays -------------------------------------------------------------------

class UnsortedInput(MobiflowError):
    """Per-device events were not time-ordered."""


# -- mobility ----------------------------------------------------------------

class EmptyWeek(MobiflowError):
    """A comparison week contains no observations."""


# -- od ----------------------------------------------------------------------

class LevelMismatch(MobiflowError):
    """OD matrices with different levels or region universes were combined."""


# -- activity space ----------------------------------------------------------

class EmptyPoints(MobiflowError):
    """Ellipse fit requested on an empty point set."""


class UnknownRegion(MobiflowError):
    """Region id not present in the matrix or registry."""


class UnmappedArea(MobiflowError):
    """A political area has no federal-state assignment."""


# -- graph -------------------------------------------------------------------

class UnknownNode(MobiflowError):
    """Node id not present in the graph."""


class NoTriplets(MobiflowError):
    """Global clustering requested on a graph without any triplet."""


class PartialPartition(MobiflowError):
    """Partition does not cover every node of the graph."""


class EmptyGraph(MobiflowError):
    """Community detection requested on an empty graph."""


# -- epi ---------------------------------------------------------------------

class UnknownSeed(MobiflowError):
    """Seed region not present in the OD region universe."""


class MissingPopulation(MobiflowError):
    """A region in the infection series has no population figure."""


class EmptySample(MobiflowError):
    """A rank test was invoked with an empty sample."""


class NoDates(MobiflowError):
    """Lag scan invoked with an empty date range."""


# -- synthgen ----------------------------------------------------------------

class InvalidScenario(MobiflowError):
    """Scenario configuration violates its invariants."""


# -- cli / pipeline ----------------------------------------------------------

class MissingInput(MobiflowError):
    """A required input file for the day is absent."""


class MissingAggregates(MobiflowError):
    """A report was requested before its daily aggregates exist."""
