"""Exception hierarchy shared across the orchestration stack.

Every error raised at a module boundary derives from GridSliceError so the
API layer can map failures onto stage-tagged responses uniformly.
"""

from __future__ import annotations


class GridSliceError(Exception):
    """Base class for all orchestration errors."""


# --- intent DSL -----------------------------------------------------------

class IntentSyntaxError(GridSliceError):
    """Malformed intent text. Carries the character offset and what was expected."""

    def __init__(self, position: int, expected: list[str], found: str = ""):
        self.position = position
        self.expected = expected
        self.found = found
        shown = found if found else "end of input"
        super().__init__(
            f"at position {position}: expected {' | '.join(expected)}, found {shown!r}"
        )


class UnknownUnitError(GridSliceError):
    """KPI clause used a unit outside the unit table."""

    def __init__(self, position: int, unit: str):
        self.position = position
        self.unit = unit
        super().__init__(f"at position {position}: unknown unit {unit!r}")


class UntranslatableIntent(GridSliceError):
    """Intent names no application and its KPI clauses underdetermine requirements."""


class ContradictoryClauses(GridSliceError):
    """Explicit KPI overrides produced values outside the requirement invariants."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


# --- SLA registry ---------------------------------------------------------

class DuplicateId(GridSliceError):
    """An id was registered twice."""


class InvalidSla(GridSliceError):
    """SLA document violates its type invariants."""


class NoSlaOnFile(GridSliceError):
    """No SLA exists for the requesting stakeholder pair."""


# --- service orchestrator -------------------------------------------------

class NoMatchingTemplate(GridSliceError):
    """No slice template in the catalog admits the profile's category and bounds."""


class StaleSnapshot(GridSliceError):
    """Resource snapshot lags the live ledger beyond one epoch."""


# --- slice orchestrator ---------------------------------------------------

class IllegalState(GridSliceError):
    """Operation attempted outside the legal lifecycle transition set."""


class PlacementFailed(GridSliceError):
    """Slice instantiation could not place its VNF chain."""


# --- MANO -----------------------------------------------------------------

class ResourceExhausted(GridSliceError):
    """Reservation would exceed node or link capacity."""


class NoFeasiblePlacement(GridSliceError):
    """No VNF-to-node assignment satisfies capacity and latency constraints."""


class UnknownInstance(GridSliceError):
    """VNF instance id does not exist."""


class UnknownLink(GridSliceError):
    """Virtual link id does not exist."""


# --- simulator ------------------------------------------------------------

class SchemaError(GridSliceError):
    """Structured document failed validation. `path` points into the document."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class UnboundSource(GridSliceError):
    """Traffic source refers to a slice that is not carrying traffic."""


class EmptyWindow(GridSliceError):
    """KPI report holds no samples; nothing to evaluate."""


# --- API / runtime --------------------------------------------------------

class UnknownId(GridSliceError):
    """Lookup of an id that was never created."""


class VersionMismatch(GridSliceError):
    """Snapshot schema version differs from what this build can restore."""
