"""SLA registry: stores agreements between stakeholder pairs and
cross-validates translated service requirements before orchestration.

Bounds express what the communication service provider will commit to:
a floor on the latency bound it will accept, ceilings on reliability,
bandwidth, and device count. Tightening a requirement set can therefore
never turn a rejection into an acceptance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import DuplicateId, InvalidSla, NoSlaOnFile
from .intent_dsl import ServiceRequirementSet, SliceCategory, Stakeholder


@dataclass(frozen=True)
class KpiBounds:
    min_latency_ms: float = 0.0
    max_reliability: float = 1.0
    max_bandwidth_mbps: float = math.inf
    max_device_count: int = 10**9

    def violations(self, reqs: ServiceRequirementSet) -> list[str]:
        out = []
        if reqs.latency_bound_ms < self.min_latency_ms:
            out.append(
                f"latency bound {reqs.latency_bound_ms} ms below SLA floor "
                f"{self.min_latency_ms} ms"
            )
        if reqs.reliability > self.max_reliability:
            out.append(
                f"reliability {reqs.reliability} above SLA ceiling {self.max_reliability}"
            )
        if reqs.bandwidth_mbps > self.max_bandwidth_mbps:
            out.append(
                f"bandwidth {reqs.bandwidth_mbps} Mbps above SLA ceiling "
                f"{self.max_bandwidth_mbps} Mbps"
            )
        if reqs.device_count > self.max_device_count:
            out.append(
                f"device count {reqs.device_count} above SLA ceiling {self.max_device_count}"
            )
        return out


@dataclass(frozen=True)
class Sla:
    id: str
    parties: tuple[Stakeholder, Stakeholder]
    permitted_categories: frozenset[SliceCategory]
    kpi_bounds: KpiBounds = field(default_factory=KpiBounds)
    priority: int = 10
    valid: bool = True


@dataclass(frozen=True)
class ValidationResult:
    accepted: bool
    reasons: tuple[str, ...] = ()
    sla_id: str | None = None


def _check_sla(sla: Sla) -> None:
    if sla.parties[0] == sla.parties[1]:
        raise InvalidSla(f"{sla.id}: parties must be distinct")
    if not sla.permitted_categories:
        raise InvalidSla(f"{sla.id}: at least one permitted category required")
    b = sla.kpi_bounds
    if not math.isfinite(b.min_latency_ms) or b.min_latency_ms < 0:
        raise InvalidSla(f"{sla.id}: latency floor must be finite and >= 0")
    if not 0.0 < b.max_reliability <= 1.0:
        raise InvalidSla(f"{sla.id}: reliability ceiling must be in (0, 1]")
    if b.max_bandwidth_mbps <= 0:
        raise InvalidSla(f"{sla.id}: bandwidth ceiling must be positive")
    if b.max_device_count < 1:
        raise InvalidSla(f"{sla.id}: device ceiling must be >= 1")


class SlaRegistry:
    """Single logical store of SLAs; writes are serialized by the command queue."""

    def __init__(self):
        self._slas: dict[str, Sla] = {}

    def register(self, sla: Sla) -> str:
        if sla.id in self._slas:
            raise DuplicateId(f"SLA id {sla.id!r} already registered")
        _check_sla(sla)
        self._slas[sla.id] = sla
        return sla.id

    def invalidate(self, sla_id: str) -> None:
        if sla_id not in self._slas:
            raise NoSlaOnFile(f"no SLA with id {sla_id!r}")
        self._slas[sla_id] = replace(self._slas[sla_id], valid=False)

    def get(self, sla_id: str) -> Sla | None:
        return self._slas.get(sla_id)

    def lookup(self, parties: tuple[Stakeholder, Stakeholder]) -> list[Sla]:
        """All valid SLAs for the (unordered) pair, ordered by (priority, id)."""
        pair = frozenset(parties)
        matches = [
            s for s in self._slas.values() if s.valid and frozenset(s.parties) == pair
        ]
        return sorted(matches, key=lambda s: (s.priority, s.id))

    def validate(
        self, reqs: ServiceRequirementSet, stakeholder: Stakeholder
    ) -> ValidationResult:
        """Cross-validate requirements against the governing stakeholder-CSP SLA.

        The lowest-priority-number valid SLA governs; ties break by id.
        Raises NoSlaOnFile when no SLA exists for the pair.
        """
        candidates = self.lookup((stakeholder, Stakeholder.CSP))
        if not candidates:
            raise NoSlaOnFile(
                f"no SLA on file between {stakeholder.name} and {Stakeholder.CSP.name}"
            )
        governing = candidates[0]
        reasons = []
        if reqs.category not in governing.permitted_categories:
            permitted = ", ".join(sorted(c.value for c in governing.permitted_categories))
            reasons.append(
                f"category {reqs.category.value} not permitted (SLA allows: {permitted})"
            )
        reasons.extend(governing.kpi_bounds.violations(reqs))
        if reasons:
            return ValidationResult(False, tuple(reasons), governing.id)
        return ValidationResult(True, (), governing.id)

    def to_state(self) -> list[dict]:
        return [sla_to_doc(s) for s in sorted(self._slas.values(), key=lambda s: s.id)]

    @classmethod
    def from_state(cls, docs: list[dict]) -> "SlaRegistry":
        reg = cls()
        for doc in docs:
            sla = sla_from_doc(doc)
            reg._slas[sla.id] = sla  # bypass register: state may hold invalidated SLAs
        return reg


def sla_from_doc(doc: dict) -> Sla:
    bounds = doc.get("kpi_bounds", {})
    return Sla(
        id=str(doc["id"]),
        parties=(
            Stakeholder[doc["parties"][0]],
            Stakeholder[doc["parties"][1]],
        ),
        permitted_categories=frozenset(
            SliceCategory(c) for c in doc["permitted_categories"]
        ),
        kpi_bounds=KpiBounds(
            min_latency_ms=float(bounds.get("min_latency_ms", 0.0)),
            max_reliability=float(bounds.get("max_reliability", 1.0)),
            max_bandwidth_mbps=float(bounds.get("max_bandwidth_mbps", math.inf)),
            max_device_count=int(bounds.get("max_device_count", 10**9)),
        ),
        priority=int(doc.get("priority", 10)),
        valid=bool(doc.get("valid", True)),
    )


def sla_to_doc(sla: Sla) -> dict:
    return {
        "id": sla.id,
        "parties": [sla.parties[0].name, sla.parties[1].name],
        "permitted_categories": sorted(c.value for c in sla.permitted_categories),
        "kpi_bounds": {
            "min_latency_ms": sla.kpi_bounds.min_latency_ms,
            "max_reliability": sla.kpi_bounds.max_reliability,
            "max_bandwidth_mbps": sla.kpi_bounds.max_bandwidth_mbps,
            "max_device_count": sla.kpi_bounds.max_device_count,
        },
        "priority": sla.priority,
        "valid": sla.valid,
    }
